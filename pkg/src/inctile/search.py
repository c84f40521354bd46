"""Exhaustive tile search, efficiency classes and tile-library construction."""

from __future__ import annotations

import itertools
import json
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .logic import (
    BooleanFunction,
    COMP_PER_BIT,
    TileDescriptor,
    cost_profile,
    describe_parametric,
    describe_tile,
    lut_configs,
    map_to_luts,
)
from .shapes import GridPattern, PatternError, Signedness, UNSIGNED, canonical_cells

log = logging.getLogger(__name__)

LIBRARY_FORMAT = "inctile-library/1"
PROVENANCES = ("searched", "parametric-2xk", "rectangular-base", "helper")


@dataclass(frozen=True)
class Candidate:
    pattern: GridPattern
    cost_mult: int
    w_out: int
    detached: tuple = ()

    @property
    def cost_tile(self) -> Fraction:
        return self.cost_mult + COMP_PER_BIT * self.w_out

    @property
    def efficiency(self) -> Fraction:
        return Fraction(self.pattern.area_) / self.cost_tile


@dataclass
class EfficiencyClass:
    efficiency: Fraction
    members: list[Candidate] = field(default_factory=list)

    def __len__(self):
        return len(self.members)


def _evaluate_range(args):
    bx, by, start, stop, tag = args
    s = Signedness.from_tag(tag)
    out = []
    for mask in range(start, stop):
        p = GridPattern(bx, by, mask)
        if not p.is_canonical():
            continue
        prof = cost_profile(p, s)
        if prof is None:
            continue
        _, cm, w, det = prof
        out.append(Candidate(p, cm, w, (det,) if det is not None else ()))
    return out


def enumerate_and_classify(bound: tuple[int, int] = (4, 4), s: Signedness = UNSIGNED,
                           workers: int = 1, chunk: int = 4096) -> list[EfficiencyClass]:
    """Evaluate every canonical non-empty pattern in the window and group by efficiency.

    Classes come back sorted by descending efficiency, members by mask.  Patterns
    with an output depending on more than seven operand bits are unrealizable
    and skipped.
    """
    bx, by = bound
    if bx * by > 25:
        raise PatternError("search windows beyond 5x5 are not supported")
    if bx * by > 16:
        warnings.warn(f"{bx}x{by} search evaluates 2^{bx * by} patterns", stacklevel=2)
    total = 1 << (bx * by)
    jobs = [(bx, by, lo, min(lo + chunk, total), s.tag()) for lo in range(1, total, chunk)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_evaluate_range, jobs))
    else:
        parts = [_evaluate_range(j) for j in jobs]
    classes: dict[Fraction, EfficiencyClass] = {}
    for cand in itertools.chain.from_iterable(parts):
        e = cand.efficiency
        classes.setdefault(e, EfficiencyClass(e)).members.append(cand)
    for c in classes.values():
        c.members.sort(key=lambda m: m.pattern.mask)
    return sorted(classes.values(), key=lambda c: c.efficiency, reverse=True)


def census(classes: Sequence[EfficiencyClass], above: Fraction | None = None) -> list[tuple[float, int]]:
    return [(float(c.efficiency), len(c)) for c in classes if above is None or c.efficiency > above]


# ---------------------------------------------------------------------------
# library

@dataclass
class LibraryEntry:
    tile: TileDescriptor
    provenance: str

    @property
    def key(self):
        return self.tile.key


@dataclass
class TileLibrary:
    entries: list[LibraryEntry] = field(default_factory=list)
    version: str = "custom"
    parametric_2xk: bool = False

    def __post_init__(self):
        self._keys = {e.key for e in self.entries}
        if len(self._keys) != len(self.entries):
            raise ValueError("duplicate library entries")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, key) -> bool:
        return key in self._keys

    @property
    def tiles(self) -> list[TileDescriptor]:
        return [e.tile for e in self.entries]

    def add(self, tile: TileDescriptor, provenance: str) -> bool:
        if provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {provenance!r}")
        if tile.key in self._keys:
            return False
        self.entries.append(LibraryEntry(tile, provenance))
        self._keys.add(tile.key)
        return True

    def copy(self, version: str | None = None) -> "TileLibrary":
        return TileLibrary(list(self.entries), version or self.version, self.parametric_2xk)

    def filtered(self, keep: Callable[[LibraryEntry], bool], version: str | None = None) -> "TileLibrary":
        return TileLibrary([e for e in self.entries if keep(e)], version or self.version,
                           self.parametric_2xk)

    def instantiate(self, max_k: int) -> list[TileDescriptor]:
        """Tiles usable on a board, with the 2xk family unrolled up to ``max_k``."""
        tiles = self.tiles
        if self.parametric_2xk:
            for k in range(2, max_k + 1):
                tiles.append(describe_parametric(k))
                tiles.append(describe_parametric(k, transposed=True))
        return tiles

    # serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "format": LIBRARY_FORMAT,
            "version": self.version,
            "parametric_2xk": self.parametric_2xk,
            "entries": [_entry_to_dict(e) for e in self.entries],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps() + "\n")

    @classmethod
    def from_dict(cls, data: dict) -> "TileLibrary":
        if data.get("format") != LIBRARY_FORMAT:
            raise ValueError(f"unsupported library format {data.get('format')!r}")
        entries = [_entry_from_dict(d) for d in data["entries"]]
        return cls(entries, data.get("version", "unknown"), bool(data.get("parametric_2xk")))

    @classmethod
    def load(cls, path) -> "TileLibrary":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _entry_to_dict(e: LibraryEntry) -> dict:
    t = e.tile
    d = {
        "mask": t.pattern.mask,
        "bound_x": t.pattern.bound_x,
        "bound_y": t.pattern.bound_y,
        "signedness": t.signedness.tag(),
        "kind": t.kind,
        "cost_mult": t.cost_mult,
        "w_out": t.w_out,
        "area": t.area,
        "efficiency": str(t.efficiency),
        "provenance": e.provenance,
        "detached": [list(c) for c in t.detached],
        "value_range": [t.value_lo, t.value_hi],
    }
    if t.kind == "lut":
        d["equations"] = [
            {"weight": f.weight, "support": [f"{a}{i}" for a, i in f.support],
             "table": f"{f.table:x}", "sop": [[v, c] for v, c in f.sop], "expr": f.expression()}
            for f in t.functions
        ]
        plan = t.lut_plan
        d["luts"] = [
            {"inputs": [f"{a}{i}" for a, i in cfg.inputs], "init": f"{cfg.init:016x}",
             "o6": cfg.o6, "o5": cfg.o5}
            for cfg in lut_configs(t.functions, plan)
        ]
    return d


def _parse_input(s: str):
    return (s[0], int(s[1:]))


def _entry_from_dict(d: dict) -> LibraryEntry:
    pattern = GridPattern(d["bound_x"], d["bound_y"], d["mask"])
    s = Signedness.from_tag(d["signedness"])
    if d["kind"] == "carry":
        k = max(pattern.bound_x, pattern.bound_y)
        tile = describe_parametric(k, transposed=pattern.bound_x == 2 and pattern.bound_y != 2)
    else:
        funcs = tuple(
            BooleanFunction(f["weight"], tuple(_parse_input(i) for i in f["support"]),
                            int(f["table"], 16), tuple((v, c) for v, c in f["sop"]))
            for f in d["equations"]
        )
        lo, hi = d["value_range"]
        tile = TileDescriptor(pattern, s, pattern.area_, len(funcs), map_to_luts(funcs).cost,
                              funcs, tuple(tuple(c) for c in d["detached"]), "lut", lo, hi)
    if tile.cost_mult != d["cost_mult"] or tile.w_out != d["w_out"]:
        raise ValueError(f"library entry {pattern} metrics do not match its equations")
    return LibraryEntry(tile, d["provenance"])


# ---------------------------------------------------------------------------
# pruning and augmentation

TABLE_I_RECTANGLES = ((1, 1), (1, 2), (2, 1), (2, 3), (3, 2), (3, 3))


def rectangular_base() -> list[TileDescriptor]:
    return [describe_tile(GridPattern.rectangle(w, h)) for w, h in TABLE_I_RECTANGLES]


def _shape_key(cells) -> tuple:
    return canonical_cells(cells)


def prune_redundant(candidates: Iterable[Candidate],
                    base: Sequence[TileDescriptor] | None = None) -> list[Candidate]:
    """Drop tiles that split into two library shapes costing no more in total.

    The library for the split test is the current candidate set plus the
    rectangular base; iterated until nothing more is removed.
    """
    if base is None:
        base = rectangular_base()
    base_cost = {_shape_key(t.cells): t.cost_tile for t in base}
    current = {_shape_key(c.pattern.cells): c for c in candidates}
    while True:
        lib_cost = dict(base_cost)
        for k, c in current.items():
            lib_cost[k] = min(lib_cost.get(k, c.cost_tile), c.cost_tile)
        removed = [k for k, c in current.items() if _splits_cheaper(c, lib_cost)]
        if not removed:
            break
        for k in removed:
            del current[k]
    return sorted(current.values(), key=lambda c: (-c.efficiency, c.pattern.mask))


def _splits_cheaper(c: Candidate, lib_cost: dict) -> bool:
    cells = c.pattern.cells
    n = len(cells)
    target = c.cost_tile
    for sub in range(1, (1 << n) - 1):
        if not sub & 1:
            continue  # first cell always in the first part
        a = [cells[i] for i in range(n) if sub >> i & 1]
        b = [cells[i] for i in range(n) if not sub >> i & 1]
        ca = lib_cost.get(_shape_key(a))
        if ca is None or ca > target:
            continue
        cb = lib_cost.get(_shape_key(b))
        if cb is not None and ca + cb <= target:
            return True
    return False


def helper_patterns(bound: tuple[int, int] = (4, 4)) -> list[GridPattern]:
    bx, by = bound
    out = {GridPattern.from_cells([(0, 0)], bx, by)}
    cells = [(x, y) for y in range(by) for x in range(bx)]
    for a, b in itertools.combinations(cells, 2):
        p = GridPattern.from_cells([a, b], bx, by)
        if p.is_canonical():
            out.add(p)
    return sorted(out, key=lambda p: p.mask)


def augment_helpers(lib: TileLibrary, bound: tuple[int, int] = (4, 4)) -> TileLibrary:
    out = lib.copy()
    shapes = {_shape_key(t.cells) for t in out.tiles}
    for p in helper_patterns(bound):
        if _shape_key(p.cells) in shapes:
            continue
        out.add(describe_tile(p), "helper")
        shapes.add(_shape_key(p.cells))
    return out


def library_from_candidates(cands: Iterable[Candidate], version: str,
                            with_base: bool = True, with_2xk: bool = True) -> TileLibrary:
    lib = TileLibrary(version=version, parametric_2xk=with_2xk)
    shapes = set()
    for c in cands:
        det = c.detached[0] if c.detached else None
        t = describe_tile(c.pattern, UNSIGNED, detached=det)
        lib.add(t, "searched")
        shapes.add(_shape_key(t.cells))
    if with_base:
        for t in rectangular_base():
            if _shape_key(t.cells) not in shapes:
                lib.add(t, "rectangular-base")
                shapes.add(_shape_key(t.cells))
    return lib


def rectangular_library() -> TileLibrary:
    lib = TileLibrary(version="rectangular", parametric_2xk=True)
    for t in rectangular_base():
        lib.add(t, "rectangular-base")
    return lib


def is_protected(e: LibraryEntry) -> bool:
    return e.provenance in ("rectangular-base", "parametric-2xk")


@dataclass
class PruneRound:
    size_before: int
    used: int
    unproven: int


def prune_unused(lib: TileLibrary, boards, solve_fn, max_rounds: int = 10) -> tuple[TileLibrary, list[PruneRound]]:
    """Repeatedly solve the benchmark boards and drop tiles no solution uses.

    ``solve_fn(board, lib)`` returns a tiling solution.  Rectangular base tiles
    and the 2xk family are always kept.  If a solve is not proven optimal every
    tile it could still need is retained conservatively.
    """
    rounds: list[PruneRound] = []
    current = lib
    for _ in range(max_rounds):
        used: set = set()
        unproven = 0
        for board in boards:
            sol = solve_fn(board, current)
            if not sol.optimal:
                unproven += 1
            for p in sol.placements:
                used.add(p.tile.key)
        if unproven:
            log.warning("%d benchmark boards not proven optimal; keeping library as is", unproven)
            rounds.append(PruneRound(len(current), len(used), unproven))
            break
        nxt = current.filtered(lambda e: e.key in used or is_protected(e))
        rounds.append(PruneRound(len(current), len(used), unproven))
        if len(nxt) == len(current):
            break
        current = nxt
    return current, rounds


# the default is the complete searched set; the pruned one keeps only tiles used by
# objective-optimal tilings up to 8x8 and loses LUTs after compression on some boards
BUILTIN_LIBRARIES = {"default": "full_library.json", "full": "full_library.json",
                     "pruned": "pruned_library.json"}


def load_library(name_or_path: str = "default") -> TileLibrary:
    """Load a shipped library ("default", "full", "pruned", "rectangular") or a JSON file."""
    if name_or_path == "rectangular":
        return rectangular_library()
    if name_or_path in BUILTIN_LIBRARIES:
        from importlib import resources
        text = resources.files("inctile.data").joinpath(BUILTIN_LIBRARIES[name_or_path]).read_text()
        return TileLibrary.from_dict(json.loads(text))
    return TileLibrary.load(name_or_path)
