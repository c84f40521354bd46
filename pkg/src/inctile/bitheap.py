"""Bit heaps, compressor definitions and greedy compressor-tree planning.

Bits are abstract integer ids; :class:`BitHeap` records for each id its
column (weight index) and where it comes from.  :func:`compress` reduces the
heap stage by stage with generalized parallel counters until a two-row
(binary) or three-row (ternary) carry-chain adder can finish the sum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

from .logic import lut_configs

DEFAULT_COMPRESSORS = "compressors.json"


@dataclass(frozen=True)
class Bit:
    id: int
    column: int
    # ("tile", placement index, output index) | ("const",) | ("comp", instance index, output index)
    source: tuple
    # driven by a LUT's O6 output, so it can feed a carry cell without a route-through LUT
    direct: bool = False


@dataclass
class BitHeap:
    bits: dict = field(default_factory=dict)
    next_id: int = 0
    width: int = 0      # columns at or above this index are dropped (always zero)
    trunc: int = 0

    def add(self, column: int, source: tuple, direct: bool = False) -> int | None:
        if column >= self.width:
            return None
        b = Bit(self.next_id, column, source, direct)
        self.bits[b.id] = b
        self.next_id += 1
        return b.id

    def columns(self, ids=None) -> dict[int, list[int]]:
        cols: dict[int, list[int]] = {}
        for i in sorted(self.bits if ids is None else ids):
            cols.setdefault(self.bits[i].column, []).append(i)
        return cols

    def heights(self, ids=None) -> dict[int, int]:
        return {c: len(v) for c, v in self.columns(ids).items()}

    def max_height(self, ids=None) -> int:
        return max(self.heights(ids).values(), default=0)


@dataclass(frozen=True)
class CompressorDef:
    """A counter summing ``shape[j]`` bits of column ``anchor + j``."""

    name: str
    shape: tuple[int, ...]
    outputs: int
    cost: int

    def __post_init__(self):
        if self.cost <= 0:
            raise ValueError(f"{self.name}: cost must be positive")
        if not self.shape or any(k < 0 for k in self.shape) or self.shape[0] == 0:
            raise ValueError(f"{self.name}: bad input shape {self.shape}")
        if self.max_input >= 1 << self.outputs:
            raise ValueError(f"{self.name}: {self.outputs} outputs cannot hold {self.max_input}")

    @property
    def max_input(self) -> int:
        return sum(k << j for j, k in enumerate(self.shape))

    @property
    def n_inputs(self) -> int:
        return sum(self.shape)

    @property
    def removed(self) -> int:
        return self.n_inputs - self.outputs

    @property
    def efficiency(self) -> float:
        return self.removed / self.cost


@dataclass(frozen=True)
class RowCompressorDef:
    """4:2 row compressor on the carry chain: one LUT per column.

    Column ``i`` takes up to four bits ``a, b, c, d``; the LUT gives
    ``a^b^c^d`` and ``maj(a, b, c)``, and the carry cell adds ``d`` and the
    chain carry.  Over ``L`` columns it emits ``L`` sum bits, ``L`` majority
    bits one column up and the final carry out.
    """

    name: str
    cost_per_column: int = 1
    rows: int = 4

    def __post_init__(self):
        if self.cost_per_column <= 0:
            raise ValueError(f"{self.name}: cost must be positive")
        if self.rows != 4:
            raise ValueError("only the 4:2 row compressor is supported")

    def cost(self, length: int) -> int:
        return self.cost_per_column * length

    @staticmethod
    def out_columns(anchor: int, length: int) -> list[int]:
        top = anchor + length - 1
        return list(range(anchor, top + 1)) + list(range(anchor + 1, top + 2)) + [top + 1]


@dataclass(frozen=True)
class FinalAdderDef:
    rows: int
    cost_per_bit: int = 1


@dataclass
class CompressorLibrary:
    compressors: list[CompressorDef]
    row_compressors: list[RowCompressorDef] = field(default_factory=list)
    binary: FinalAdderDef = field(default_factory=lambda: FinalAdderDef(2))
    ternary: FinalAdderDef | None = field(default_factory=lambda: FinalAdderDef(3))

    @classmethod
    def from_dict(cls, data: dict) -> "CompressorLibrary":
        comps, rows = [], []
        for c in data.get("compressors", []):
            if c.get("type", "gpc") == "row":
                rows.append(RowCompressorDef(c["name"], int(c.get("cost_per_column", 1)),
                                             int(c.get("rows", 4))))
            else:
                comps.append(CompressorDef(c["name"], tuple(c["shape"]), int(c["outputs"]),
                                           int(c["cost"])))
        fa = data.get("final_adders", {})
        binary = FinalAdderDef(2, int(fa.get("binary", {}).get("cost_per_bit", 1)))
        ternary = None
        if fa.get("ternary", {"enabled": True}).get("enabled", True):
            ternary = FinalAdderDef(3, int(fa.get("ternary", {}).get("cost_per_bit", 1)))
        return cls(comps, rows, binary, ternary)

    def to_dict(self) -> dict:
        return {
            "compressors": [{"name": c.name, "type": "gpc", "shape": list(c.shape),
                             "outputs": c.outputs, "cost": c.cost} for c in self.compressors]
            + [{"name": r.name, "type": "row", "rows": r.rows, "cost_per_column": r.cost_per_column}
               for r in self.row_compressors],
            "final_adders": {
                "binary": {"cost_per_bit": self.binary.cost_per_bit},
                "ternary": {"enabled": self.ternary is not None,
                            "cost_per_bit": self.ternary.cost_per_bit if self.ternary else 1},
            },
        }

    @classmethod
    def load(cls, path=None) -> "CompressorLibrary":
        if path is None:
            text = resources.files("inctile.data").joinpath(DEFAULT_COMPRESSORS).read_text()
        else:
            with open(path) as fh:
                text = fh.read()
        return cls.from_dict(json.loads(text))


def default_compressors() -> CompressorLibrary:
    return CompressorLibrary.load()


@dataclass(frozen=True)
class CompressorInstance:
    comp: CompressorDef | RowCompressorDef
    anchor: int
    inputs: tuple[tuple[int, ...], ...]   # bit ids per input column (anchor + j)
    outputs: tuple[int | None, ...]       # bit ids, None if dropped beyond the width
    out_columns: tuple[int, ...]
    stage: int
    cost: int

    @property
    def is_row(self) -> bool:
        return isinstance(self.comp, RowCompressorDef)


@dataclass
class CompressionPlan:
    heap: BitHeap
    stages: list[list[CompressorInstance]]
    adder_rows: int
    # final adder operands: column -> bit ids (at most adder_rows each)
    final_columns: dict[int, list[int]]
    adder_lo: int
    adder_hi: int          # last adder column (inclusive); lo > hi means no adder
    passthrough: dict[int, int]   # column -> bit id for columns below the adder
    # adder columns whose single bit drives the carry cell directly (no LUT)
    direct_columns: frozenset = frozenset()

    @property
    def compressor_cost(self) -> int:
        return sum(ci.cost for st in self.stages for ci in st)

    @property
    def final_adder_bits(self) -> int:
        return max(0, self.adder_hi - self.adder_lo + 1)

    @property
    def final_adder_luts(self) -> int:
        return self.final_adder_bits - len(self.direct_columns)

    @property
    def lut_cost(self) -> int:
        return self.compressor_cost + self.final_adder_luts

    def to_dict(self) -> dict:
        return {
            "stages": [[{"compressor": ci.comp.name, "anchor": ci.anchor, "cost": ci.cost,
                         "inputs": [list(c) for c in ci.inputs], "outputs": list(ci.outputs),
                         "out_columns": list(ci.out_columns)}
                        for ci in st] for st in self.stages],
            "final_adder": {"rows": self.adder_rows, "lo": self.adder_lo, "hi": self.adder_hi,
                            "direct_columns": sorted(self.direct_columns),
                            "columns": {str(c): v for c, v in sorted(self.final_columns.items())}},
            "passthrough": {str(c): b for c, b in sorted(self.passthrough.items())},
            "report": compression_cost_report(self),
        }


def direct_outputs(tile) -> frozenset[int]:
    """Output indices of a tile that leave on a LUT's O6 pin."""
    if tile.kind == "carry":
        return frozenset({0})
    return frozenset(cfg.o6 for cfg in lut_configs(tile.functions, tile.lut_plan)
                     if cfg.mux_half is None)


def heap_from_tiling(solution) -> BitHeap:
    """Collect the output bits of every placement plus the constant ``C``."""
    board = solution.board
    heap = BitHeap(width=board.w_x + board.w_y, trunc=board.trunc)
    for pi, p in enumerate(solution.placements):
        direct = direct_outputs(p.tile)
        for oi, w in enumerate(p.tile.output_weights()):
            heap.add(p.dx + p.dy + w, ("tile", pi, oi), oi in direct)
    c = solution.constant
    col = 0
    while c:
        if c & 1:
            heap.add(col, ("const",))
        c >>= 1
        col += 1
    return heap


def _pick(lib: Sequence[CompressorDef], avail: dict[int, list[int]], c: int, excess: int):
    """Best compressor anchored at column ``c``: most bits removed per LUT, then
    the smallest one that clears the excess, else the one reducing column ``c`` most."""
    fitting = []
    for comp in lib:
        if all(len(avail.get(c + j, ())) >= k for j, k in enumerate(comp.shape)):
            fitting.append(comp)
    if not fitting:
        return None
    # height movers such as (2;2) only win when nothing else fits
    top = max(f.efficiency for f in fitting)
    best = [f for f in fitting if f.efficiency == top]
    clearing = [f for f in best if f.shape[0] - 1 >= excess]
    if clearing:
        return min(clearing, key=lambda f: (f.shape[0], f.cost, f.name))
    return max(best, key=lambda f: (f.shape[0], -f.cost, f.name))


def gpc_direct_outputs(comp: CompressorDef) -> frozenset[int]:
    """GPC outputs on O6 pins: every other output of a fractured LUT, or all of them."""
    if comp.n_inputs <= 5:
        return frozenset(range(0, comp.outputs, 2))
    return frozenset(range(comp.outputs))


@dataclass(frozen=True)
class Policy:
    """Knobs of the greedy reduction; :func:`compress` tries each policy in turn."""

    row_min: int = 3          # columns joined to a 4:2 run hold at least this many bits
    row_on_tie: bool = False  # take the row compressor when it ties with the best GPC
    dadda: bool = False       # shrink towards the Dadda height sequence stage by stage
    use_rows: bool = True


POLICIES = (
    Policy(),
    Policy(row_on_tie=True),
    Policy(row_min=4),
    Policy(dadda=True),
    Policy(dadda=True, row_on_tie=True),
    Policy(use_rows=False),
)


def _dadda_target(max_h: int, final: int) -> int:
    d = final
    while (d * 3) // 2 < max_h:
        d = (d * 3) // 2
    return d


def _row_run(avail: dict[int, list[int]], c: int, width: int, row_min: int = 3) -> int:
    """Length of the 4:2 run starting at ``c``: columns holding at least ``row_min`` bits."""
    e = c
    while e + 1 < width and len(avail.get(e + 1, ())) >= row_min:
        e += 1
    return e - c + 1


def _reduce(heap: BitHeap, lib: CompressorLibrary, final_target: int, policy: Policy = Policy()):
    """Greedy staged reduction of ``heap`` to column heights <= ``final_target``.

    At the lowest column still above the stage target the candidate with the
    most bits removed per LUT is applied: the best GPC anchored there, or a 4:2
    row compressor spanning the run of columns that hold enough bits.
    """
    live = sorted(heap.bits)
    stages: list[list[CompressorInstance]] = []
    n_inst = 0
    row = lib.row_compressors[0] if lib.row_compressors and policy.use_rows else None
    while True:
        cols = heap.columns(live)
        max_h = max((len(v) for v in cols.values()), default=0)
        if max_h <= final_target:
            break
        target = _dadda_target(max_h, final_target) if policy.dadda else final_target
        avail = {c: list(v) for c, v in cols.items()}
        produced: dict[int, int] = {}
        stage: list[CompressorInstance] = []
        new_bits: list[int] = []

        def emit(comp, c, ins, out_cols, direct, cost):
            nonlocal n_inst
            outs = []
            for j, oc in enumerate(out_cols):
                b = heap.add(oc, ("comp", n_inst, j), j in direct)
                outs.append(b)
                if b is not None:
                    new_bits.append(b)
                    produced[oc] = produced.get(oc, 0) + 1
            stage.append(CompressorInstance(comp, c, tuple(ins), tuple(outs), tuple(out_cols),
                                            len(stages), cost))
            n_inst += 1

        for c in range(heap.width):
            while True:
                h = len(avail.get(c, ())) + produced.get(c, 0)
                if h <= target:
                    break
                comp = _pick(lib.compressors, avail, c, h - target)
                g_eff = comp.efficiency if comp is not None else None
                r_len = r_eff = None
                if row is not None and len(avail.get(c, ())) >= 3:
                    r_len = _row_run(avail, c, heap.width, policy.row_min)
                    taken = sum(min(4, len(avail.get(c + j, ()))) for j in range(r_len))
                    r_eff = (taken - (2 * r_len + 1)) / row.cost(r_len)
                better = g_eff is None or r_eff is not None and (
                    r_eff > g_eff or (policy.row_on_tie and r_eff == g_eff))
                if r_eff is not None and r_eff > 0 and better:
                    ins = []
                    for j in range(r_len):
                        ins.append(tuple(avail[c + j][:4]))
                        avail[c + j] = avail[c + j][4:]
                    emit(row, c, ins, row.out_columns(c, r_len), (), row.cost(r_len))
                    continue
                if comp is None:
                    break
                ins = []
                for j, k in enumerate(comp.shape):
                    ins.append(tuple(avail[c + j][:k]))
                    avail[c + j] = avail[c + j][k:]
                emit(comp, c, ins, [c + j for j in range(comp.outputs)],
                     gpc_direct_outputs(comp), comp.cost)
        if not stage:
            raise RuntimeError("compressor library cannot reduce the heap further")
        before = len(live)
        live = sorted(new_bits + [b for v in avail.values() for b in v])
        if len(live) >= before and max(heap.heights(live).values()) >= max(
                len(v) for v in cols.values()):
            raise RuntimeError("compression stage made no progress")
        stages.append(stage)
    return live, stages


def _finish(heap: BitHeap, live, stages, rows: int) -> CompressionPlan:
    cols = heap.columns(live)
    lo = next((c for c in sorted(cols) if len(cols[c]) >= 2), None)
    passthrough = {}
    if lo is None:
        for c, v in cols.items():
            passthrough[c] = v[0]
        return CompressionPlan(heap, stages, rows, {}, 0, -1, passthrough)
    for c, v in cols.items():
        if c < lo:
            passthrough[c] = v[0]
    top = max(cols)
    # the carry out of the top column lands in top + 1; a ternary sum also
    # passes a majority bit up, which needs one more LUT there
    hi = top
    if rows == 3 and top + 1 < heap.width and len(cols[top]) >= 2:
        hi = top + 1
    final = {c: list(v) for c, v in cols.items() if c >= lo}
    direct = set()
    for c in range(lo + 1, hi + 1):
        v = final.get(c, [])
        # a ternary column below with two or more bits may pass a majority bit up
        quiet = rows == 2 or len(final.get(c - 1, [])) <= 1
        if len(v) == 1 and heap.bits[v[0]].direct and quiet:
            direct.add(c)
    return CompressionPlan(heap, stages, rows, final, lo, hi, passthrough, frozenset(direct))


def compress(heap: BitHeap, library: CompressorLibrary | None = None,
             policies: Sequence[Policy] = POLICIES) -> CompressionPlan:
    """Cheapest of the greedy plans over every policy and both final adders.

    Ties go to the binary adder, then to the earlier policy.
    """
    if library is None:
        library = default_compressors()
    if not heap.bits:
        return CompressionPlan(heap, [], 2, {}, 0, -1, {})
    options = []
    for pi, policy in enumerate(policies):
        for rows, adder in ((2, library.binary), (3, library.ternary)):
            if adder is None:
                continue
            h = BitHeap(dict(heap.bits), heap.next_id, heap.width, heap.trunc)
            try:
                live, stages = _reduce(h, library, rows, policy)
            except RuntimeError:
                continue
            plan = _finish(h, live, stages, rows)
            options.append((plan.lut_cost, rows, pi, plan))
    if not options:
        raise RuntimeError("no final adder can finish this heap")
    return min(options, key=lambda o: o[:3])[3]


def compression_cost_report(plan: CompressionPlan) -> dict:
    return {"lut_cost": plan.lut_cost, "stage_count": len(plan.stages),
            "final_adder_bits": plan.final_adder_bits, "final_adder_luts": plan.final_adder_luts,
            "compressor_luts": plan.compressor_cost, "adder_rows": plan.adder_rows}


def heap_value(heap: BitHeap, ids, values: dict[int, int]) -> int:
    """Arithmetic value of the bits ``ids`` under ``values`` (bit id -> 0/1)."""
    return sum(values[i] << heap.bits[i].column for i in ids)
