"""Cost-minimal exact covering of a multiplier board by library tiles.

Each distinct covered cell set becomes one binary variable; required cells
are covered exactly once, droppable cells at most once, and a single knapsack
row keeps the dropped weight within the truncation budget.  Costs are scaled
to integers and the model is handed to the HiGHS MIP solver.  A tile that
covers the whole board on its own costs only its LUTs, so such placements are
scored separately.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

from .logic import COMP_PER_BIT, TileDescriptor
from .search import TileLibrary
from .shapes import Board, Cell

log = logging.getLogger(__name__)

OBJECTIVES = ("paper-model", "tiles-only")
# every cost is a multiple of 1/SCALE
SCALE = 20


class InfeasibleError(RuntimeError):
    pass


@dataclass(frozen=True)
class Placement:
    tile: TileDescriptor
    dx: int
    dy: int
    cells: frozenset = field(compare=False)
    tile_id: int = 0

    @property
    def anchor(self) -> int:
        """Weight index of the tile's local origin on the board."""
        return self.dx + self.dy

    @property
    def sort_key(self):
        return (self.tile_id, self.dy, self.dx)

    def label(self) -> str:
        return f"{self.tile.name}@{self.dx},{self.dy}"


def enumerate_placements(board: Board, tiles: Sequence[TileDescriptor]) -> list[Placement]:
    """All in-bounds translations of every tile (placements are ordered by tile, dy, dx)."""
    out = []
    for tid, t in enumerate(tiles):
        cells = t.cells
        if not cells:
            continue
        mx = min(x for x, _ in cells)
        my = min(y for _, y in cells)
        wx = max(x for x, _ in cells) - mx + 1
        wy = max(y for _, y in cells) - my + 1
        for dy in range(-my, board.w_y - wy - my + 1):
            for dx in range(-mx, board.w_x - wx - mx + 1):
                cov = frozenset((x + dx, y + dy) for x, y in cells)
                if cov & board.required or cov & board.optional:
                    out.append(Placement(t, dx, dy, cov, tid))
    return out


@dataclass
class TilingProblem:
    board: Board
    library: TileLibrary
    objective: str = "paper-model"
    node_limit: int = 200_000
    time_limit: float = 600.0

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        if len(self.library) == 0 and not self.library.parametric_2xk:
            raise ValueError("empty tile library")
        if self.node_limit <= 0 or self.time_limit <= 0:
            raise ValueError("solver limits must be positive")

    def tiles(self) -> list[TileDescriptor]:
        return self.library.instantiate(max(self.board.w_x, self.board.w_y))


@dataclass
class TilingSolution:
    board: Board
    placements: list[Placement]
    objective: Fraction
    optimal: bool
    objective_mode: str = "paper-model"
    nodes: int = 0
    seconds: float = 0.0

    @property
    def tile_lut_cost(self) -> int:
        return sum(p.tile.cost_mult for p in self.placements)

    @property
    def comp_estimate(self) -> Fraction:
        if len(self.placements) <= 1:
            return Fraction(0)
        return COMP_PER_BIT * sum(p.tile.w_out for p in self.placements)

    @property
    def covered(self) -> frozenset:
        return frozenset().union(*(p.cells for p in self.placements)) if self.placements else frozenset()

    @property
    def uncovered(self) -> list[Cell]:
        cov = self.covered
        return sorted((c for c in self.board.optional if c not in cov), key=lambda c: (c[1], c[0]))

    @property
    def constant(self) -> int:
        """Compensation constant: the sum of the weights left uncovered."""
        return sum(1 << (x + y) for x, y in self.uncovered)

    def check(self) -> None:
        """Raise if the placements are not a valid (truncated) exact cover."""
        seen: set = set()
        for p in self.placements:
            for c in p.cells:
                if not self.board.contains(c):
                    raise AssertionError(f"{p.label()} leaves the board")
                if c in seen:
                    raise AssertionError(f"cell {c} covered twice")
                seen.add(c)
        missing = self.board.required - seen
        if missing:
            raise AssertionError(f"required cells uncovered: {sorted(missing)[:5]}")
        if self.constant > self.board.budget:
            raise AssertionError("truncation budget exceeded")

    def to_dict(self) -> dict:
        return {
            "board": [self.board.w_x, self.board.w_y],
            "trunc": self.board.trunc,
            "objective_mode": self.objective_mode,
            "objective": str(self.objective),
            "objective_float": float(self.objective),
            "optimal": self.optimal,
            "tile_lut_cost": self.tile_lut_cost,
            "comp_estimate": str(self.comp_estimate),
            "placements": [
                {"tile": p.tile.name, "kind": p.tile.kind, "mask": p.tile.pattern.mask,
                 "bound": [p.tile.pattern.bound_x, p.tile.pattern.bound_y],
                 "detached": [list(c) for c in p.tile.detached],
                 "dx": p.dx, "dy": p.dy, "cost_mult": p.tile.cost_mult, "w_out": p.tile.w_out}
                for p in self.placements
            ],
            "uncovered": [list(c) for c in self.uncovered],
            "constant": self.constant,
            "nodes": self.nodes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TilingSolution":
        """Rebuild a solution from :meth:`to_dict` output (tiles are re-derived)."""
        from .logic import describe_parametric, describe_tile
        from .shapes import GridPattern

        board = Board(d["board"][0], d["board"][1], d.get("trunc", 0))
        placements = []
        for tid, e in enumerate(d["placements"]):
            bx, by = e["bound"]
            if e["kind"] == "carry":
                tile = describe_parametric(max(bx, by), transposed=(bx == 2 and by != 2))
            else:
                det = tuple(e.get("detached") or ())
                tile = describe_tile(GridPattern(bx, by, e["mask"]),
                                     detached=tuple(det[0]) if det else None)
            cells = frozenset((x + e["dx"], y + e["dy"]) for x, y in tile.cells)
            placements.append(Placement(tile, e["dx"], e["dy"], cells, tid))
        sol = cls(board, placements, Fraction(d["objective"]), bool(d["optimal"]),
                  d.get("objective_mode", "paper-model"), d.get("nodes", 0))
        sol.check()
        return sol


def placement_cost(p: Placement, mode: str, solo: bool = False) -> Fraction:
    if mode == "tiles-only" or solo:
        return Fraction(p.tile.cost_mult)
    return p.tile.cost_tile


def evaluate_objective(placements: Sequence[Placement], mode: str) -> Fraction:
    solo = len(placements) == 1
    return sum((placement_cost(p, mode, solo) for p in placements), Fraction(0))


class _Model:
    """Deduplicated placements and sparse incidence data for one problem."""

    def __init__(self, problem: TilingProblem):
        board = problem.board
        self.board = board
        self.mode = problem.objective
        raw = enumerate_placements(board, problem.tiles())
        best: dict = {}
        for p in raw:
            key = p.cells
            c = (placement_cost(p, self.mode), p.sort_key)
            if key not in best or c < best[key][0]:
                best[key] = (c, p)
        placements = sorted((v[1] for v in best.values()), key=lambda p: p.sort_key)
        self.cells = sorted(board.required | board.optional, key=lambda c: (c[1], c[0]))
        self.cell_index = {c: i for i, c in enumerate(self.cells)}
        self.required = np.array([c in board.required for c in self.cells])
        self.opt_weight = np.array([0 if c in board.required else 1 << (c[0] + c[1])
                                    for c in self.cells], dtype=float)
        allreq = board.required
        self.solo = [p for p in placements if allreq <= p.cells and
                     sum(1 << (x + y) for x, y in board.optional - p.cells) <= board.budget]
        multi = [p for p in placements if not (allreq <= p.cells)] if allreq else placements
        self.placements = multi
        self.cost = np.array([int(placement_cost(p, self.mode) * SCALE) for p in multi], dtype=np.int64)
        rows, cols = [], []
        for j, p in enumerate(multi):
            for c in p.cells:
                rows.append(self.cell_index[c])
                cols.append(j)
        self.A = sparse.csc_matrix((np.ones(len(rows)), (rows, cols)),
                                   shape=(len(self.cells), len(multi)))
        self.p_cells = [np.array(sorted(self.cell_index[c] for c in p.cells)) for p in multi]
        self.p_optw = np.array([sum(self.opt_weight[i] for i in ci) for ci in self.p_cells])


def _milp(m: _Model, node_limit: int, time_limit: float):
    """HiGHS branch-and-cut on the scaled-integer model; returns (status, chosen ids)."""
    n = len(m.placements)
    if n == 0:
        return "infeasible", None
    A = m.A.tocsr()
    req = m.required
    cons = []
    if req.any():
        cons.append(LinearConstraint(A[req], 1, 1))
    if (~req).any():
        cons.append(LinearConstraint(A[~req], 0, 1))
    if m.board.trunc:
        need = float(m.opt_weight.sum()) - m.board.budget
        if need > 0:
            cons.append(LinearConstraint(m.p_optw[None, :], need, np.inf))
    res = milp(m.cost.astype(float), constraints=cons, integrality=np.ones(n),
               bounds=Bounds(0, 1),
               options={"time_limit": float(time_limit), "node_limit": int(node_limit),
                        "mip_rel_gap": 0.0, "presolve": True})
    if res.x is None:
        return ("infeasible" if res.status == 2 else "limit"), None
    chosen = sorted(int(j) for j in np.flatnonzero(res.x > 0.5))
    return ("optimal" if res.status == 0 else "limit"), chosen


def solve(problem: TilingProblem, initial: TilingSolution | None = None) -> TilingSolution:
    """Minimum-objective exact cover; ``optimal`` is False if a limit stopped the search."""
    t0 = time.monotonic()
    m = _Model(problem)
    board = problem.board
    covered_all = set()
    for p in m.placements + m.solo:
        covered_all |= p.cells
    if not board.required <= covered_all:
        raise InfeasibleError(f"some required cells of {board.label()} cannot be covered")
    status, chosen = _milp(m, problem.node_limit, problem.time_limit)
    candidates = []
    if chosen is not None:
        pl = [m.placements[j] for j in chosen]
        candidates.append((evaluate_objective(pl, problem.objective), 0, pl))
    for p in m.solo:
        candidates.append((placement_cost(p, problem.objective, solo=True), 1, [p]))
    if initial is not None:
        candidates.append((evaluate_objective(initial.placements, problem.objective), 2,
                           list(initial.placements)))
    if not candidates:
        if status == "limit":
            raise InfeasibleError(f"no cover of {board.label()} found within the limits")
        raise InfeasibleError(f"{board.label()} has no exact cover with this library")
    optimal = status in ("optimal", "infeasible")
    obj, _, pl = min(candidates, key=lambda c: (c[0], c[1]))
    pl = sorted(pl, key=lambda p: (p.dy, p.dx, p.sort_key))
    sol = TilingSolution(board, pl, obj, optimal, problem.objective,
                         0, time.monotonic() - t0)
    sol.check()
    return sol


def solve_truncated(board: Board, library: TileLibrary, **kw) -> TilingSolution:
    if board.trunc <= 0:
        log.debug("solve_truncated called with t=0; solving the full board")
    return solve(TilingProblem(board, library, **kw))


def solve_board(board: Board, library: TileLibrary, objective: str = "paper-model",
                node_limit: int = 200_000, time_limit: float = 600.0,
                initial: TilingSolution | None = None) -> TilingSolution:
    return solve(TilingProblem(board, library, objective, node_limit, time_limit), initial)


# ---------------------------------------------------------------------------
# LP export

def _fmt(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    # all costs are multiples of 1/20, so two decimals are exact
    return f"{float(q):.2f}"


def export_lp(problem: TilingProblem) -> str:
    """CPLEX-LP text of the exact-cover model (one binary per placement)."""
    m = _Model(problem)
    placements = m.placements + m.solo
    names = [f"p{j}" for j in range(len(placements))]
    lines = [f"\\ tiling model {problem.board.label()} objective={problem.objective}",
             f"\\ placements: {len(placements)}"]
    for j, p in enumerate(placements):
        lines.append(f"\\ {names[j]} = {p.label()}")
    lines.append("Minimize")
    obj_terms = []
    for j, p in enumerate(placements):
        solo = j >= len(m.placements)
        obj_terms.append(f"{_fmt(placement_cost(p, problem.objective, solo))} {names[j]}")
    lines.extend(_wrap(" obj: ", obj_terms))
    lines.append("Subject To")
    by_cell: dict = {c: [] for c in m.cells}
    for j, p in enumerate(placements):
        for c in p.cells:
            by_cell[c].append(names[j])
    board = problem.board
    for c in m.cells:
        terms = by_cell[c]
        if not terms:
            continue
        sense = "=" if c in board.required else "<="
        lines.extend(_wrap(f" c{c[0]}_{c[1]}: ", terms, f" {sense} 1"))
    if board.trunc and board.optional:
        # sum of uncovered optional weights stays within 2^t - 1
        total = sum(1 << (x + y) for x, y in board.optional)
        terms = []
        for j, p in enumerate(placements):
            w = sum(1 << (x + y) for x, y in p.cells & board.optional)
            if w:
                terms.append(f"{w} {names[j]}")
        lines.extend(_wrap(" trunc: ", terms, f" >= {total - board.budget}"))
    n_all = len(placements)
    for k, p in enumerate(m.solo):
        j = len(m.placements) + k
        others = [names[i] for i in range(n_all) if i != j]
        if others:
            lines.extend(_wrap(f" solo{k}: {n_all} {names[j]} + ", others, f" <= {n_all}"))
    lines.append("Binary")
    lines.extend(_wrap(" ", names, sep=" "))
    lines.append("End")
    return "\n".join(lines) + "\n"


def _wrap(head: str, terms: Iterable[str], tail: str = "", sep: str = " + ", width: int = 200) -> list[str]:
    out = []
    cur = head
    first = True
    for t in terms:
        piece = t if first else sep + t
        if len(cur) + len(piece) > width and not first:
            out.append(cur)
            cur = "   " + (t if sep == " " else sep.strip() + " " + t)
        else:
            cur += piece
        first = False
    out.append(cur + tail)
    return out


def lp_placements(problem: TilingProblem) -> list[Placement]:
    """Placement order used for the ``p<j>`` variables in :func:`export_lp`."""
    m = _Model(problem)
    return m.placements + m.solo
