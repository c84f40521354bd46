"""End-to-end generation: tiling, bit heap, compression and netlist.

The tiling objective only estimates compression at a fixed rate per output
bit, so :func:`generate` realizes a few candidate tilings and keeps the one
with the fewest LUTs in the finished netlist.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .bitheap import CompressionPlan, CompressorLibrary, compress, heap_from_tiling
from .netlist import Netlist, build_netlist
from .search import TileLibrary, is_protected
from .shapes import Board
from .tiling import InfeasibleError, TilingSolution, solve_board

log = logging.getLogger(__name__)


@dataclass
class Design:
    solution: TilingSolution
    plan: CompressionPlan
    netlist: Netlist
    source: str = "paper-model"
    candidates: list[dict] = field(default_factory=list)
    # objective-optimal tiling, which may differ from the realized one
    primary: TilingSolution | None = None

    @property
    def lut_count(self) -> int:
        return self.netlist.lut_count

    def summary(self) -> dict:
        return {
            "board": self.solution.board.label(),
            "source": self.source,
            "objective": str(self.solution.objective),
            "optimal": self.solution.optimal,
            "tile_lut_cost": self.solution.tile_lut_cost,
            "compression_luts": self.plan.lut_cost,
            "total_luts": self.lut_count,
            "candidates": self.candidates,
        }


def realize(solution: TilingSolution, compressors: CompressorLibrary | None = None
            ) -> tuple[CompressionPlan, Netlist]:
    plan = compress(heap_from_tiling(solution), compressors)
    return plan, build_netlist(solution, plan)


def rectangular_subset(library: TileLibrary) -> TileLibrary:
    """Protected entries and every searched tile that is a full rectangle."""
    return library.filtered(lambda e: is_protected(e) or e.tile.pattern.is_rectangle(),
                            version=f"{library.version}-rect")


def generate(board: Board, library: TileLibrary, compressors: CompressorLibrary | None = None,
             objective: str = "paper-model", node_limit: int = 200_000, time_limit: float = 600.0,
             explore: bool = True) -> Design:
    """Realize the objective-optimal tiling and, with ``explore``, two alternatives.

    The alternatives are the optimum under the tiles-only objective and the
    optimum over the library's rectangular tiles.  The design with the fewest
    LUTs wins; ties keep the earlier candidate.
    """
    primary = solve_board(board, library, objective, node_limit, time_limit)
    cands = [(objective, primary)]
    if explore:
        other = "tiles-only" if objective == "paper-model" else "paper-model"
        for label, lib, mode in ((other, library, other),
                                 ("rectangular", rectangular_subset(library), objective)):
            if len(lib) == 0 and not lib.parametric_2xk:
                continue
            try:
                cands.append((label, solve_board(board, lib, mode, node_limit, time_limit)))
            except InfeasibleError:
                log.debug("%s alternative infeasible on %s", label, board.label())
    best = None
    report = []
    for label, sol in cands:
        plan, nl = realize(sol, compressors)
        report.append({"source": label, "objective": str(sol.objective), "optimal": sol.optimal,
                       "tile_lut_cost": sol.tile_lut_cost, "compression_luts": plan.lut_cost,
                       "total_luts": nl.lut_count})
        if best is None or nl.lut_count < best.lut_count:
            best = Design(sol, plan, nl, label)
    best.candidates = report
    best.primary = primary
    return best


def compare_tilesets(board: Board, lib_a: TileLibrary, lib_b: TileLibrary,
                     compressors: CompressorLibrary | None = None, node_limit: int = 200_000,
                     time_limit: float = 600.0, explore: bool = True) -> dict:
    """Objectives and netlist LUT counts for two libraries, with relative deltas of A vs B."""
    out = {"board": board.label()}
    results = {}
    for name, lib in (("a", lib_a), ("b", lib_b)):
        d = generate(board, lib, compressors, node_limit=node_limit, time_limit=time_limit,
                     explore=explore)
        sol = d.primary
        results[name] = (sol, d)
        out[name] = {"library": lib.version, "objective": str(sol.objective),
                     "objective_float": float(sol.objective), "optimal": sol.optimal,
                     "tile_lut_cost": sol.tile_lut_cost, "total_luts": d.lut_count}
    oa, ob = results["a"][0].objective, results["b"][0].objective
    la, lb = results["a"][1].lut_count, results["b"][1].lut_count
    out["objective_delta"] = float((ob - oa) / ob) if ob else 0.0
    out["lut_delta"] = float(Fraction(lb - la, lb)) if lb else 0.0
    return out


def searched_library(bound: tuple[int, int] = (4, 4), workers: int = 1,
                     version: str = "searched-4x4") -> TileLibrary:
    """E > 1 search result after redundancy removal, plus base, helpers and 2xk."""
    from .search import (augment_helpers, enumerate_and_classify, library_from_candidates,
                         prune_redundant)
    classes = enumerate_and_classify(bound, workers=workers)
    cands = [m for c in classes if c.efficiency > 1 for m in c.members]
    kept = prune_redundant(cands)
    return augment_helpers(library_from_candidates(kept, version), bound)


def prune_by_usage(library: TileLibrary, max_board: int = 8, time_limit: float = 300.0,
                   version: str | None = None):
    """Keep the tiles used by optimal tilings of every board up to ``max_board`` square."""
    from .search import prune_unused
    from .shapes import all_boards

    def solve_fn(board, lib):
        return solve_board(board, lib, time_limit=time_limit)

    pruned, rounds = prune_unused(library, all_boards(max_board), solve_fn)
    return pruned.copy(version or f"{library.version}-pruned{max_board}"), rounds
