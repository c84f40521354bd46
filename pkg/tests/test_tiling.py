import json
from fractions import Fraction

import pytest

from inctile.logic import describe_parametric, describe_tile
from inctile.search import TileLibrary, rectangular_library
from inctile.shapes import Board, GridPattern
from inctile.tiling import (
    InfeasibleError,
    TilingProblem,
    TilingSolution,
    enumerate_placements,
    export_lp,
    solve,
    solve_board,
    solve_truncated,
)

from oracle import brute_force_optimum, highs_optimum, three_tile_library


def single(*patterns):
    lib = TileLibrary(version="custom")
    for p in patterns:
        lib.add(describe_tile(p), "searched")
    return lib


def test_enumerate_placements_examples():
    t33 = describe_tile(GridPattern.rectangle(3, 3))
    assert len(enumerate_placements(Board(3, 3), [t33])) == 1
    assert len(enumerate_placements(Board(4, 4), [t33])) == 4
    t32 = describe_tile(GridPattern.rectangle(3, 2))
    t23 = describe_tile(GridPattern.rectangle(2, 3))
    # (6-3+1)(4-2+1) + (6-2+1)(4-3+1)
    assert len(enumerate_placements(Board(6, 4), [t32, t23])) == 12 + 10


def test_solve_examples(full_lib):
    s = solve_board(Board(1, 1), full_lib)
    assert s.tile_lut_cost == 1 and len(s.placements) == 1
    s = solve_board(Board(3, 3), full_lib)
    assert len(s.placements) == 1 and s.tile_lut_cost == 5 and s.comp_estimate == 0
    assert s.objective == 5
    s = solve_board(Board(1, 7), full_lib)
    assert len(s.placements) == 4 and s.tile_lut_cost == 4


def test_truncated_examples(full_lib):
    a = solve_board(Board(4, 4), full_lib)
    b = solve_truncated(Board(4, 4, 0), full_lib)
    assert a.objective == b.objective and not b.uncovered
    s = solve_truncated(Board(3, 3, 1), full_lib)
    assert set(s.uncovered) <= {(0, 0)}
    assert s.constant <= 1


def test_exact_cover_and_budget(full_lib):
    for b in (Board(5, 4), Board(6, 6, 5)):
        s = solve_board(b, full_lib)
        s.check()
        seen = [c for p in s.placements for c in p.cells]
        assert len(seen) == len(set(seen))
        assert b.required <= set(seen)
        assert s.constant <= b.budget


def test_infeasible():
    lib = single(GridPattern.rectangle(2, 2))
    with pytest.raises(InfeasibleError):
        solve_board(Board(3, 3), lib)


def test_problem_validation():
    with pytest.raises(ValueError):
        TilingProblem(Board(2, 2), TileLibrary())
    with pytest.raises(ValueError):
        TilingProblem(Board(2, 2), rectangular_library(), time_limit=0)
    with pytest.raises(ValueError):
        TilingProblem(Board(2, 2), rectangular_library(), objective="other")


def test_solution_json_roundtrip(full_lib):
    s = solve_board(Board(6, 5, 3), full_lib)
    d = json.loads(json.dumps(s.to_dict()))
    r = TilingSolution.from_dict(d)
    assert [p.label() for p in r.placements] == [p.label() for p in s.placements]
    assert r.objective == s.objective and r.constant == s.constant


def test_check_rejects_overlap(full_lib):
    s = solve_board(Board(2, 2), single(GridPattern.rectangle(1, 1)))
    bad = TilingSolution(s.board, s.placements + s.placements[:1], s.objective, True)
    with pytest.raises(AssertionError):
        bad.check()
    short = TilingSolution(s.board, s.placements[1:], s.objective, True)
    with pytest.raises(AssertionError):
        short.check()


def test_deterministic(full_lib):
    a = solve_board(Board(7, 5), full_lib)
    b = solve_board(Board(7, 5), full_lib)
    assert [p.label() for p in a.placements] == [p.label() for p in b.placements]


@pytest.mark.parametrize("board", [Board(a, b) for a in range(1, 5) for b in range(1, 5)]
                         + [Board(4, 4, 2), Board(3, 4, 3)], ids=lambda b: b.label())
def test_brute_force_oracle(board):
    lib = three_tile_library()
    for mode in ("paper-model", "tiles-only"):
        assert solve_board(board, lib, mode).objective == brute_force_optimum(board, lib, mode)


def test_lp_export_examples():
    text = export_lp(TilingProblem(Board(2, 2), single(GridPattern.rectangle(1, 1))))
    body = text.split("Binary")[1]
    assert len(body.split("End")[0].split()) == 4
    rows = [ln for ln in text.splitlines() if ln.startswith(" c")]
    assert len(rows) == 4 and all(ln.endswith("= 1") and "<=" not in ln for ln in rows)
    assert text.count("1.65 p") == 4

    text = export_lp(TilingProblem(Board(4, 4, 2), three_tile_library()))
    trunc = [ln for ln in text.splitlines() if ln.startswith(" trunc:")]
    # optional weights 1 + 2 + 2; at most 3 may stay uncovered
    assert len(trunc) == 1 and trunc[0].endswith(">= 2")


@pytest.mark.parametrize("board", [Board(3, 3), Board(4, 4, 2), Board(5, 3)],
                         ids=lambda b: b.label())
def test_lp_matches_external_solver(board, tmp_path, full_lib):
    pytest.importorskip("highspy")
    prob = TilingProblem(board, full_lib)
    ext = highs_optimum(export_lp(prob), tmp_path)
    internal = solve(prob).objective
    assert Fraction(round(ext * 20), 20) == internal


def test_parametric_tiles_used_on_long_boards(full_lib):
    s = solve_board(Board(2, 12), rectangular_library())
    assert [p.tile.key for p in s.placements] == [describe_parametric(12, transposed=True).key]
    assert s.objective == 13


def test_dominance_small(full_lib, rect_lib):
    for n in range(1, 7):
        b = Board(n, n)
        assert solve_board(b, full_lib).objective <= solve_board(b, rect_lib).objective
