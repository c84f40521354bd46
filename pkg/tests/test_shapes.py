import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inctile.shapes import (
    Board,
    GridPattern,
    PatternError,
    Signedness,
    UNSIGNED,
    area,
    canonicalize,
    evaluate_pattern,
    output_width,
    value_range,
)

MINUS_MSB = GridPattern.from_cells([(0, 0), (1, 0), (2, 0), (0, 1), (1, 1)], 3, 2)

masks4 = st.integers(min_value=1, max_value=(1 << 16) - 1).map(lambda m: GridPattern(4, 4, m))


def test_area_examples():
    assert area(GridPattern.rectangle(3, 3)) == 9
    assert area(GridPattern(4, 4, 0)) == 0
    assert area(MINUS_MSB) == 5


def test_value_range_examples():
    assert value_range(GridPattern.rectangle(3, 2)) == (0, 21)
    assert value_range(MINUS_MSB) == (0, 13)
    assert value_range(GridPattern.from_cells([(0, 0)])) == (0, 1)


def test_output_width_examples():
    assert output_width(GridPattern.rectangle(3, 2)) == 5
    assert output_width(MINUS_MSB) == 4
    for k in range(2, 17):
        assert output_width(GridPattern.rectangle(k, 2)) == k + 2
    assert output_width(GridPattern.rectangle(1, 2)) == 2


def test_canonicalize_examples():
    p = GridPattern.from_cells([(1, 1), (2, 1)], 4, 4)
    assert set(canonicalize(p).cells) == {(0, 0), (1, 0)}
    one = GridPattern.from_cells([(0, 0)], 4, 4)
    assert canonicalize(one) == one
    diag = GridPattern.from_cells([(1, 0), (0, 1)], 4, 4)
    assert canonicalize(diag) == diag
    with pytest.raises(PatternError):
        canonicalize(GridPattern(4, 4, 0))


def test_mask_is_row_major():
    p = GridPattern.from_cells([(1, 0), (0, 1)], 4, 4)
    assert p.mask == (1 << 1) | (1 << 4)
    with pytest.raises(PatternError):
        GridPattern(2, 2, 1 << 4)


@settings(max_examples=200, deadline=None)
@given(masks4)
def test_canonicalize_idempotent_and_covariant(p):
    c = canonicalize(p)
    assert canonicalize(c) == c
    assert area(c) == area(p)
    dx = min(x for x, _ in p.cells)
    dy = min(y for _, y in p.cells)
    assert value_range(p)[1] == value_range(c)[1] << (dx + dy)


@settings(max_examples=200, deadline=None)
@given(masks4)
def test_output_width_matches_exhaustive(p):
    inputs, values = evaluate_pattern(p)
    assert values.max() == value_range(p)[1]
    nonconst = [b for b in range(int(values.max()).bit_length())
                if len(np.unique((values >> b) & 1)) == 2]
    assert output_width(p) == len(nonconst)
    assert output_width(p) <= int(values.max()).bit_length()


@pytest.mark.parametrize("m,n", [(m, n) for m in range(1, 5) for n in range(1, 5)])
def test_rectangle_range(m, n):
    assert value_range(GridPattern.rectangle(m, n)) == (0, (2 ** m - 1) * (2 ** n - 1))


def test_signed_range_is_exhaustive():
    s = Signedness(True, True)
    lo, hi = value_range(GridPattern.rectangle(2, 2), s)
    # 2-bit signed operands span [-2, 1]
    assert (lo, hi) == (-2, 4)
    assert value_range(GridPattern.rectangle(2, 2), Signedness(True, False)) == (-6, 3)


def test_board_partition():
    b = Board(4, 4, 3)
    allc = {(x, y) for x in range(4) for y in range(4)}
    assert b.required | b.optional == allc
    assert not b.required & b.optional
    assert b.budget == 7
    assert not Board(5, 5).optional
    assert Board.parse("6x4").w_x == 6
    with pytest.raises(PatternError):
        Board(65, 1)
    with pytest.raises(PatternError):
        Board(2, 2, 4)
