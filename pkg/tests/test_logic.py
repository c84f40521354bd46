import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inctile import qm
from inctile.logic import (
    BooleanFunction,
    LutMappingError,
    build_truth_table,
    describe_parametric,
    describe_tile,
    functional_support,
    lut_configs,
    map_to_luts,
    qm_minimize,
)
from inctile.shapes import GridPattern, PatternError, Signedness

MINUS_MSB = GridPattern.from_cells([(0, 0), (1, 0), (2, 0), (0, 1), (1, 1)], 3, 2)
# s-shaped element translated to the origin: x3y2, x2y3, x4y2, x3y3
S_SHAPE = GridPattern.from_cells([(1, 0), (0, 1), (2, 0), (1, 1)], 4, 4)


def names(sup):
    return {f"{a}{i}" for a, i in sup}


def test_truth_table_examples():
    tt = build_truth_table(GridPattern.from_cells([(0, 0)]))
    assert list(tt.values) == [0, 0, 0, 1]
    tt = build_truth_table(GridPattern.rectangle(3, 2))
    assert len(tt.values) == 32 and tt.values.max() == 21
    tt = build_truth_table(GridPattern.rectangle(2, 2))
    assert len(tt.values) == 16 and tt.values.max() == 9
    with pytest.raises(PatternError):
        build_truth_table(GridPattern.rectangle(5, 4))


def test_functional_support_examples():
    tt = build_truth_table(GridPattern.rectangle(3, 3))
    assert names(functional_support(tt, 0)) == {"x0", "y0"}
    assert names(functional_support(tt, 1)) == {"x0", "x1", "y0", "y1"}
    s = build_truth_table(S_SHAPE)
    # bit 2 of the aligned element; in board coordinates {y3, y2, x4, x3, x2}
    # local bit 0 is constant, so the printed r2 is local bit 3
    assert names(functional_support(s, 3)) == {"y0", "y1", "x0", "x1", "x2"}


def test_qm_examples():
    f = qm_minimize(build_truth_table(GridPattern.from_cells([(0, 0)])), 0)
    assert len(f.sop) == 1 and qm.literal_count(f.sop[0]) == 2
    # bit 1 is x1y0 XOR x0y1: every minimal cube contains one of the two products
    f = qm_minimize(build_truth_table(GridPattern.rectangle(3, 3)), 1)
    assert len(f.sop) == 4
    x0, x1, y0, y1 = (f.support.index(i) for i in (("x", 0), ("x", 1), ("y", 0), ("y", 1)))
    for value, care in f.sop:
        lits = {k for k in range(4) if care >> k & 1 and value >> k & 1}
        assert {x1, y0} <= lits or {x0, y1} <= lits
    s = qm_minimize(build_truth_table(S_SHAPE), 1)
    assert len(s.sop) == 4
    assert all(qm.literal_count(c) == 3 for c in s.sop)


def test_s_shape_equations():
    tt = build_truth_table(S_SHAPE)
    funcs = [qm_minimize(tt, b) for b in (1, 2, 3)]
    assert [len(f.support) for f in funcs] == [4, 5, 5]
    # the printed equations, in aligned coordinates (x2->x0, y2->y0, ...)

    def printed(a):
        x0, x1, x2, y0, y1 = (a[("x", 0)], a[("x", 1)], a[("x", 2)], a[("y", 0)], a[("y", 1)])
        n = lambda v: 1 - v  # noqa: E731
        r0 = (n(y1) & y0 & x1) | (y0 & n(x0) & x1) | (y1 & n(y0) & x0) | (y1 & x0 & n(x1))
        r1 = ((y1 & n(x0) & n(x2) & x1) | (y1 & x0 & x2 & x1) | (n(y1) & y0 & x2)
              | (y0 & x2 & n(x1)) | (y1 & n(y0) & x1))
        r2 = (y1 & y0 & x2 & x1) | (y1 & y0 & x0 & x1)
        return r0, r1, r2

    for bits in itertools.product((0, 1), repeat=5):
        a = dict(zip([("x", 0), ("x", 1), ("x", 2), ("y", 0), ("y", 1)], bits))
        want = printed(a)
        for b in range(3):
            assert funcs[b].sop_value(a) == want[b] == funcs[b].evaluate(a)


def test_s_shape_with_extra_product_packs_into_r0():
    extra = GridPattern.from_cells([(1, 0), (0, 1), (2, 0), (1, 1), (1, 3)], 4, 4)
    t = describe_tile(extra)
    # the extra product lands above the element's range, so no detaching is needed
    assert t.detached == ()
    assert t.cost_mult == 2 and t.w_out == 4
    r3 = next(i for i, f in enumerate(t.functions) if f.support == (("x", 1), ("y", 3)))
    pair = next(s for s in t.lut_plan.slots if r3 in s)
    other = t.functions[[i for i in pair if i != r3][0]]
    # r0 of the element has weight 2 in aligned coordinates
    assert other.weight == 1 and len(other.support) == 4
    assert len(set(other.support) | set(t.functions[r3].support)) == 5


def test_map_to_luts_examples():
    t = describe_tile(GridPattern.rectangle(3, 2))
    assert t.w_out == 5 and t.cost_mult == 3
    t = describe_tile(MINUS_MSB)
    assert t.w_out == 4 and t.cost_mult == 2
    six = BooleanFunction(0, tuple(("x", i) for i in range(6)), (1 << 64) - 2)
    assert map_to_luts([six]).cost == 1
    seven = BooleanFunction(0, tuple(("x", i) for i in range(7)), (1 << 128) - 2)
    assert map_to_luts([seven]).cost == 2
    eight = BooleanFunction(0, tuple(("x", i) for i in range(8)), 6)
    with pytest.raises(LutMappingError):
        map_to_luts([eight])


def test_describe_tile_examples():
    t = describe_tile(GridPattern.rectangle(3, 3))
    assert (t.area, t.cost_mult, t.w_out) == (9, 5, 6)
    assert t.cost_tile == Fraction(89, 10)
    assert round(float(t.efficiency), 3) == 1.011
    t = describe_tile(MINUS_MSB)
    assert t.cost_tile == Fraction(23, 5)
    assert t.efficiency == Fraction(5) / Fraction(23, 5)
    t = describe_parametric(13)
    assert t.efficiency == Fraction(26) / Fraction(95, 4)
    assert t.efficiency > Fraction(25, 23)


def test_2xk_monotone_and_bounded():
    es = [describe_parametric(k).efficiency for k in range(2, 64)]
    assert all(a < b for a, b in zip(es, es[1:]))
    assert all(e < Fraction(2) / Fraction(33, 20) for e in es)


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=1, max_value=(1 << 16) - 1))
def test_sop_equals_table_and_support(mask):
    p = GridPattern(4, 4, mask)
    if len(p.x_bits()) + len(p.y_bits()) > 8:
        return
    tt = build_truth_table(p)
    for b in range(tt.width):
        sup = functional_support(tt, b)
        if not sup:
            continue
        f = qm_minimize(tt, b)
        assert frozenset(f.support) == sup
        assert f.sop_variables() == sup
        for r in range(1 << len(f.support)):
            a = {inp: (r >> k) & 1 for k, inp in enumerate(f.support)}
            assert f.sop_value(a) == f.evaluate(a)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=(1 << 16) - 1))
def test_lut_configs_reproduce_functions(mask):
    """Evaluating each physical LUT init gives back the tile's output bits."""
    p = GridPattern(4, 4, mask)
    try:
        t = describe_tile(p)
    except (PatternError, LutMappingError):
        return
    cfgs = lut_configs(t.functions, t.lut_plan)
    assert len(cfgs) == t.cost_mult
    inputs = sorted({i for f in t.functions for i in f.support})
    rng = np.random.default_rng(mask)
    for _ in range(16):
        a = {i: int(rng.integers(0, 2)) for i in inputs}
        halves = {}
        for c in cfgs:
            idx = sum(a[inp] << k for k, inp in enumerate(c.inputs))
            if c.tie_i5:
                assert (c.init >> (32 + idx)) & 1 == t.functions[c.o6].evaluate(a)
                assert (c.init >> idx) & 1 == t.functions[c.o5].evaluate(a)
            elif c.mux_half is not None:
                halves.setdefault(c.o6, {})[c.mux_half] = (c.init >> idx) & 1
                sel = a[c.mux_select]
                halves[c.o6]["sel"] = sel
            else:
                assert (c.init >> idx) & 1 == t.functions[c.o6].evaluate(a)
        for fi, h in halves.items():
            assert h[h["sel"]] == t.functions[fi].evaluate(a)


def test_signed_descriptor():
    t = describe_tile(GridPattern.rectangle(2, 2), Signedness(True, True))
    assert (t.value_lo, t.value_hi) == (-2, 4)
    assert t.w_out >= 3
