"""Tile logic: truth tables, exact supports, minimized equations, LUT mapping, costs."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import qm
from .shapes import (
    Cell,
    GridPattern,
    PatternError,
    Signedness,
    UNSIGNED,
    evaluate_pattern,
    range_width,
)

Input = tuple[str, int]

# estimated compression cost per tile output bit (LUT/bit)
COMP_PER_BIT = Fraction(13, 20)
MAX_TABLE_INPUTS = 8
LUT_INPUTS = 6
FRACTURED_INPUTS = 5
# a detached partial product may ride along when the summed part uses at most this many bits
DETACH_MAX_REST_INPUTS = 5


class LutMappingError(ValueError):
    pass


def input_name(inp: Input) -> str:
    return f"{inp[0]}{inp[1]}"


def _sort_inputs(inputs):
    return tuple(sorted(inputs, key=lambda t: (t[0], t[1])))


@dataclass(frozen=True)
class TruthTable:
    """Sum of a pattern's partial products for every operand-bit assignment.

    ``values`` are reduced modulo ``2**width`` (two's complement for signed
    ranges); row ``r`` assigns ``inputs[k] = (r >> k) & 1``.
    """

    inputs: tuple[Input, ...]
    values: np.ndarray = field(compare=False)
    width: int
    lo: int
    hi: int

    @property
    def n(self) -> int:
        return len(self.inputs)

    def column(self, bit: int) -> np.ndarray:
        return (self.values >> bit) & 1


def build_truth_table(pattern: GridPattern, s: Signedness = UNSIGNED) -> TruthTable:
    n = len(pattern.x_bits()) + len(pattern.y_bits())
    if n > MAX_TABLE_INPUTS:
        raise PatternError(f"pattern uses {n} operand bits; at most {MAX_TABLE_INPUTS} supported")
    inputs, raw = evaluate_pattern(pattern, s)
    lo, hi = (int(raw.min()), int(raw.max())) if len(raw) else (0, 0)
    width = range_width(lo, hi)
    values = raw & ((1 << width) - 1)
    return TruthTable(tuple(inputs), values, width, lo, hi)


def _flip_index(n: int) -> list[np.ndarray]:
    idx = np.arange(1 << n)
    return [idx ^ (1 << k) for k in range(n)]


@functools.lru_cache(maxsize=None)
def _flips(n: int):
    return _flip_index(n)


def functional_support(tt: TruthTable, bit: int) -> frozenset[Input]:
    """Inputs whose toggling changes output ``bit`` for at least one assignment."""
    col = tt.column(bit)
    return frozenset(inp for k, inp in enumerate(tt.inputs)
                     if np.any(col != col[_flips(tt.n)[k]]))


def _all_supports(tt: TruthTable) -> list[tuple[int, frozenset[Input]]]:
    if tt.n == 0:
        return []
    bits = np.arange(tt.width)
    cols = (tt.values[None, :] >> bits[:, None]) & 1
    dep = np.zeros((tt.width, tt.n), dtype=bool)
    for k, flip in enumerate(_flips(tt.n)):
        dep[:, k] = np.any(cols != cols[:, flip], axis=1)
    out = []
    for b in range(tt.width):
        sup = frozenset(tt.inputs[k] for k in np.flatnonzero(dep[b]))
        if sup:
            out.append((b, sup))
    return out


@dataclass(frozen=True)
class BooleanFunction:
    """One tile output bit: exact support, truth bits over it, minimized cover."""

    weight: int
    support: tuple[Input, ...]
    table: int
    sop: tuple[qm.Cube, ...] = ()

    def evaluate(self, assignment: dict[Input, int]) -> int:
        r = 0
        for k, inp in enumerate(self.support):
            r |= (assignment[inp] & 1) << k
        return (self.table >> r) & 1

    def sop_value(self, assignment: dict[Input, int]) -> int:
        r = 0
        for k, inp in enumerate(self.support):
            r |= (assignment[inp] & 1) << k
        return qm.evaluate_sop(list(self.sop), r)

    def sop_variables(self) -> frozenset[Input]:
        care = 0
        for _, c in self.sop:
            care |= c
        return frozenset(inp for k, inp in enumerate(self.support) if care >> k & 1)

    def expression(self) -> str:
        if not self.sop:
            return "0"
        terms = []
        for value, care in self.sop:
            lits = []
            for k, inp in enumerate(self.support):
                if care >> k & 1:
                    lits.append(("" if value >> k & 1 else "~") + input_name(inp))
            terms.append("&".join(lits) if lits else "1")
        return " | ".join(terms)


def _function_from_column(tt: TruthTable, bit: int, support: frozenset[Input],
                          minimize: bool = True) -> BooleanFunction:
    sup = tuple(inp for inp in tt.inputs if inp in support)
    pos = [tt.inputs.index(inp) for inp in sup]
    col = tt.column(bit)
    table = 0
    for r in range(1 << len(sup)):
        row = 0
        for k, p in enumerate(pos):
            row |= ((r >> k) & 1) << p
        table |= int(col[row]) << r
    sop: tuple = ()
    if minimize:
        minterms = [r for r in range(1 << len(sup)) if table >> r & 1]
        sop = tuple(qm.minimize(len(sup), minterms))
    return BooleanFunction(bit, sup, table, sop)


def qm_minimize(tt: TruthTable, bit: int) -> BooleanFunction:
    return _function_from_column(tt, bit, functional_support(tt, bit))


def and_function(x: int, y: int, weight: int) -> BooleanFunction:
    # minterm 3 of (x, y) only
    return BooleanFunction(weight, (("x", x), ("y", y)), 0b1000, ((3, 3),))


@dataclass(frozen=True)
class LutPlan:
    """Assignment of output functions to 6-LUT slots.

    A slot holds one function (two LUTs plus a free mux when it has seven
    inputs) or two functions sharing a fractured LUT.
    """

    slots: tuple[tuple[int, ...], ...]
    sizes: tuple[int, ...]

    @property
    def cost(self) -> int:
        return sum(2 if len(s) == 1 and self.sizes[s[0]] == LUT_INPUTS + 1 else 1
                   for s in self.slots)


def _pair_cost(sups: tuple[frozenset, ...]):
    n = len(sups)

    @functools.lru_cache(maxsize=None)
    def best(rem: int):
        if not rem:
            return 0, ()
        i = (rem & -rem).bit_length() - 1
        rest = rem & ~(1 << i)
        c, sl = best(rest)
        alone = 2 if len(sups[i]) == LUT_INPUTS + 1 else 1
        result = (c + alone, ((i,),) + sl)
        if len(sups[i]) <= FRACTURED_INPUTS:
            j_bits = rest
            while j_bits:
                j = (j_bits & -j_bits).bit_length() - 1
                j_bits &= j_bits - 1
                if len(sups[i] | sups[j]) <= FRACTURED_INPUTS:
                    c2, sl2 = best(rest & ~(1 << j))
                    if c2 + 1 < result[0]:
                        result = (c2 + 1, ((i, j),) + sl2)
        return result

    return best((1 << n) - 1)


def min_lut_cost(supports: Sequence[frozenset]) -> int:
    """Minimum slot cost for a list of supports (fast path used by the search)."""
    if any(len(s) > LUT_INPUTS + 1 for s in supports):
        raise LutMappingError("function with more than 7 inputs")
    key = tuple(sorted((tuple(sorted(s)) for s in supports)))
    return _min_lut_cost_cached(key)


@functools.lru_cache(maxsize=200_000)
def _min_lut_cost_cached(key) -> int:
    return _pair_cost(tuple(frozenset(s) for s in key))[0]


def map_to_luts(functions: Sequence[BooleanFunction]) -> LutPlan:
    sups = tuple(frozenset(f.support) for f in functions)
    if any(len(s) > LUT_INPUTS + 1 for s in sups):
        raise LutMappingError("function with more than 7 inputs cannot be mapped")
    _, slots = _pair_cost(sups)
    return LutPlan(tuple(slots), tuple(len(s) for s in sups))


@dataclass(frozen=True)
class TileDescriptor:
    """A tile shape with its realization cost and efficiency."""

    pattern: GridPattern
    signedness: Signedness
    area: int
    w_out: int
    cost_mult: int
    functions: tuple[BooleanFunction, ...] = ()
    detached: tuple[Cell, ...] = ()
    kind: str = "lut"  # "lut" or "carry" (parametric 2xk on the carry chain)
    value_lo: int = 0
    value_hi: int = 0

    @property
    def cost_comp(self) -> Fraction:
        return COMP_PER_BIT * self.w_out

    @property
    def cost_tile(self) -> Fraction:
        return self.cost_mult + self.cost_comp

    @property
    def efficiency(self) -> Fraction:
        return Fraction(self.area) / self.cost_tile

    @property
    def cells(self) -> tuple[Cell, ...]:
        return self.pattern.cells

    @property
    def lut_plan(self) -> LutPlan:
        return map_to_luts(self.functions)

    @property
    def key(self) -> tuple:
        return (self.kind, self.pattern.bound_x, self.pattern.bound_y, self.pattern.mask,
                self.signedness.tag())

    @property
    def name(self) -> str:
        if self.kind == "carry":
            return f"c{self.pattern.bound_x}x{self.pattern.bound_y}"
        return f"t{self.pattern.bound_x}x{self.pattern.bound_y}_{self.pattern.mask:x}" + (
            "" if self.signedness.unsigned else "_" + self.signedness.tag())

    def output_weights(self) -> list[int]:
        return [f.weight for f in self.functions] if self.kind == "lut" else list(
            range(self.w_out))


def _summed_supports(pattern: GridPattern, s: Signedness):
    tt = build_truth_table(pattern, s)
    return tt, _all_supports(tt)


def cost_profile(pattern: GridPattern, s: Signedness = UNSIGNED):
    """Cheapest realization as ``(cost_tile, cost_mult, w_out, detached_cell)``.

    Returns ``None`` when some output needs more than seven inputs.  The
    detached cell (or ``None``) is a partial product tabulated as its own
    output bit instead of being added into the tile sum.
    """
    best = None
    try:
        _, sups = _summed_supports(pattern, s)
        cm = min_lut_cost([sp for _, sp in sups])
        best = (cm + COMP_PER_BIT * len(sups), cm, len(sups), None)
    except LutMappingError:
        pass
    if s.unsigned:
        for cell, rest in _detach_candidates(pattern):
            _, sups = _summed_supports(rest, s)
            extra = frozenset({("x", cell[0]), ("y", cell[1])})
            try:
                cm = min_lut_cost([sp for _, sp in sups] + [extra])
            except LutMappingError:
                continue
            ct = cm + COMP_PER_BIT * (len(sups) + 1)
            if best is None or ct < best[0]:
                best = (ct, cm, len(sups) + 1, cell)
    return best


def _detach_candidates(pattern: GridPattern):
    cells = pattern.cells
    if len(cells) < 2:
        return
    for cell in cells:
        rest_cells = [c for c in cells if c != cell]
        n = len({x for x, _ in rest_cells}) + len({y for _, y in rest_cells})
        if n <= DETACH_MAX_REST_INPUTS:
            yield cell, GridPattern.from_cells(rest_cells, pattern.bound_x, pattern.bound_y)


def describe_tile(pattern: GridPattern, s: Signedness = UNSIGNED,
                  detached: Cell | None | str = "auto", equations: bool = True) -> TileDescriptor:
    """Full descriptor including minimized equations.

    ``detached="auto"`` picks the cheapest realization (see ``cost_profile``);
    ``None`` forces the plain summed tile; a cell forces that cell to be
    tabulated on its own output.
    """
    if pattern.is_empty:
        raise PatternError("empty pattern has no tile realization")
    if detached == "auto":
        prof = cost_profile(pattern, s)
        if prof is None:
            raise LutMappingError(f"pattern {pattern} has an output with more than 7 inputs")
        detached = prof[3]
    if detached is not None:
        if not s.unsigned:
            raise PatternError("detached cells are only modelled for unsigned tiles")
        if detached not in pattern.cells:
            raise PatternError(f"detached cell {detached} not in pattern")
        rest = GridPattern.from_cells([c for c in pattern.cells if c != detached],
                                      pattern.bound_x, pattern.bound_y)
    else:
        rest = pattern
    tt = build_truth_table(rest, s)
    funcs = [_function_from_column(tt, b, sp, minimize=equations) for b, sp in _all_supports(tt)]
    if detached is not None:
        funcs.append(and_function(detached[0], detached[1], detached[0] + detached[1]))
    plan = map_to_luts(funcs)
    lo, hi = tt.lo, tt.hi
    if detached is not None:
        hi += 1 << (detached[0] + detached[1])
    return TileDescriptor(
        pattern=pattern,
        signedness=s,
        area=pattern.area_,
        w_out=len(funcs),
        cost_mult=plan.cost,
        functions=tuple(funcs),
        detached=(detached,) if detached is not None else (),
        value_lo=lo,
        value_hi=hi,
    )


def describe_parametric(k: int, transposed: bool = False) -> TileDescriptor:
    """2xk tile realized as a two-row addition on the carry chain (k+1 LUTs, k+2 bits)."""
    if k < 1:
        raise PatternError("k must be positive")
    pattern = GridPattern.rectangle(2, k) if transposed else GridPattern.rectangle(k, 2)
    hi = ((1 << k) - 1) * 3
    return TileDescriptor(pattern=pattern, signedness=UNSIGNED, area=2 * k, w_out=k + 2,
                          cost_mult=k + 1, kind="carry", value_lo=0, value_hi=hi)


def expand_table(f: BooleanFunction, inputs: Sequence[Input]) -> int:
    """Truth bits of ``f`` re-indexed over ``inputs`` (a superset of its support)."""
    pos = [list(inputs).index(inp) for inp in f.support]
    out = 0
    for r in range(1 << len(inputs)):
        sub = 0
        for k, p in enumerate(pos):
            sub |= ((r >> p) & 1) << k
        out |= ((f.table >> sub) & 1) << r
    return out


@dataclass(frozen=True)
class LutConfig:
    """One physical LUT: up to six input signals, a 64-bit init and its used outputs.

    ``o6``/``o5`` name the function index realized on each output (or None).
    For fractured LUTs input 5 is tied high so O6 reads the upper init half.
    """

    inputs: tuple[Input, ...]
    init: int
    o6: int | None
    o5: int | None = None
    tie_i5: bool = False
    # for 7-input functions: which half of the mux pair this is (0/1), and the select input
    mux_half: int | None = None
    mux_select: Input | None = None


def lut_configs(functions: Sequence[BooleanFunction], plan: LutPlan) -> list[LutConfig]:
    out = []
    for slot in plan.slots:
        if len(slot) == 2:
            # the heavier bit goes to O6, where it can drive a carry cell directly
            if functions[slot[0]].weight < functions[slot[1]].weight:
                slot = (slot[1], slot[0])
            fa, fb = functions[slot[0]], functions[slot[1]]
            union = _sort_inputs(set(fa.support) | set(fb.support))
            lo = _replicate(expand_table(fb, union), len(union), 5)
            hi = _replicate(expand_table(fa, union), len(union), 5)
            init = hi << 32 | lo
            out.append(LutConfig(union, init, slot[0], slot[1], tie_i5=True))
            continue
        f = functions[slot[0]]
        if len(f.support) <= LUT_INPUTS:
            init = _replicate(f.table, len(f.support), 6)
            out.append(LutConfig(f.support, init, slot[0]))
        else:
            sel = f.support[-1]
            base = f.support[:-1]
            for half in (0, 1):
                cof = 0
                for r in range(1 << 6):
                    cof |= ((f.table >> (r | half << 6)) & 1) << r
                out.append(LutConfig(base, cof, slot[0], mux_half=half, mux_select=sel))
    return out


def _replicate(table: int, n: int, m: int) -> int:
    """Extend an n-input table to m inputs that do not affect the output."""
    size = 1 << n
    out = 0
    for rep in range(1 << (m - n)):
        out |= table << (rep * size)
    return out
