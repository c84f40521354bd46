"""Partial-product patterns, boards and their arithmetic ranges.

Axis convention: ``x`` indexes bits of the X operand, ``y`` bits of the Y
operand, and cell ``(x, y)`` carries the partial product ``x_x & y_y`` with
weight ``2**(x + y)``.  Patterns are stored as a row-major bitmask
(``bit = y * bound_x + x``), which is also the enumeration index used by the
tile search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

Cell = tuple[int, int]

MAX_BOARD = 64
# exhaustive range evaluation is used up to this many operand bits
EXHAUSTIVE_INPUTS = 16


class PatternError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Signedness:
    x_signed: bool = False
    y_signed: bool = False

    @property
    def unsigned(self) -> bool:
        return not (self.x_signed or self.y_signed)

    def tag(self) -> str:
        return ("s" if self.x_signed else "u") + ("s" if self.y_signed else "u")

    @classmethod
    def from_tag(cls, tag: str) -> "Signedness":
        if len(tag) != 2 or set(tag) - {"s", "u"}:
            raise ValueError(f"bad signedness tag {tag!r}")
        return cls(tag[0] == "s", tag[1] == "s")


UNSIGNED = Signedness()


@dataclass(frozen=True)
class CellWeight:
    x: int
    y: int

    @property
    def weight(self) -> int:
        return 1 << (self.x + self.y)


@dataclass(frozen=True, order=True)
class GridPattern:
    """Set of active partial-product cells inside a ``bound_x`` x ``bound_y`` window."""

    bound_x: int
    bound_y: int
    mask: int

    def __post_init__(self):
        if self.bound_x < 1 or self.bound_y < 1:
            raise PatternError("pattern bounds must be positive")
        if self.mask < 0 or self.mask >> (self.bound_x * self.bound_y):
            raise PatternError(f"mask {self.mask:#x} exceeds {self.bound_x}x{self.bound_y} window")

    @classmethod
    def from_cells(cls, cells: Iterable[Cell], bound_x: int | None = None,
                   bound_y: int | None = None) -> "GridPattern":
        cells = list(cells)
        if any(x < 0 or y < 0 for x, y in cells):
            raise PatternError("negative cell coordinates")
        if bound_x is None:
            bound_x = max((x for x, _ in cells), default=0) + 1
        if bound_y is None:
            bound_y = max((y for _, y in cells), default=0) + 1
        mask = 0
        for x, y in cells:
            if x >= bound_x or y >= bound_y:
                raise PatternError(f"cell {(x, y)} outside {bound_x}x{bound_y}")
            mask |= 1 << (y * bound_x + x)
        return cls(bound_x, bound_y, mask)

    @classmethod
    def rectangle(cls, w: int, h: int) -> "GridPattern":
        return cls.from_cells(((x, y) for y in range(h) for x in range(w)), w, h)

    @property
    def cells(self) -> tuple[Cell, ...]:
        bx = self.bound_x
        m = self.mask
        out = []
        while m:
            low = m & -m
            i = low.bit_length() - 1
            out.append((i % bx, i // bx))
            m ^= low
        return tuple(out)

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    @property
    def width(self) -> int:
        """Extent along x of the active cells (0 for the empty pattern)."""
        c = self.cells
        return max(x for x, _ in c) - min(x for x, _ in c) + 1 if c else 0

    @property
    def height(self) -> int:
        c = self.cells
        return max(y for _, y in c) - min(y for _, y in c) + 1 if c else 0

    def x_bits(self) -> list[int]:
        return sorted({x for x, _ in self.cells})

    def y_bits(self) -> list[int]:
        return sorted({y for _, y in self.cells})

    def is_canonical(self) -> bool:
        c = self.cells
        return bool(c) and min(x for x, _ in c) == 0 and min(y for _, y in c) == 0

    def is_rectangle(self) -> bool:
        return self.area_ == self.width * self.height

    @property
    def area_(self) -> int:
        return bin(self.mask).count("1")

    def translate(self, dx: int, dy: int) -> frozenset[Cell]:
        return frozenset((x + dx, y + dy) for x, y in self.cells)

    def transpose(self) -> "GridPattern":
        return GridPattern.from_cells(((y, x) for x, y in self.cells), self.bound_y, self.bound_x)

    def ascii(self) -> str:
        """Rows listed from y=0 downward, x growing to the left (board drawing order)."""
        rows = []
        cs = set(self.cells)
        for y in range(self.bound_y):
            rows.append("".join("#" if (x, y) in cs else "." for x in reversed(range(self.bound_x))))
        return "\n".join(rows)

    def __str__(self) -> str:
        return f"{self.bound_x}x{self.bound_y}:{self.mask:#x}"


def area(pattern: GridPattern) -> int:
    return pattern.area_


def canonicalize(pattern: GridPattern) -> GridPattern:
    """Translate so that the lowest active x and y are both zero (bounds kept)."""
    cells = pattern.cells
    if not cells:
        raise PatternError("cannot canonicalize an empty pattern")
    mx = min(x for x, _ in cells)
    my = min(y for _, y in cells)
    if mx == 0 and my == 0:
        return pattern
    return GridPattern.from_cells(((x - mx, y - my) for x, y in cells),
                                  pattern.bound_x, pattern.bound_y)


def canonical_cells(cells: Iterable[Cell]) -> tuple[Cell, ...]:
    cells = list(cells)
    mx = min(x for x, _ in cells)
    my = min(y for _, y in cells)
    return tuple(sorted((x - mx, y - my) for x, y in cells))


def _signed_terms(pattern: GridPattern, s: Signedness):
    """Yield (x, y, sign) with the sign of each partial product under ``s``.

    A signed operand's MSB is the highest operand bit used by the pattern and
    carries negative weight; a product of two sign bits is positive again.
    """
    cells = pattern.cells
    xmax = max(x for x, _ in cells)
    ymax = max(y for _, y in cells)
    for x, y in cells:
        neg = (s.x_signed and x == xmax) != (s.y_signed and y == ymax)
        yield x, y, -1 if neg else 1


def evaluate_pattern(pattern: GridPattern, s: Signedness = UNSIGNED):
    """Exhaustively evaluate the pattern sum.

    Returns ``(inputs, values)`` where ``inputs`` lists ``('x', i)``/``('y', j)``
    operand bits in truth-table order (x bits first, ascending) and ``values``
    holds the signed sum for every assignment (row index bit k = input k).
    """
    xs = pattern.x_bits()
    ys = pattern.y_bits()
    inputs = [("x", x) for x in xs] + [("y", y) for y in ys]
    n = len(inputs)
    if n > EXHAUSTIVE_INPUTS:
        raise PatternError(f"{n} operand bits too many for exhaustive evaluation")
    rows = np.arange(1 << n, dtype=np.int64)
    pos = {inp: k for k, inp in enumerate(inputs)}
    values = np.zeros(1 << n, dtype=np.int64)
    if pattern.is_empty:
        return inputs, values
    for x, y, sign in _signed_terms(pattern, s):
        bit = ((rows >> pos[("x", x)]) & (rows >> pos[("y", y)])) & 1
        values += sign * (bit << (x + y))
    return inputs, values


def value_range(pattern: GridPattern, s: Signedness = UNSIGNED) -> tuple[int, int]:
    if pattern.is_empty:
        return 0, 0
    if s.unsigned:
        return 0, sum(1 << (x + y) for x, y in pattern.cells)
    _, values = evaluate_pattern(pattern, s)
    return int(values.min()), int(values.max())


def range_width(lo: int, hi: int) -> int:
    """Bits needed to hold every value in [lo, hi] (two's complement if lo < 0)."""
    if lo >= 0:
        return max(hi.bit_length(), 1)
    w = 1
    while not (-(1 << (w - 1)) <= lo and hi <= (1 << (w - 1)) - 1):
        w += 1
    return w


def output_bits(pattern: GridPattern, s: Signedness = UNSIGNED) -> list[int]:
    """Indices of the result bits that are not constant over all inputs."""
    if pattern.is_empty:
        return []
    lo, hi = value_range(pattern, s)
    width = range_width(lo, hi)
    n_inputs = len(pattern.x_bits()) + len(pattern.y_bits())
    if n_inputs > EXHAUSTIVE_INPUTS:
        if not s.unsigned:
            raise PatternError("signed ranges need exhaustive evaluation")
        low = min(x + y for x, y in pattern.cells)
        return list(range(low, width))
    _, values = evaluate_pattern(pattern, s)
    values = values & ((1 << width) - 1)
    out = []
    for b in range(width):
        col = (values >> b) & 1
        if col.min() != col.max():
            out.append(b)
    return out


def output_width(pattern: GridPattern, s: Signedness = UNSIGNED) -> int:
    """Number of non-constant result bits of the summed pattern."""
    return len(output_bits(pattern, s))


@dataclass
class Board:
    """A ``w_x`` x ``w_y`` multiplier board, optionally truncated below weight ``2**trunc``."""

    w_x: int
    w_y: int
    trunc: int = 0
    required: frozenset[Cell] = field(init=False)
    optional: frozenset[Cell] = field(init=False)

    def __post_init__(self):
        if not (1 <= self.w_x <= MAX_BOARD and 1 <= self.w_y <= MAX_BOARD):
            raise PatternError(f"board {self.w_x}x{self.w_y} out of range")
        if not 0 <= self.trunc < self.w_x + self.w_y:
            raise PatternError(f"truncation {self.trunc} must be below {self.w_x + self.w_y}")
        allc = [(x, y) for y in range(self.w_y) for x in range(self.w_x)]
        # only cells below 2**t can ever be dropped within the 2**t - 1 budget
        self.optional = frozenset(c for c in allc if c[0] + c[1] < self.trunc)
        self.required = frozenset(allc) - self.optional

    @property
    def cells(self) -> Iterator[Cell]:
        return ((x, y) for y in range(self.w_y) for x in range(self.w_x))

    @property
    def budget(self) -> int:
        """Largest admissible sum of uncovered weights."""
        return (1 << self.trunc) - 1

    @property
    def out_width(self) -> int:
        return self.w_x + self.w_y - self.trunc

    def contains(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.w_x and 0 <= cell[1] < self.w_y

    def label(self) -> str:
        s = f"{self.w_x}x{self.w_y}"
        return s + (f"t{self.trunc}" if self.trunc else "")

    @classmethod
    def parse(cls, text: str, trunc: int = 0) -> "Board":
        try:
            a, b = text.lower().split("x")
            return cls(int(a), int(b), trunc)
        except ValueError as exc:
            raise PatternError(f"cannot parse board size {text!r}") from exc


def all_boards(n: int) -> list[Board]:
    return [Board(a, b) for a, b in itertools.product(range(1, n + 1), repeat=2)]
