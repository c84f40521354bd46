"""Gate-level netlists: construction from a tiling and a compression plan,
bit-exact simulation, verification against multiplication, HDL and SVG text.

The primitive set is vendor neutral:

* ``LUT``: six inputs ``I0..I5`` and a 64-bit init.  ``O6`` reads the init at
  index ``I5..I0``; ``O5`` reads the lower half at ``I4..I0``.  A fractured
  LUT ties ``I5`` high so two functions of up to five shared inputs appear on
  ``O6`` (upper half) and ``O5`` (lower half).
* ``CARRY``: one carry-chain bit, ``O = S xor CI`` and ``CO = CI if S else DI``.
* ``MUXF7``: ``O = I1 if S else I0``; joins two LUTs into a 7-input function.

Net 0 is constant 0 and net 1 is constant 1.
"""

from __future__ import annotations

import html
import json
import re
from dataclasses import dataclass, field

import numpy as np

from .bitheap import CompressionPlan
from .logic import lut_configs

GND, VCC = 0, 1
# simulation packs results into int64
MAX_SIM_WIDTH = 62


class NetlistError(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    kind: str                  # "LUT" | "CARRY" | "MUXF7"
    name: str
    inputs: tuple[int, ...]    # LUT: I0..I5; CARRY: S, DI, CI; MUXF7: I0, I1, S
    outputs: tuple[int, ...]   # LUT: O6, O5; CARRY: O, CO; MUXF7: O  (-1 = unconnected)
    init: int = 0


@dataclass
class Netlist:
    w_x: int
    w_y: int
    trunc: int = 0
    nodes: list[Node] = field(default_factory=list)
    n_nets: int = 2
    x_nets: list[int] = field(default_factory=list)
    y_nets: list[int] = field(default_factory=list)
    out_nets: list[int] = field(default_factory=list)

    def new_net(self) -> int:
        self.n_nets += 1
        return self.n_nets - 1

    @property
    def lut_count(self) -> int:
        return sum(1 for n in self.nodes if n.kind == "LUT")

    @property
    def out_width(self) -> int:
        return len(self.out_nets)

    def add(self, kind: str, inputs, outputs, init: int = 0) -> Node:
        node = Node(kind, f"{kind.lower()}_{len(self.nodes)}", tuple(inputs), tuple(outputs), init)
        self.nodes.append(node)
        return node

    def validate(self) -> None:
        """Every net driven once, inputs driven before use (topological order)."""
        driven = {GND, VCC, *self.x_nets, *self.y_nets}
        if len(driven) != 2 + len(self.x_nets) + len(self.y_nets):
            raise NetlistError("port nets are not distinct")
        arity = {"LUT": (6, 2), "CARRY": (3, 2), "MUXF7": (3, 1)}
        for n in self.nodes:
            if n.kind not in arity:
                raise NetlistError(f"unknown primitive {n.kind}")
            if (len(n.inputs), len(n.outputs)) != arity[n.kind]:
                raise NetlistError(f"{n.name}: wrong pin count")
            for i in n.inputs:
                if i not in driven:
                    raise NetlistError(f"{n.name}: input net {i} used before it is driven")
            for o in n.outputs:
                if o == -1:
                    continue
                if o in driven:
                    raise NetlistError(f"{n.name}: net {o} driven twice")
                driven.add(o)
            if n.kind == "LUT" and not 0 <= n.init < 1 << 64:
                raise NetlistError(f"{n.name}: init out of range")
        for o in self.out_nets:
            if o not in driven:
                raise NetlistError(f"output net {o} undriven")

    def to_dict(self) -> dict:
        return {
            "format": "inctile-netlist/1",
            "w_x": self.w_x, "w_y": self.w_y, "trunc": self.trunc, "n_nets": self.n_nets,
            "x": self.x_nets, "y": self.y_nets, "p": self.out_nets,
            "lut_count": self.lut_count,
            "nodes": [{"kind": n.kind, "name": n.name, "in": list(n.inputs),
                       "out": list(n.outputs), **({"init": f"{n.init:016X}"} if n.kind == "LUT" else {})}
                      for n in self.nodes],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "Netlist":
        if d.get("format") != "inctile-netlist/1":
            raise NetlistError("not a netlist document")
        nl = cls(d["w_x"], d["w_y"], d.get("trunc", 0), [], d["n_nets"], list(d["x"]), list(d["y"]),
                 list(d["p"]))
        for n in d["nodes"]:
            nl.nodes.append(Node(n["kind"], n["name"], tuple(n["in"]), tuple(n["out"]),
                                 int(n.get("init", "0"), 16)))
        nl.validate()
        return nl


# ---------------------------------------------------------------------------
# construction

def _table_init(n_in: int, fn) -> int:
    """64-bit init of a single function ``fn(bits)`` of ``n_in`` <= 6 inputs."""
    init = 0
    for r in range(64):
        bits = [(r >> k) & 1 for k in range(n_in)]
        init |= (fn(bits) & 1) << r
    return init


def _pair_init(n_in: int, f6, f5) -> int:
    """Fractured init: ``f6`` in the upper half, ``f5`` in the lower, <= 5 shared inputs."""
    lo = hi = 0
    for r in range(32):
        bits = [(r >> k) & 1 for k in range(n_in)]
        lo |= (f5(bits) & 1) << r
        hi |= (f6(bits) & 1) << r
    return hi << 32 | lo


def _pad(nets, n: int = 6, fill: int = GND) -> list[int]:
    nets = list(nets)
    if len(nets) > n:
        raise NetlistError("too many LUT inputs")
    return nets + [fill] * (n - len(nets))


def _lut_pair(nl: Netlist, ins, f6, f5, o5: bool = True) -> tuple[int, int]:
    ins = list(ins)
    o6n = nl.new_net()
    o5n = nl.new_net() if o5 else -1
    pins = _pad(ins, 5) + [VCC]
    nl.add("LUT", pins, (o6n, o5n), _pair_init(len(ins), f6, f5))
    return o6n, o5n


def compressor_lut_cost(n_inputs: int, n_outputs: int) -> int:
    if n_inputs <= 5:
        return (n_outputs + 1) // 2
    if n_inputs == 6:
        return n_outputs
    raise NetlistError(f"a {n_inputs}-input compressor does not fit 6-input LUTs")


def _emit_tile(nl: Netlist, placement, xs, ys) -> list[int]:
    t = placement.tile
    dx, dy = placement.dx, placement.dy
    if t.kind == "carry":
        return _emit_2xk(nl, t, dx, dy, xs, ys)
    sig = {}
    for f in t.functions:
        for inp in f.support:
            sig[inp] = xs[inp[1] + dx] if inp[0] == "x" else ys[inp[1] + dy]
    out = [None] * len(t.functions)
    mux_halves: dict = {}
    for cfg in lut_configs(t.functions, t.lut_plan):
        pins = [sig[i] for i in cfg.inputs]
        if cfg.tie_i5:
            o6, o5 = nl.new_net(), nl.new_net()
            nl.add("LUT", _pad(pins, 5) + [VCC], (o6, o5), cfg.init)
            out[cfg.o6], out[cfg.o5] = o6, o5
        elif cfg.mux_half is not None:
            o6 = nl.new_net()
            nl.add("LUT", _pad(pins), (o6, -1), cfg.init)
            mux_halves.setdefault(cfg.o6, {})[cfg.mux_half] = (o6, sig[cfg.mux_select])
        else:
            o6 = nl.new_net()
            nl.add("LUT", _pad(pins), (o6, -1), cfg.init)
            out[cfg.o6] = o6
    for fi, halves in sorted(mux_halves.items()):
        o = nl.new_net()
        nl.add("MUXF7", (halves[0][0], halves[1][0], halves[0][1]), (o,))
        out[fi] = o
    return out


def _emit_2xk(nl: Netlist, t, dx, dy, xs, ys) -> list[int]:
    """Two-row tile: (a << 0) + (b << 1) on the carry chain, k + 1 LUTs."""
    # a 2x2 instance is always laid out with the long side along x
    transposed = t.pattern.bound_x == 2 and t.pattern.bound_y != 2
    k = t.pattern.bound_y if transposed else t.pattern.bound_x
    if transposed:
        long = [ys[dy + i] for i in range(k)]
        r0, r1 = xs[dx], xs[dx + 1]
    else:
        long = [xs[dx + i] for i in range(k)]
        r0, r1 = ys[dy], ys[dy + 1]
    outs = []
    # bit 0 needs no addition
    b0 = nl.new_net()
    nl.add("LUT", _pad([long[0], r0]), (b0, -1), _table_init(2, lambda b: b[0] & b[1]))
    outs.append(b0)
    ci = GND
    for i in range(1, k + 1):
        if i < k:
            # O6 = a xor b, O5 = a (the DI operand)
            ins = [long[i], r0, long[i - 1], r1]
            s, di = _lut_pair(nl, ins, lambda b: (b[0] & b[1]) ^ (b[2] & b[3]),
                              lambda b: b[0] & b[1])
        else:
            s = nl.new_net()
            nl.add("LUT", _pad([long[k - 1], r1]), (s, -1), _table_init(2, lambda b: b[0] & b[1]))
            di = GND
        o, co = nl.new_net(), nl.new_net()
        nl.add("CARRY", (s, di, ci), (o, co))
        outs.append(o)
        ci = co
    outs.append(ci)
    return outs


def _emit_row42(nl: Netlist, inst, bit_net: dict) -> None:
    L = len(inst.inputs)
    sums, majs = [], []
    ci = GND
    for col in inst.inputs:
        a, b, c, d = (list(bit_net[x] for x in col) + [GND] * 4)[:4]
        s, m = _lut_pair(nl, [a, b, c, d], lambda v: v[0] ^ v[1] ^ v[2] ^ v[3],
                         lambda v: (v[0] & v[1]) | (v[0] & v[2]) | (v[1] & v[2]))
        o, co = nl.new_net(), nl.new_net()
        nl.add("CARRY", (s, d, ci), (o, co))
        sums.append(o)
        majs.append(m)
        ci = co
    nets = sums + majs + [ci]
    assert len(nets) == 2 * L + 1
    for j, b in enumerate(inst.outputs):
        if b is not None:
            bit_net[b] = nets[j]


def _emit_compressor(nl: Netlist, inst, bit_net: dict) -> None:
    if inst.is_row:
        _emit_row42(nl, inst, bit_net)
        return
    comp = inst.comp
    ins, weights = [], []
    for j, col in enumerate(inst.inputs):
        for b in col:
            ins.append(bit_net[b])
            weights.append(j)

    def out_bit(j):
        return lambda bits: (sum(v << w for v, w in zip(bits, weights)) >> j) & 1

    n = len(ins)
    expected = compressor_lut_cost(n, comp.outputs)
    if expected != comp.cost:
        raise NetlistError(f"{comp.name}: configured cost {comp.cost} but realization needs {expected}")
    nets = []
    if n <= 5:
        for j in range(0, comp.outputs, 2):
            if j + 1 < comp.outputs:
                o6, o5 = _lut_pair(nl, ins, out_bit(j), out_bit(j + 1))
                nets += [o6, o5]
            else:
                o6, _ = _lut_pair(nl, ins, out_bit(j), lambda b: 0, o5=False)
                nets.append(o6)
    else:
        for j in range(comp.outputs):
            o = nl.new_net()
            nl.add("LUT", _pad(ins), (o, -1), _table_init(n, out_bit(j)))
            nets.append(o)
    for j, b in enumerate(inst.outputs):
        if b is not None:
            bit_net[b] = nets[j]


def _emit_final_adder(nl: Netlist, plan: CompressionPlan, bit_net: dict, width: int) -> dict[int, int]:
    result: dict[int, int] = {c: bit_net[b] for c, b in plan.passthrough.items()}
    if plan.adder_hi < plan.adder_lo:
        return result
    ci = GND
    m_prev = GND
    for c in range(plan.adder_lo, plan.adder_hi + 1):
        ops = [bit_net[b] for b in plan.final_columns.get(c, [])]
        if c in plan.direct_columns:
            s, di = ops[0], GND
            m_prev = GND
        elif plan.adder_rows == 2:
            a, b = (ops + [GND, GND])[:2]
            s, di = _lut_pair(nl, [a, b], lambda v: v[0] ^ v[1], lambda v: v[0])
        else:
            a, b, d = (ops + [GND] * 3)[:3]
            s, m = _lut_pair(nl, [a, b, d, m_prev], lambda v: v[0] ^ v[1] ^ v[2] ^ v[3],
                             lambda v: (v[0] & v[1]) | (v[0] & v[2]) | (v[1] & v[2]))
            di, m_prev = m_prev, m
        o, co = nl.new_net(), nl.new_net()
        nl.add("CARRY", (s, di, ci), (o, co))
        result[c] = o
        ci = co
    if plan.adder_hi + 1 < width:
        result[plan.adder_hi + 1] = ci
    return result


def build_netlist(solution, plan: CompressionPlan) -> Netlist:
    """Tiles, compressor stages and final adder as primitives; output = floor(sum / 2^t)."""
    board = solution.board
    width = board.w_x + board.w_y
    if width > MAX_SIM_WIDTH:
        raise NetlistError(f"boards wider than {MAX_SIM_WIDTH} result bits are not supported")
    nl = Netlist(board.w_x, board.w_y, board.trunc)
    nl.x_nets = [nl.new_net() for _ in range(board.w_x)]
    nl.y_nets = [nl.new_net() for _ in range(board.w_y)]
    heap = plan.heap
    by_source = {b.source: b.id for b in heap.bits.values()}
    bit_net: dict[int, int] = {}
    for pi, p in enumerate(solution.placements):
        nets = _emit_tile(nl, p, nl.x_nets, nl.y_nets)
        for oi, net in enumerate(nets):
            bid = by_source.get(("tile", pi, oi))
            if bid is not None:
                bit_net[bid] = net
    for b in heap.bits.values():
        if b.source == ("const",):
            bit_net[b.id] = VCC
    for stage in plan.stages:
        for inst in stage:
            _emit_compressor(nl, inst, bit_net)
    o6_nets = {n.outputs[0] for n in nl.nodes if n.kind == "LUT"}
    for c in plan.direct_columns:
        if bit_net[plan.final_columns[c][0]] not in o6_nets:
            raise NetlistError(f"column {c} feeds the carry chain from a non-LUT driver")
    cols = _emit_final_adder(nl, plan, bit_net, width)
    nl.out_nets = [cols.get(c, GND) for c in range(board.trunc, width)]
    nl.validate()
    expected = solution.tile_lut_cost + plan.lut_cost
    if nl.lut_count != expected:
        raise NetlistError(f"LUT accounting mismatch: {nl.lut_count} != {expected}")
    return nl


# ---------------------------------------------------------------------------
# simulation and verification

def simulate_many(nl: Netlist, xs, ys) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    if xs.shape != ys.shape:
        raise ValueError("operand arrays differ in shape")
    if (xs < 0).any() or (xs >> nl.w_x).any() or (ys < 0).any() or (ys >> nl.w_y).any():
        raise ValueError("operand exceeds port width")
    val: list = [None] * nl.n_nets
    val[GND] = np.zeros(xs.shape, dtype=np.uint8)
    val[VCC] = np.ones(xs.shape, dtype=np.uint8)
    for i, n in enumerate(nl.x_nets):
        val[n] = ((xs >> i) & 1).astype(np.uint8)
    for j, n in enumerate(nl.y_nets):
        val[n] = ((ys >> j) & 1).astype(np.uint8)
    for node in nl.nodes:
        if node.kind == "LUT":
            idx = np.zeros(xs.shape, dtype=np.uint64)
            for k, net in enumerate(node.inputs):
                idx |= val[net].astype(np.uint64) << np.uint64(k)
            init = np.uint64(node.init)
            o6, o5 = node.outputs
            if o6 != -1:
                val[o6] = ((init >> idx) & np.uint64(1)).astype(np.uint8)
            if o5 != -1:
                val[o5] = ((init >> (idx & np.uint64(31))) & np.uint64(1)).astype(np.uint8)
        elif node.kind == "CARRY":
            s, di, ci = (val[n] for n in node.inputs)
            o, co = node.outputs
            if o != -1:
                val[o] = s ^ ci
            if co != -1:
                val[co] = np.where(s == 1, ci, di)
        else:
            i0, i1, sel = (val[n] for n in node.inputs)
            val[node.outputs[0]] = np.where(sel == 1, i1, i0)
    out = np.zeros(xs.shape, dtype=np.int64)
    for k, net in enumerate(nl.out_nets):
        out |= val[net].astype(np.int64) << k
    return out


def simulate(nl: Netlist, x: int, y: int) -> int:
    return int(simulate_many(nl, [x], [y])[0])


@dataclass
class VerifyReport:
    passed: bool
    mode: str
    checked: int
    counterexample: dict | None = None

    def to_dict(self) -> dict:
        return {"passed": self.passed, "mode": self.mode, "checked": self.checked,
                "counterexample": self.counterexample}


EXHAUSTIVE_LIMIT = 20   # operand bits
CHUNK = 1 << 16


def _check(nl: Netlist, xs: np.ndarray, ys: np.ndarray):
    got = simulate_many(nl, xs, ys)
    exact = xs * ys
    t = nl.trunc
    if t == 0:
        bad = got != exact
    else:
        bad = np.abs((got << t) - exact) >= (1 << t)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        return {"x": int(xs[i]), "y": int(ys[i]), "got": int(got[i]), "exact": int(exact[i]),
                "trunc": t}
    return None


def verify(nl: Netlist, exhaustive: bool | None = None, samples: int = 100_000,
           seed: int = 0) -> VerifyReport:
    """Full designs must equal x*y; truncated ones satisfy |out*2^t - x*y| < 2^t."""
    n_bits = nl.w_x + nl.w_y
    if exhaustive is None:
        exhaustive = n_bits <= EXHAUSTIVE_LIMIT
    if exhaustive:
        total = 1 << n_bits
        for start in range(0, total, CHUNK):
            r = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
            cex = _check(nl, r & ((1 << nl.w_x) - 1), r >> nl.w_x)
            if cex:
                return VerifyReport(False, "exhaustive", start, cex)
        return VerifyReport(True, "exhaustive", total)
    rng = np.random.default_rng(seed)
    done = 0
    # the corners are always included
    corner_x = np.array([0, (1 << nl.w_x) - 1, (1 << nl.w_x) - 1, 0], dtype=np.int64)
    corner_y = np.array([0, (1 << nl.w_y) - 1, 0, (1 << nl.w_y) - 1], dtype=np.int64)
    cex = _check(nl, corner_x, corner_y)
    if cex:
        return VerifyReport(False, "sampled", 0, cex)
    while done < samples:
        n = min(CHUNK, samples - done)
        xs = rng.integers(0, 1 << nl.w_x, n, dtype=np.int64)
        ys = rng.integers(0, 1 << nl.w_y, n, dtype=np.int64)
        cex = _check(nl, xs, ys)
        if cex:
            return VerifyReport(False, "sampled", done, cex)
        done += n
    return VerifyReport(True, "sampled", done + 4)


# ---------------------------------------------------------------------------
# HDL text

DIALECTS = ("verilog", "vhdl")

_VERILOG_PRIMS = """\
module inctile_lut6_2 #(parameter [63:0] INIT = 64'h0) (
  input wire I0, input wire I1, input wire I2, input wire I3, input wire I4, input wire I5,
  output wire O6, output wire O5);
  assign O6 = INIT[{I5, I4, I3, I2, I1, I0}];
  assign O5 = INIT[{1'b0, I4, I3, I2, I1, I0}];
endmodule

module inctile_carry (input wire S, input wire DI, input wire CI, output wire O, output wire CO);
  assign O = S ^ CI;
  assign CO = S ? CI : DI;
endmodule

module inctile_muxf7 (input wire I0, input wire I1, input wire S, output wire O);
  assign O = S ? I1 : I0;
endmodule
"""

_VHDL_PRIMS = """\
library ieee;
use ieee.std_logic_1164.all;
use ieee.numeric_std.all;

entity inctile_lut6_2 is
  generic (INIT : std_logic_vector(63 downto 0) := (others => '0'));
  port (I0, I1, I2, I3, I4, I5 : in std_logic; O6, O5 : out std_logic);
end entity;

architecture behav of inctile_lut6_2 is
  signal idx : std_logic_vector(5 downto 0);
begin
  idx <= I5 & I4 & I3 & I2 & I1 & I0;
  O6 <= INIT(to_integer(unsigned(idx)));
  O5 <= INIT(to_integer(unsigned(idx(4 downto 0))));
end architecture;

library ieee;
use ieee.std_logic_1164.all;

entity inctile_carry is
  port (S, DI, CI : in std_logic; O, CO : out std_logic);
end entity;

architecture behav of inctile_carry is
begin
  O <= S xor CI;
  CO <= CI when S = '1' else DI;
end architecture;

library ieee;
use ieee.std_logic_1164.all;

entity inctile_muxf7 is
  port (I0, I1, S : in std_logic; O : out std_logic);
end entity;

architecture behav of inctile_muxf7 is
begin
  O <= I1 when S = '1' else I0;
end architecture;
"""


def module_name(nl: Netlist) -> str:
    return f"mult_{nl.w_x}x{nl.w_y}" + (f"_t{nl.trunc}" if nl.trunc else "")


def _verilog(nl: Netlist) -> str:
    name = module_name(nl)
    L = [f"// {name}: {nl.lut_count} LUTs", "`default_nettype none", "",
         f"module {name} (",
         f"  input wire [{nl.w_x - 1}:0] x,",
         f"  input wire [{nl.w_y - 1}:0] y,",
         f"  output wire [{nl.out_width - 1}:0] p);",
         f"  wire [{nl.n_nets - 1}:0] n;",
         "  assign n[0] = 1'b0;",
         "  assign n[1] = 1'b1;"]
    for i, net in enumerate(nl.x_nets):
        L.append(f"  assign n[{net}] = x[{i}];")
    for j, net in enumerate(nl.y_nets):
        L.append(f"  assign n[{net}] = y[{j}];")

    def pin(net):
        return "" if net == -1 else f"n[{net}]"

    for node in nl.nodes:
        if node.kind == "LUT":
            ins = ", ".join(f".I{k}(n[{v}])" for k, v in enumerate(node.inputs))
            L.append(f"  inctile_lut6_2 #(.INIT(64'h{node.init:016X})) {node.name} "
                     f"({ins}, .O6({pin(node.outputs[0])}), .O5({pin(node.outputs[1])}));")
        elif node.kind == "CARRY":
            s, di, ci = node.inputs
            L.append(f"  inctile_carry {node.name} (.S(n[{s}]), .DI(n[{di}]), .CI(n[{ci}]), "
                     f".O({pin(node.outputs[0])}), .CO({pin(node.outputs[1])}));")
        else:
            a, b, s = node.inputs
            L.append(f"  inctile_muxf7 {node.name} (.I0(n[{a}]), .I1(n[{b}]), .S(n[{s}]), "
                     f".O(n[{node.outputs[0]}]));")
    for k, net in enumerate(nl.out_nets):
        L.append(f"  assign p[{k}] = n[{net}];")
    L += ["endmodule", "", "`default_nettype wire", "", _VERILOG_PRIMS]
    return "\n".join(L)


def _vhdl(nl: Netlist) -> str:
    name = module_name(nl)
    L = [f"-- {name}: {nl.lut_count} LUTs", _VHDL_PRIMS,
         "library ieee;", "use ieee.std_logic_1164.all;", "",
         f"entity {name} is",
         f"  port (x : in std_logic_vector({nl.w_x - 1} downto 0);",
         f"        y : in std_logic_vector({nl.w_y - 1} downto 0);",
         f"        p : out std_logic_vector({nl.out_width - 1} downto 0));",
         "end entity;", "",
         f"architecture structural of {name} is",
         f"  signal n : std_logic_vector({nl.n_nets - 1} downto 0);",
         "begin",
         "  n(0) <= '0';",
         "  n(1) <= '1';"]
    for i, net in enumerate(nl.x_nets):
        L.append(f"  n({net}) <= x({i});")
    for j, net in enumerate(nl.y_nets):
        L.append(f"  n({net}) <= y({j});")

    def pin(net):
        return "open" if net == -1 else f"n({net})"

    for node in nl.nodes:
        if node.kind == "LUT":
            ins = ", ".join(f"I{k} => n({v})" for k, v in enumerate(node.inputs))
            L.append(f"  {node.name}: entity work.inctile_lut6_2 generic map (INIT => x\"{node.init:016X}\") "
                     f"port map ({ins}, O6 => {pin(node.outputs[0])}, O5 => {pin(node.outputs[1])});")
        elif node.kind == "CARRY":
            s, di, ci = node.inputs
            L.append(f"  {node.name}: entity work.inctile_carry port map (S => n({s}), DI => n({di}), "
                     f"CI => n({ci}), O => {pin(node.outputs[0])}, CO => {pin(node.outputs[1])});")
        else:
            a, b, s = node.inputs
            L.append(f"  {node.name}: entity work.inctile_muxf7 port map (I0 => n({a}), I1 => n({b}), "
                     f"S => n({s}), O => n({node.outputs[0]}));")
    for k, net in enumerate(nl.out_nets):
        L.append(f"  p({k}) <= n({net});")
    L += ["end architecture;", ""]
    return "\n".join(L)


def emit_hdl(nl: Netlist, dialect: str = "verilog") -> str:
    if dialect == "verilog":
        return _verilog(nl)
    if dialect == "vhdl":
        return _vhdl(nl)
    raise NetlistError(f"unsupported HDL dialect {dialect!r}; choose from {DIALECTS}")


_INIT_RE = {
    "verilog": re.compile(r"inctile_lut6_2 #\(\.INIT\(64'h([0-9A-F]{16})\)\) (\S+) "),
    "vhdl": re.compile(r"(\S+): entity work\.inctile_lut6_2 generic map \(INIT => x\"([0-9A-F]{16})\"\)"),
}


def parse_hdl_inits(text: str, dialect: str = "verilog") -> dict[str, int]:
    """Instance name -> init value, read back from emitted HDL."""
    out = {}
    for m in _INIT_RE[dialect].finditer(text):
        if dialect == "verilog":
            out[m.group(2)] = int(m.group(1), 16)
        else:
            out[m.group(1)] = int(m.group(2), 16)
    return out


# ---------------------------------------------------------------------------
# SVG

_PALETTE = ["#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69",
            "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f"]


def _outline(cells, cell_xy) -> str:
    """SVG path data tracing the boundary loops of a set of unit cells."""
    cells = set(cells)
    edges = {}
    for c in cells:
        x0, y0 = cell_xy(c)
        corners = [(x0, y0), (x0 + 1, y0), (x0 + 1, y0 + 1), (x0, y0 + 1)]
        for k in range(4):
            a, b = corners[k], corners[(k + 1) % 4]
            if (b, a) in edges:
                del edges[(b, a)]
            else:
                edges[(a, b)] = True
    nxt: dict = {}
    for a, b in edges:
        nxt.setdefault(a, []).append(b)
    parts = []
    while nxt:
        start = min(nxt)
        loop = [start]
        cur = start
        while True:
            b = nxt[cur].pop()
            if not nxt[cur]:
                del nxt[cur]
            if b == start:
                break
            loop.append(b)
            cur = b
        parts.append("M" + " L".join(f"{x},{y}" for x, y in loop) + " Z")
    return " ".join(parts)


def emit_svg(solution, cell: int = 24) -> str:
    """Board with one outlined path per placement (x grows to the left, y downward)."""
    board = solution.board
    W, H = board.w_x, board.w_y
    margin = cell

    def cell_xy(c):
        return (W - 1 - c[0]), c[1]

    def sc(v):
        return margin + v * cell

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'width="{2 * margin + W * cell}" height="{2 * margin + H * cell}">',
           '<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" '
           'patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="6" '
           'stroke="#555" stroke-width="1.5"/></pattern></defs>',
           f'<title>{html.escape(board.label())} tiling, objective {solution.objective}</title>',
           f'<g transform="translate({margin},{margin}) scale({cell})">']
    for c in sorted(board.cells, key=lambda c: (c[1], c[0])):
        x, y = cell_xy(c)
        out.append(f'<rect class="cell" x="{x}" y="{y}" width="1" height="1" fill="none" '
                   f'stroke="#ccc" stroke-width="0.03"/>')
    for c in solution.uncovered:
        x, y = cell_xy(c)
        out.append(f'<rect class="uncovered" x="{x}" y="{y}" width="1" height="1" '
                   f'fill="url(#hatch)" stroke="none"/>')
    for i, p in enumerate(solution.placements):
        d = _outline(p.cells, cell_xy)
        out.append(f'<path class="tile" data-tile="{html.escape(p.tile.name)}" d="{d}" '
                   f'fill="{_PALETTE[i % len(_PALETTE)]}" fill-opacity="0.8" stroke="#000" '
                   f'stroke-width="0.06" fill-rule="evenodd"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
