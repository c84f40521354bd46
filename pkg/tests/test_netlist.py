import dataclasses
import json
import re

import numpy as np
import pytest

from inctile.bitheap import compression_cost_report
from inctile.netlist import (
    Netlist,
    NetlistError,
    build_netlist,
    emit_hdl,
    emit_svg,
    parse_hdl_inits,
    simulate,
    simulate_many,
    verify,
)
from inctile.pipeline import realize
from inctile.search import load_library
from inctile.shapes import Board
from inctile.tiling import solve_board

from oracle import cached_design


def test_small_designs():
    d = cached_design(3, 3)
    assert d.lut_count == 5
    assert not [n for n in d.netlist.nodes if n.kind == "CARRY"]
    assert cached_design(1, 1).lut_count == 1
    assert cached_design(1, 7).lut_count == 4


def test_accounting_identity():
    for dims in [(3, 3), (4, 4), (6, 4), (5, 7), (6, 6, 6)]:
        d = cached_design(*dims)
        rep = compression_cost_report(d.plan)
        assert d.lut_count == (d.solution.tile_lut_cost + rep["compressor_luts"]
                               + rep["final_adder_luts"])
        assert rep["final_adder_luts"] == rep["final_adder_bits"] - len(d.plan.direct_columns)


def test_ports():
    d = cached_design(6, 4)
    assert (len(d.netlist.x_nets), len(d.netlist.y_nets), d.netlist.out_width) == (6, 4, 10)
    t = cached_design(6, 6, 6)
    assert t.netlist.out_width == 6


def test_simulate_examples():
    nl = cached_design(6, 4).netlist
    assert simulate(nl, 63, 15) == 945
    assert simulate(nl, 0, 15) == 0
    assert all(v == 0 for v in simulate_many(nl, np.zeros(16, dtype=np.int64),
                                                 np.arange(16, dtype=np.int64)))


@pytest.mark.parametrize("dims", [(2, 2), (3, 5), (4, 4), (6, 4), (7, 3), (5, 5)])
def test_verify_exhaustive(dims):
    rep = verify(cached_design(*dims).netlist)
    assert rep.passed and rep.mode == "exhaustive"
    assert rep.checked == 1 << sum(dims)


def test_verify_truncated():
    rep = verify(cached_design(6, 6, 6).netlist)
    assert rep.passed


def test_mutation_is_caught():
    nl = cached_design(4, 4).netlist
    for k, node in enumerate(nl.nodes):
        if node.kind != "LUT":
            continue
        # flip a bit on the O6 half that the LUT actually reads
        for bit in range(64):
            bad = Netlist.from_dict(nl.to_dict())
            bad.nodes[k] = dataclasses.replace(node, init=node.init ^ (1 << bit))
            rep = verify(bad)
            if not rep.passed:
                cex = rep.counterexample
                assert cex["got"] != cex["x"] * cex["y"]
                assert simulate(bad, cex["x"], cex["y"]) == cex["got"]
                break
        else:
            continue
        break
    else:
        pytest.fail("no init flip produced a counterexample")


def test_every_lut_matters():
    """Flipping any fully used init bit of a tile LUT must change some product."""
    nl = cached_design(3, 3).netlist
    found = 0
    for k, node in enumerate(nl.nodes):
        bad = Netlist.from_dict(nl.to_dict())
        bad.nodes[k] = dataclasses.replace(node, init=node.init ^ (1 << 63))
        found += not verify(bad).passed
    assert found >= 1


def test_json_roundtrip():
    nl = cached_design(5, 4).netlist
    again = Netlist.from_dict(json.loads(nl.dumps()))
    assert again.to_dict() == nl.to_dict()
    with pytest.raises(NetlistError):
        Netlist.from_dict({"format": "other"})


def test_validate_catches_double_driver():
    nl = Netlist.from_dict(cached_design(3, 3).netlist.to_dict())
    n0 = nl.nodes[0]
    nl.nodes.append(dataclasses.replace(n0, name="dup"))
    with pytest.raises(NetlistError):
        nl.validate()


@pytest.mark.parametrize("dialect", ["verilog", "vhdl"])
def test_hdl_roundtrip_and_determinism(dialect):
    nl = cached_design(6, 4).netlist
    text = emit_hdl(nl, dialect)
    assert text == emit_hdl(Netlist.from_dict(nl.to_dict()), dialect)
    inits = parse_hdl_inits(text, dialect)
    assert inits == {n.name: n.init for n in nl.nodes if n.kind == "LUT"}


def test_hdl_one_instance_for_1x1():
    text = emit_hdl(cached_design(1, 1).netlist)
    body = text.split("module mult_1x1")[1]
    assert len(re.findall(r"^\s+inctile_\w+ ", body, re.M)) == 1


def test_hdl_bad_dialect():
    with pytest.raises(NetlistError):
        emit_hdl(cached_design(1, 1).netlist, "systemc")


def test_verilog_lints_clean():
    pyslang = pytest.importorskip("pyslang")
    text = emit_hdl(cached_design(8, 8).netlist)
    tree = pyslang.syntax.SyntaxTree.fromText(text)
    comp = pyslang.ast.Compilation()
    comp.addSyntaxTree(tree)
    errors = [d for d in comp.getAllDiagnostics() if d.isError()]
    assert errors == []


def test_svg_examples():
    svg = emit_svg(cached_design(3, 3).solution)
    assert svg.count('class="tile"') == 1
    assert svg == emit_svg(cached_design(3, 3).solution)
    sol = cached_design(6, 6, 6).solution
    svg = emit_svg(sol)
    assert svg.count('class="tile"') == len(sol.placements)
    assert svg.count('class="uncovered"') == len(sol.uncovered) > 0
    assert 'url(#hatch)' in svg


def test_build_from_raw_solution():
    lib = load_library("rectangular")
    sol = solve_board(Board(4, 5), lib)
    plan, nl = realize(sol)
    assert nl.lut_count == sol.tile_lut_cost + plan.lut_cost
    assert verify(nl).passed
    assert build_netlist(sol, plan).to_dict() == nl.to_dict()
