import csv
import json

from inctile.cli import main
from inctile.logic import describe_tile
from inctile.search import TileLibrary
from inctile.shapes import GridPattern


def test_search_census(tmp_path, capsys):
    assert main(["search", "--bound", "2", "--unsigned", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("top class E=")
    assert (tmp_path / "library.json").exists()
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["runs"]["search"]["config"]["bound"] == "2"


def test_search_signed_has_no_library(tmp_path, capsys):
    assert main(["search", "--bound", "2", "--signed-x", "--out", str(tmp_path)]) == 0
    assert not (tmp_path / "library.json").exists()
    assert main(["search", "--bound", "2", "--unsigned", "--signed-y", "--out",
                 str(tmp_path)]) == 2


def test_solve_gen_verify(tmp_path, capsys):
    d = str(tmp_path)
    assert main(["solve", "3x3", "--out", d]) == 0
    assert main(["gen", "--out", d]) == 0
    assert main(["verify", "--exhaustive", "--out", d]) == 0
    out = capsys.readouterr().out
    assert "PASS exhaustive" in out and "5 LUTs" in out
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert set(man["runs"]) == {"solve", "gen", "verify"}
    assert man["runs"]["solve"]["config"]["library_version"] == "full-4x4"
    assert man["runs"]["solve"]["limits"] == {"nodes": 200000, "timeout": 600.0}
    for f in ("solution.json", "tiling.svg", "netlist.json", "design.v", "verify.json"):
        assert (tmp_path / f).exists()


def test_verify_failure_exit_code(tmp_path, capsys):
    d = str(tmp_path)
    assert main(["gen", "4x4", "--out", d]) == 0
    nl = json.loads((tmp_path / "netlist.json").read_text())
    lut = next(n for n in nl["nodes"] if n["kind"] == "LUT")
    lut["init"] = f"{int(lut['init'], 16) ^ ((1 << 64) - 1):016X}"
    (tmp_path / "netlist.json").write_text(json.dumps(nl))
    assert main(["verify", "--out", d]) == 1
    assert "counterexample" in capsys.readouterr().out


def test_infeasible_and_usage_errors(tmp_path, capsys):
    lib = TileLibrary(version="only-2x2")
    lib.add(describe_tile(GridPattern.rectangle(2, 2)), "searched")
    lib.save(tmp_path / "lib.json")
    assert main(["solve", "3x3", "--lib", str(tmp_path / "lib.json"), "--out",
                 str(tmp_path / "a")]) == 2
    assert main(["solve", "3by3", "--out", str(tmp_path / "b")]) == 2
    assert main(["solve", "--out", str(tmp_path / "c")]) == 2
    assert main(["solve", "3x3", "--lib", str(tmp_path / "missing.json")]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["gen", "--out", str(tmp_path / "empty")]) == 2


def test_export_lp(tmp_path):
    assert main(["export-lp", "4x4", "--trunc", "2", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "model.lp").read_text()
    assert text.startswith("\\ tiling model 4x4t2")
    assert " trunc:" in text and "Binary" in text


def test_table_dominance(tmp_path, capsys):
    assert main(["table", "--max", "4", "--compare", "rectangular", "--out",
                 str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "table.csv").open()))
    assert len(rows) == 16
    assert all(float(r["lib"]) <= float(r["ref"]) for r in rows)
    assert "dominance: 16/16" in capsys.readouterr().out
    for f in ("lib.png", "ref.png", "delta.png", "square.png"):
        assert (tmp_path / f).stat().st_size > 0


def test_config_file_flags_win(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"objective": "tiles-only", "timeout": 30}))
    d = tmp_path / "run"
    assert main(["--config", str(cfg), "solve", "2x3", "--timeout", "20", "--out", str(d)]) == 0
    man = json.loads((d / "manifest.json").read_text())["runs"]["solve"]
    assert man["config"]["objective"] == "tiles-only"
    assert man["config"]["timeout"] == 20.0


def test_artifacts_byte_identical(tmp_path):
    for k in ("a", "b"):
        assert main(["gen", "5x4", "--out", str(tmp_path / k), "--format", "json",
                     "--format", "hdl", "--format", "svg"]) == 0
    for f in ("netlist.json", "plan.json", "design.v", "tiling.svg", "manifest.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_gen_vhdl(tmp_path):
    assert main(["gen", "3x2", "--dialect", "vhdl", "--format", "hdl", "--out",
                 str(tmp_path)]) == 0
    assert "entity mult_3x2 is" in (tmp_path / "design.vhd").read_text()
