"""Command-line front end: search, solve, gen, verify, table and export-lp.

Every run writes into one artifact directory (``--out``) and updates its
``manifest.json`` with the library version, solver limits and file list.
Exit status: 0 success, 1 verification failure, 2 infeasible board or usage
error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from .bitheap import CompressorLibrary, compression_cost_report
from .netlist import DIALECTS, Netlist, emit_hdl, emit_svg, verify
from .pipeline import generate, realize
from .search import (augment_helpers, census, enumerate_and_classify, library_from_candidates,
                     load_library, prune_redundant)
from .shapes import Board, PatternError, Signedness
from .tiling import InfeasibleError, TilingProblem, TilingSolution, export_lp, solve_board

log = logging.getLogger("inctile")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2
HDL_SUFFIX = {"verilog": ".v", "vhdl": ".vhd"}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# artifact directory

def _out_dir(args, default: str) -> Path:
    d = Path(args.out) if args.out else Path("inctile-runs") / default
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write(d: Path, name: str, text: str, files: list) -> Path:
    p = d / name
    p.write_text(text)
    files.append(name)
    return p


def _manifest(d: Path, command: str, config: dict, files: list, extra: dict | None = None):
    path = d / "manifest.json"
    data = json.loads(path.read_text()) if path.exists() else {"runs": {}}
    entry = {"config": config, "files": sorted(set(files))}
    if extra:
        entry.update(extra)
    data["runs"][command] = entry
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _config(args, library=None) -> dict:
    keys = ("board", "trunc", "lib", "objective", "timeout", "nodes", "seed", "bound",
            "signed_x", "signed_y", "samples", "max", "compare", "metric", "dialect")
    cfg = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    if library is not None:
        cfg["library_version"] = library.version
    return cfg


def _board(args) -> Board:
    if not args.board:
        raise UsageError("a board size such as 8x8 is required")
    try:
        return Board.parse(args.board, args.trunc or 0)
    except PatternError as exc:
        raise UsageError(str(exc)) from exc


def _library(args):
    try:
        return load_library(args.lib)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load library {args.lib!r}: {exc}") from exc


def _compressors(args):
    return CompressorLibrary.load(args.compressors) if args.compressors else None


def _formats(args, default: tuple) -> set:
    return set(args.format or default)


# ---------------------------------------------------------------------------
# subcommands

def cmd_search(args) -> int:
    bx, by = _bound(args.bound)
    if args.unsigned and (args.signed_x or args.signed_y):
        raise UsageError("--unsigned conflicts with --signed-x/--signed-y")
    s = Signedness(args.signed_x, args.signed_y)
    d = _out_dir(args, f"search-{bx}x{by}-{s.tag()}")
    files: list = []
    classes = enumerate_and_classify((bx, by), s, workers=args.workers)
    lines = [f"E={e:.3f}: {n} tiles" for e, n in census(classes)]
    top = classes[0]
    head = f"top class E={float(top.efficiency):.3f}: {len(top)} tiles"
    print(head)
    body = {"bound": [bx, by], "signedness": s.tag(),
            "classes": [{"efficiency": str(c.efficiency), "count": len(c),
                         "members": [{"mask": m.pattern.mask, "cost_mult": m.cost_mult,
                                      "w_out": m.w_out} for m in c.members]}
                        for c in classes if c.efficiency > 1]}
    _write(d, "census.txt", head + "\n" + "\n".join(lines) + "\n", files)
    _write(d, "classes.json", json.dumps(body, indent=1) + "\n", files)
    extra = {"top_class": {"efficiency": str(top.efficiency), "count": len(top)}}
    if s.unsigned:
        kept = prune_redundant([m for c in classes if c.efficiency > 1 for m in c.members])
        print(f"E>1 after redundancy removal: {len(kept)} tiles")
        lib = augment_helpers(library_from_candidates(kept, f"searched-{bx}x{by}"), (bx, by))
        lib.save(d / "library.json")
        files.append("library.json")
        extra["library_size"] = len(lib)
    else:
        # signed tiles are classified but not turned into a library
        print("signed search: census only, no library emitted")
    _manifest(d, "search", _config(args), files, extra)
    return EXIT_OK


def _bound(text: str) -> tuple[int, int]:
    try:
        if "x" in str(text).lower():
            a, b = str(text).lower().split("x")
            return int(a), int(b)
        return int(text), int(text)
    except ValueError as exc:
        raise UsageError(f"bad --bound {text!r}") from exc


def _solve(args, board, library) -> TilingSolution:
    return solve_board(board, library, args.objective, args.nodes, args.timeout)


def cmd_solve(args) -> int:
    board = _board(args)
    lib = _library(args)
    d = _out_dir(args, board.label())
    files: list = []
    fmts = _formats(args, ("json", "svg"))
    if "lp" in fmts:
        _write(d, "model.lp", export_lp(_problem(args, board, lib)), files)
    sol = _solve(args, board, lib)
    if "json" in fmts:
        _write(d, "solution.json", json.dumps(sol.to_dict(), indent=1) + "\n", files)
    if "svg" in fmts:
        _write(d, "tiling.svg", emit_svg(sol), files)
    print(f"{board.label()}: objective {float(sol.objective):g} ({sol.objective}), "
          f"tile LUTs {sol.tile_lut_cost}, {len(sol.placements)} placements, "
          f"optimal={sol.optimal}")
    _manifest(d, "solve", _config(args, lib), files,
              {"objective": str(sol.objective), "optimal": sol.optimal,
               "limits": {"nodes": args.nodes, "timeout": args.timeout}})
    return EXIT_OK


def _problem(args, board, lib) -> TilingProblem:
    return TilingProblem(board, lib, args.objective, args.nodes, args.timeout)


def cmd_export_lp(args) -> int:
    board = _board(args)
    lib = _library(args)
    d = _out_dir(args, board.label())
    files: list = []
    p = _write(d, "model.lp", export_lp(_problem(args, board, lib)), files)
    print(p)
    _manifest(d, "export-lp", _config(args, lib), files)
    return EXIT_OK


def cmd_gen(args) -> int:
    comps = _compressors(args)
    if args.board:
        board = _board(args)
        lib = _library(args)
        d = _out_dir(args, board.label())
        design = generate(board, lib, comps, args.objective, args.nodes, args.timeout,
                          explore=not args.no_explore)
        sol, plan, nl = design.solution, design.plan, design.netlist
        source = design.source
        version = lib.version
    else:
        d = _out_dir(args, "")
        path = d / "solution.json"
        if not path.exists():
            raise UsageError(f"no board given and no {path} to generate from")
        sol = TilingSolution.from_dict(json.loads(path.read_text()))
        plan, nl = realize(sol, comps)
        source = "solution.json"
        version = None
    files: list = []
    fmts = _formats(args, ("json", "hdl"))
    if "json" in fmts:
        _write(d, "netlist.json", nl.dumps() + "\n", files)
        _write(d, "plan.json", json.dumps(plan.to_dict(), indent=1) + "\n", files)
    if "hdl" in fmts:
        _write(d, "design" + HDL_SUFFIX[args.dialect], emit_hdl(nl, args.dialect), files)
    if "svg" in fmts:
        _write(d, "tiling.svg", emit_svg(sol), files)
    rep = compression_cost_report(plan)
    print(f"{sol.board.label()}: {nl.lut_count} LUTs (tiles {sol.tile_lut_cost}, "
          f"compression {rep['compressor_luts']}, final adder {rep['final_adder_luts']}) "
          f"from {source}")
    cfg = _config(args)
    if version:
        cfg["library_version"] = version
    _manifest(d, "gen", cfg, files, {"lut_count": nl.lut_count, "source": source,
                                     "compression": rep})
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.board:
        board = _board(args)
        lib = _library(args)
        d = _out_dir(args, board.label())
        nl = generate(board, lib, _compressors(args), args.objective, args.nodes,
                      args.timeout, explore=not args.no_explore).netlist
    else:
        d = _out_dir(args, "")
        path = d / "netlist.json"
        if not path.exists():
            raise UsageError(f"no board given and no {path} to verify")
        nl = Netlist.from_dict(json.loads(path.read_text()))
    exhaustive = True if args.exhaustive else (False if args.sampled else None)
    rep = verify(nl, exhaustive, args.samples, args.seed)
    files: list = []
    _write(d, "verify.json", json.dumps(rep.to_dict(), indent=1) + "\n", files)
    status = "PASS" if rep.passed else "FAIL"
    print(f"{status} {rep.mode} {rep.checked} pairs, {nl.lut_count} LUTs")
    if rep.counterexample:
        print(f"counterexample: {rep.counterexample}")
    _manifest(d, "verify", _config(args), files, {"passed": rep.passed, "mode": rep.mode})
    return EXIT_OK if rep.passed else EXIT_VERIFY


def table_rows(lib, other, n: int, metric: str, objective: str = "paper-model",
               nodes: int = 200_000, timeout: float = 600.0, comps=None) -> list[dict]:
    """One row per w_x, w_y <= n with the chosen metric for both libraries."""
    rows = []
    for wy in range(1, n + 1):
        for wx in range(1, n + 1):
            b = Board(wx, wy)
            r = {"w_x": wx, "w_y": wy}
            for tag, l in (("lib", lib), ("ref", other)):
                if metric == "luts":
                    r[tag] = generate(b, l, comps, objective, nodes, timeout).lut_count
                else:
                    r[tag] = float(solve_board(b, l, objective, nodes, timeout).objective)
            r["delta_pct"] = round(100 * (r["ref"] - r["lib"]) / r["ref"], 2) if r["ref"] else 0.0
            rows.append(r)
    return rows


def cmd_table(args) -> int:
    from .plotting import plot_diagonal, plot_grid

    lib = _library(args)
    try:
        other = load_library(args.compare)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load comparison library {args.compare!r}: {exc}") from exc
    d = _out_dir(args, f"table-{args.metric}-{args.max}")
    files: list = []
    rows = table_rows(lib, other, args.max, args.metric, args.objective, args.nodes,
                      args.timeout, _compressors(args))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["w_x", "w_y", "lib", "ref", "delta_pct"],
                       lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    sys.stdout.write(buf.getvalue())
    _write(d, "table.csv", buf.getvalue(), files)
    plot_grid(rows, "lib", args.max, d / "lib.png", f"{lib.version} ({args.metric})")
    plot_grid(rows, "ref", args.max, d / "ref.png", f"{other.version} ({args.metric})")
    plot_grid(rows, "delta_pct", args.max, d / "delta.png", "relative improvement (%)")
    plot_diagonal(rows, ["lib", "ref"], d / "square.png", f"square boards ({args.metric})")
    files += ["lib.png", "ref.png", "delta.png", "square.png"]
    worse = [r for r in rows if r["lib"] > r["ref"]]
    print(f"dominance: {len(rows) - len(worse)}/{len(rows)} entries <= {other.version}")
    _manifest(d, "table", _config(args, lib), files,
              {"compare_version": other.version, "dominated": not worse})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _common(p: argparse.ArgumentParser, board: bool = True):
    if board:
        p.add_argument("board", nargs="?", help="board size, e.g. 8x8")
        p.add_argument("--trunc", type=int, default=0, help="truncation position t")
    p.add_argument("--lib", default="default", help="default, full, pruned, rectangular or a JSON file")
    p.add_argument("--compressors", help="compressor library JSON")
    p.add_argument("--objective", default="paper-model", choices=("paper-model", "tiles-only"))
    p.add_argument("--timeout", type=float, default=600.0, help="solver wall clock (s)")
    p.add_argument("--nodes", type=int, default=200_000, help="solver node budget")
    p.add_argument("--out", help="artifact directory")
    p.add_argument("--format", action="append", choices=("json", "svg", "hdl", "lp"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="inctile", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="JSON file of default option values (flags win)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="classify all tile shapes in a window")
    p.add_argument("--bound", default="4", help="window size N or NxM")
    g = p.add_argument_group("signedness")
    g.add_argument("--unsigned", action="store_true", help="both operands unsigned (default)")
    g.add_argument("--signed-x", action="store_true")
    g.add_argument("--signed-y", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("solve", help="optimal tiling of a board")
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="netlist and HDL for a board or a saved solution")
    _common(p)
    p.add_argument("--dialect", default="verilog", choices=DIALECTS)
    p.add_argument("--no-explore", action="store_true",
                   help="realize only the objective-optimal tiling")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify", help="check a netlist against multiplication")
    _common(p)
    p.add_argument("--no-explore", action="store_true")
    m = p.add_mutually_exclusive_group()
    m.add_argument("--exhaustive", action="store_true")
    m.add_argument("--sampled", action="store_true")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table", help="grid of results over board sizes, with figures")
    _common(p, board=False)
    p.add_argument("--max", type=int, default=8, help="largest board side")
    p.add_argument("--compare", default="rectangular", help="reference library")
    p.add_argument("--metric", default="objective", choices=("objective", "luts"),
                   help="luts realizes each design, objective only solves")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("export-lp", help="write the tiling model as an LP file")
    _common(p)
    p.set_defaults(func=cmd_export_lp)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv) -> argparse.Namespace:
    early = argparse.ArgumentParser(add_help=False)
    early.add_argument("--config")
    pre, _ = early.parse_known_args(argv)
    if pre.config:
        cfg = json.loads(Path(pre.config).read_text())
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        # defaults go on every subparser so explicit flags still win
        for action in ap._subparsers._group_actions:
            for sp in action.choices.values():
                sp.set_defaults(**cfg)
    return ap.parse_args(argv)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = _apply_config(ap, argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    except (OSError, ValueError) as exc:
        print(f"error: bad config file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
