"""Regenerate the tile libraries shipped in ``inctile/data``.

Runs the unsigned 4x4 search, removes redundant tiles and prunes the result
against optimal tilings of all boards up to 8x8.  Takes several minutes.
"""

import argparse
import logging
from pathlib import Path

from inctile.pipeline import prune_by_usage, searched_library

DATA = Path(__file__).resolve().parents[1] / "src" / "inctile" / "data"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--max-board", type=int, default=8)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO)
    full = searched_library(workers=args.workers, version="full-4x4")
    full.save(DATA / "full_library.json")
    print(f"full library: {len(full)} tiles")
    pruned, rounds = prune_by_usage(full, args.max_board, version=f"pruned-4x4-n{args.max_board}")
    for r in rounds:
        print(f"prune round: {r.size_before} tiles, {r.used} used, {r.unproven} unproven")
    pruned.save(DATA / "pruned_library.json")
    print(f"pruned library: {len(pruned)} tiles")


if __name__ == "__main__":
    main()
