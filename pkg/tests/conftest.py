import time
from collections import defaultdict

import pytest

from inctile.search import enumerate_and_classify, load_library

# criterion -> list of (ok, detail), filled by the acceptance suite
ACCEPTANCE = defaultdict(list)


@pytest.fixture(scope="session")
def classes_4x4_timed():
    # full unsigned sweep, shared by the census tests (about half a minute)
    t0 = time.perf_counter()
    classes = enumerate_and_classify((4, 4))
    return classes, time.perf_counter() - t0


@pytest.fixture(scope="session")
def classes_4x4(classes_4x4_timed):
    return classes_4x4_timed[0]


@pytest.fixture(scope="session")
def full_lib():
    return load_library("full")


@pytest.fixture(scope="session")
def rect_lib():
    return load_library("rectangular")


@pytest.fixture
def record():
    """record("AC3", ok, "detail") logs one sub-check of a criterion."""

    def _rec(ac: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE[ac].append((bool(ok), detail))
        print(f"{ac} {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return _rec


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for ac in sorted(ACCEPTANCE, key=lambda k: int(k[2:])):
        checks = ACCEPTANCE[ac]
        ok = all(c for c, _ in checks)
        passed = sum(c for c, _ in checks)
        tr.write_line(f"{ac} {'PASS' if ok else 'FAIL'} ({passed}/{len(checks)} checks)")
        for c, d in checks:
            tr.write_line(f"    [{'ok' if c else 'FAIL'}] {d}")
