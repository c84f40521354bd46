"""Two-level minimization: Quine-McCluskey prime generation + Petrick cover.

Cubes are ``(value, care)`` integer pairs over ``n`` variables: bit ``k`` of
``care`` is set when variable ``k`` appears as a literal, and bit ``k`` of
``value`` gives its polarity.
"""

from __future__ import annotations

from collections import defaultdict

Cube = tuple[int, int]

# Petrick expansion is abandoned for an exact ILP cover beyond this many products
PETRICK_LIMIT = 1_000


def covers(cube: Cube, minterm: int) -> bool:
    value, care = cube
    return (minterm & care) == value


def literal_count(cube: Cube) -> int:
    return bin(cube[1]).count("1")


def prime_implicants(n: int, minterms) -> list[Cube]:
    full = (1 << n) - 1
    current = {(m, full) for m in minterms}
    primes: set[Cube] = set()
    while current:
        groups = defaultdict(list)
        for cube in current:
            groups[cube[1]].append(cube)
        merged: set[Cube] = set()
        used: set[Cube] = set()
        for care, cubes in groups.items():
            present = set(cubes)
            for value, _ in cubes:
                b = care
                while b:
                    low = b & -b
                    b ^= low
                    if value & low:
                        continue
                    partner = (value | low, care)
                    if partner in present:
                        merged.add((value, care & ~low))
                        used.add((value, care))
                        used.add(partner)
        primes |= current - used
        current = merged
    return sorted(primes, key=lambda c: (-bin(c[1]).count("0"), c[1], c[0]))


def _cover_key(sel, primes):
    return (len(sel), sum(literal_count(primes[i]) for i in sel), sorted(sel))


def _ilp_cover(rows: dict[int, list[int]], primes: list[Cube]) -> list[int]:
    """Exact minimum cover as a set-cover ILP: fewest cubes, then fewest literals."""
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import lil_matrix

    ids = sorted({i for r in rows.values() for i in r})
    col = {p: j for j, p in enumerate(ids)}
    a = lil_matrix((len(rows), len(ids)))
    for r, m in enumerate(sorted(rows)):
        for p in rows[m]:
            a[r, col[p]] = 1
    lits = np.array([literal_count(primes[p]) for p in ids], dtype=float)
    big = lits.sum() + 1
    res = milp(big + lits, constraints=LinearConstraint(a.tocsr(), lb=1),
               integrality=np.ones(len(ids)), bounds=Bounds(0, 1),
               options={"mip_rel_gap": 0})
    if res.x is None:
        raise RuntimeError("cover ILP failed")
    return [ids[j] for j in np.flatnonzero(res.x > 0.5)]


def petrick_cover(primes: list[Cube], minterms) -> list[Cube]:
    """Minimum-cardinality cover (ties: fewest literals, then lowest ids)."""
    minterms = sorted(set(minterms))
    rows = {m: [i for i, p in enumerate(primes) if covers(p, m)] for m in minterms}
    chosen: set[int] = set()
    for m, ids in rows.items():
        if len(ids) == 1:
            chosen.add(ids[0])
    remaining = [m for m in minterms if not any(covers(primes[i], m) for i in chosen)]
    if remaining:
        products: set[frozenset] = {frozenset()}
        for m in remaining:
            nxt = set()
            for term in products:
                if any(p in term for p in rows[m]):
                    nxt.add(term)
                    continue
                for p in rows[m]:
                    nxt.add(term | {p})
            # absorption: drop supersets
            ordered = sorted(nxt, key=len)
            kept: list[frozenset] = []
            for t in ordered:
                if not any(k <= t for k in kept):
                    kept.append(t)
            products = set(kept)
            if len(products) > PETRICK_LIMIT:
                sub = {t: rows[t] for t in remaining}
                extra = _ilp_cover(sub, primes)
                chosen |= set(extra)
                break
        else:
            extra = min(products, key=lambda t: _cover_key(t, primes))
            chosen |= set(extra)
    return [primes[i] for i in sorted(chosen, key=lambda i: primes[i])]


def minimize(n: int, minterms) -> list[Cube]:
    minterms = sorted(set(minterms))
    if not minterms:
        return []
    if len(minterms) == 1 << n:
        return [(0, 0)]
    return petrick_cover(prime_implicants(n, minterms), minterms)


def evaluate_sop(cubes: list[Cube], assignment: int) -> int:
    return int(any(covers(c, assignment) for c in cubes))
