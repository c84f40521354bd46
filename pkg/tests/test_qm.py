import itertools

from hypothesis import given, settings, strategies as st

from inctile import qm


def all_cubes(n):
    for care in range(1 << n):
        sub = care
        while True:
            yield (sub, care)
            if sub == 0:
                break
            sub = (sub - 1) & care


def brute_min(n, minterms):
    on = set(minterms)
    imps = [c for c in all_cubes(n)
            if all(m in on for m in range(1 << n) if qm.covers(c, m))]
    for k in range(1, len(on) + 1):
        for combo in itertools.combinations(imps, k):
            if all(any(qm.covers(c, m) for c in combo) for m in on):
                return k
    return 0


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=1, max_value=(1 << 16) - 2))
def test_minimal_cover_size_and_function(table):
    n = 4
    mins = [m for m in range(16) if table >> m & 1]
    cubes = qm.minimize(n, mins)
    for m in range(16):
        assert qm.evaluate_sop(cubes, m) == (table >> m & 1)
    assert len(cubes) == brute_min(n, mins)


def test_xor_needs_two_cubes():
    assert len(qm.minimize(2, [1, 2])) == 2
    assert qm.minimize(2, [0, 1, 2, 3]) == [(0, 0)]
    assert qm.minimize(3, []) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=(1 << 32) - 2))
def test_ilp_cover_agrees_with_petrick(table):
    mins = [m for m in range(32) if table >> m & 1]
    primes = qm.prime_implicants(5, mins)
    ref = qm.petrick_cover(primes, mins)
    old = qm.PETRICK_LIMIT
    qm.PETRICK_LIMIT = 0
    try:
        alt = qm.petrick_cover(primes, mins)
    finally:
        qm.PETRICK_LIMIT = old
    assert len(alt) == len(ref)
    assert sum(map(qm.literal_count, alt)) == sum(map(qm.literal_count, ref))
    for m in range(32):
        assert qm.evaluate_sop(alt, m) == (table >> m & 1)
