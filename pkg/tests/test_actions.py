from itertools import chain, combinations, product
from math import comb

import pytest

from coopcache.actions import decode, encode, enumerate_actions, satisfies_requests


def powerset(items):
    return chain.from_iterable(combinations(items, r) for r in range(len(items) + 1))


def brute_force_count(M, N, C_s, cooperative):
    """Count placements by filtering the full power sets of both catalogs."""
    count = 0
    for B_p, B_s in product(powerset(range(1, M + 1)), powerset(range(1, N + 1))):
        if not B_p and len(B_s) == C_s:
            count += 1
        elif cooperative and B_p and len(B_p) == len(B_s) == C_s // 2:
            count += 1
    return count


def test_reference_sizes():
    assert enumerate_actions(5, 5, 4, True).z == 105
    assert enumerate_actions(5, 5, 4, False).z == 5


def test_forced_single_action():
    t = enumerate_actions(1, 1, 2, True)
    assert t.z == 1
    a = t[0]
    assert (a.I_t, a.B_p, a.B_s) == (1, {1}, {1})


@pytest.mark.parametrize("M,N", [(m, n) for m in range(1, 7) for n in range(1, 7)])
@pytest.mark.parametrize("C_s", [2, 4, 6])
def test_count_matches_closed_form_and_brute_force(M, N, C_s):
    if C_s > 2 * min(M, N):
        return
    t = enumerate_actions(M, N, C_s, True)
    assert t.z == comb(N, C_s) + comb(M, C_s // 2) * comb(N, C_s // 2)
    assert t.z == brute_force_count(M, N, C_s, True)
    assert enumerate_actions(M, N, C_s, False).z == brute_force_count(M, N, C_s, False)


def test_table_invariants():
    t = enumerate_actions(5, 5, 4, True)
    keys = [a.key for a in t]
    assert [a.index for a in t] == list(range(t.z))
    assert len(set(keys)) == t.z
    assert keys == sorted(keys)
    for a in t:
        assert len(a.B_p) + len(a.B_s) <= 4
        assert (a.I_t == 1) == bool(a.B_p)
    assert all(a.I_t == 0 and not a.B_p for a in enumerate_actions(5, 5, 4, False))


def test_index_zero_is_smallest():
    a = decode(enumerate_actions(5, 5, 4, True), 0)
    assert (a.I_t, a.B_p, a.B_s) == (0, frozenset(), frozenset({1, 2, 3, 4}))


def test_round_trip():
    t = enumerate_actions(5, 5, 4, True)
    for i in range(t.z):
        a = decode(t, i)
        assert encode(t, a.I_t, a.B_p, a.B_s) == i
        assert decode(t, encode(t, a.I_t, list(a.B_p), list(a.B_s))) == a


def test_lookup_errors():
    t = enumerate_actions(5, 5, 4, True)
    with pytest.raises(IndexError):
        decode(t, 105)
    with pytest.raises(IndexError):
        decode(t, -1)
    with pytest.raises(ValueError):
        encode(t, 1, {1, 2, 3}, {1, 2})
    with pytest.raises(KeyError):
        encode(t, 0, (), {1, 2})


def test_odd_capacity_rejected():
    with pytest.raises(ValueError):
        enumerate_actions(5, 5, 3, True)


def test_satisfies_requests():
    t = enumerate_actions(5, 5, 4, True)
    a = t[encode(t, 1, {1, 2}, {3, 4})]
    assert satisfies_requests(a, 2, 3) == (True, True)
    assert satisfies_requests(a, 5, 3) == (False, True)
    assert satisfies_requests(t[0], 1, 5) == (False, False)
    for a in t:
        for d_p, d_s in product(range(1, 6), repeat=2):
            assert satisfies_requests(a, d_p, d_s) == (
                any(x == d_p for x in a.B_p), any(x == d_s for x in a.B_s))
            assert t.pu_mask[a.index, d_p] == (d_p in a.B_p)
            assert t.su_mask[a.index, d_s] == (d_s in a.B_s)
