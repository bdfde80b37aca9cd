from itertools import combinations, combinations_with_replacement

import pytest
from hypothesis import given, strategies as st

from countdec import pte
from countdec.errors import DomainError


def equal_power_sums(a, b, n):
    return all(sum(x**j for x in a) == sum(x**j for x in b) for j in range(1, n + 1))


def naive_least_witness(n, s, X, distinct=True):
    """All pairs of sides, least by (largest entry, then lexicographic)."""
    gen = combinations if distinct else combinations_with_replacement
    sides = list(gen(range(1, X + 1), s))
    best = None
    for a, b in combinations(sides, 2):
        if sorted(a) != sorted(b) and equal_power_sums(a, b, n):
            a, b = min(a, b), max(a, b)
            key = (max(a + b), a, b)
            best = key if best is None or key < best else best
    return None if best is None else [list(best[1]), list(best[2])]


def test_known_witnesses():
    assert pte.find_offdiagonal(2, 3, 7).to_dict()["sides"] == [[1, 5, 6], [2, 3, 7]]
    assert pte.find_offdiagonal(3, 4, 12).to_dict()["sides"] == [[1, 5, 8, 12], [2, 3, 10, 11]]


def test_witness_sums():
    assert (1 + 5 + 6, 1 + 25 + 36) == (2 + 3 + 7, 4 + 9 + 49) == (12, 62)
    assert equal_power_sums((1, 5, 8, 12), (2, 3, 10, 11), 3)


@pytest.mark.parametrize("n,s,X,distinct", [(2, 3, 9, True), (2, 3, 9, False), (3, 4, 12, True), (1, 2, 6, False)])
def test_search_matches_naive_oracle(n, s, X, distinct):
    r = pte.find_offdiagonal(n, s, X, distinct=distinct)
    assert r.to_dict()["sides"] == naive_least_witness(n, s, X, distinct)


def test_multiset_search_finds_repeated_entries():
    r = pte.find_offdiagonal(2, 3, 7, distinct=False)
    assert r.to_dict()["sides"] == [[1, 4, 4], [2, 2, 5]]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_no_witness_when_s_at_most_n(n):
    for s in range(1, n + 1):
        for distinct in (True, False):
            r = pte.find_offdiagonal(n, s, 12, distinct=distinct)
            assert r.status == "none" and r.witness is None


def test_none_for_n2_s2_up_to_100():
    assert pte.find_offdiagonal(2, 2, 100, distinct=False).status == "none"


def test_budget_is_distinct_from_none():
    r = pte.find_offdiagonal(3, 4, 12, budget=100)
    assert r.status == "budget" and r.witness is None and r.scanned == 100


def test_solution_validation():
    with pytest.raises(DomainError):
        pte.OffDiagonalSolution((1, 2, 3, 4, 5, 6), 2, 10)
    with pytest.raises(DomainError):
        pte.OffDiagonalSolution((1, 2, 2, 1), 2, 10)  # diagonal
    with pytest.raises(DomainError):
        pte.OffDiagonalSolution((1, 5, 6, 2, 3, 7), 2, 6)


BASE = pte.OffDiagonalSolution((1, 5, 6, 2, 3, 7), 2, 7)


def test_amplify_first_yield_is_shift():
    first = next(pte.amplify(BASE, 8))
    assert first.x == tuple(v + 1 for v in BASE.x)


def test_amplify_count_665():
    assert sum(1 for _ in pte.amplify(BASE, 100)) == 665 == sum(100 - 7 * q for q in range(1, 15))


def test_amplify_below_max_is_empty():
    assert list(pte.amplify(BASE, 6)) == []
    assert list(pte.amplify(BASE, 7)) == []


@given(st.integers(1, 120))
def test_amplify_properties(X):
    sols = list(pte.amplify(BASE, X))
    assert len(sols) == pte.amplified_count(BASE, X) == sum(max(0, X - 7 * q) for q in range(1, X + 1))
    assert len({s.x for s in sols}) == len(sols)
    for s in sols:
        a, b = s.sides
        assert equal_power_sums(a, b, 2) and sorted(a) != sorted(b)
        assert 1 <= min(s.x) and max(s.x) <= X


def test_growth_exponent():
    assert pte.growth_exponent([(X, X**2) for X in (3, 10, 50, 200)]) == pytest.approx(2.0, abs=1e-12)
    assert pte.growth_exponent([(X, 5) for X in (1, 2, 3)]) == pytest.approx(0.0, abs=1e-12)
    counts = [(X, pte.amplified_count(BASE, X)) for X in (50, 100, 200)]
    assert 1.9 <= pte.growth_exponent(counts) <= 2.1


@pytest.mark.parametrize("data", [[(1, 1), (2, 4)], [(1, 1), (2, 0), (3, 9)], [(1, 1), (1, 2), (3, 9)]])
def test_growth_exponent_errors(data):
    with pytest.raises(DomainError):
        pte.growth_exponent(data)
