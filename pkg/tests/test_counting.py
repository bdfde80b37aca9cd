from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from countdec import counting
from countdec.counting import PhiMap, count_solutions, diagonal_count, weighted_moment
from countdec.errors import BudgetExceeded, DomainError, InvariantViolation


def naive_counts(S, s, n):
    """Walk S^(2s) tuple by tuple; shares no code with either engine."""
    J = diag = 0
    for x in product(S, repeat=2 * s):
        a, b = x[:s], x[s:]
        if all(sum(v**j for v in a) == sum(v**j for v in b) for j in range(1, n + 1)):
            J += 1
            diag += sorted(a) == sorted(b)
    return J, diag


def naive_diagonal(k, s):
    return sum(sorted(x[:s]) == sorted(x[s:]) for x in product(range(k), repeat=2 * s))


# oracle values, computed once with naive_counts and frozen
ORACLE = {
    (2, (1, 2, 3, 4, 5, 6, 7), 3): (1771, 1645),
    (1, (1, 2, 3, 4), 2): (44, 28),
    (2, (1, 3, 4, 8), 2): (28, 28),
}


@pytest.mark.parametrize("key", sorted(ORACLE))
def test_frozen_oracle_values(key):
    n, S, s = key
    assert naive_counts(S, s, n) == ORACLE[key]


@pytest.mark.parametrize("engine", ["bruteforce", "mitm"])
@pytest.mark.parametrize("key", sorted(ORACLE))
def test_engines_match_oracle(engine, key):
    n, S, s = key
    t = count_solutions(PhiMap.moment_powers(max(S), n), S, s, engine=engine)
    assert (t.J, t.diagonal) == ORACLE[key]


def test_offdiagonal_seven_three():
    t = count_solutions(PhiMap.moment_powers(7, 2), range(1, 8), 3, engine="bruteforce")
    assert t.off_diagonal == 126


def test_j22_closed_form():
    t = count_solutions(PhiMap.moment_powers(50, 2), range(1, 51), 2)
    assert t.J == 2 * 50**2 - 50 == 4950


@pytest.mark.parametrize("k,s", [(1, 1), (3, 2), (3, 3), (4, 2), (5, 2), (2, 4)])
def test_diagonal_count_against_enumeration(k, s):
    assert diagonal_count(k, s) == naive_diagonal(k, s)


def test_diagonal_count_values():
    assert diagonal_count(3, 3) == 93
    assert diagonal_count(0, 2) == 0
    assert diagonal_count(range(1, 6), 1) == 5


@given(st.integers(1, 40))
def test_diagonal_two_is_2k2_minus_k(k):
    assert diagonal_count(k, 2) == 2 * k * k - k


@given(st.sets(st.integers(1, 9), min_size=1, max_size=5), st.integers(1, 2), st.integers(1, 3))
def test_engines_agree_property(S, n, s):
    phi = PhiMap.moment_powers(9, n)
    a = counting.count_solutions_bruteforce(phi, S, s)
    b = counting.count_solutions_mitm(phi, S, s)
    assert (a.J, a.diagonal) == (b.J, b.diagonal)
    assert a.J >= a.diagonal >= 0


def test_newton_girard():
    assert counting.newton_girard_elementary((6, 14, 36)) == (6, 11, 6)
    xs = (2, 7, 7, 10)
    e = counting.newton_girard_elementary(counting.power_sums(xs, 4))
    # elementary symmetric functions by direct expansion of prod(1 + x t)
    coeffs = np.poly1d([1])
    for x in xs:
        coeffs = coeffs * np.poly1d([x, 1])
    assert [int(c) for c in coeffs.coeffs[::-1][1:]] == [int(v) for v in e]


def test_certify_diagonal():
    assert counting.certify_diagonal((1, 2, 3, 3, 1, 2), 3) is True
    assert counting.certify_diagonal((1, 5, 6, 2, 3, 7), 2) is False


def test_certify_requires_solution():
    with pytest.raises((DomainError, InvariantViolation)):
        counting.certify_diagonal((1, 2, 3, 4), 1)


def test_weighted_moment_indicator_is_J():
    phi = PhiMap.moment_powers(8, 2)
    assert weighted_moment(phi, [1] * 8, 2) == diagonal_count(8, 2)


def test_weighted_moment_rational_exact():
    phi = PhiMap.moment_powers(3, 1)
    val = weighted_moment(phi, [Fraction(1, 2)] * 3, 2)
    # every solution carries weight (1/2)^4 and J_{2,1}({1,2,3}) = 1 + 4 + 9 + 4 + 1
    assert val == Fraction(19, 16)
    assert naive_counts((1, 2, 3), 2, 1)[0] == 19


def test_weighted_moment_complex_matches_fourier_mean():
    rng = np.random.default_rng(3)
    a = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    M = 64
    alpha = np.arange(M) / M
    F = np.exp(2j * np.pi * np.outer(alpha, np.arange(1, 6))) @ a
    expected = float(np.mean(np.abs(F) ** 6))
    got = weighted_moment(PhiMap.moment_powers(5, 1), a, 3)
    assert got == pytest.approx(expected, rel=1e-12)


def test_budget_refusal_reports_requirement():
    with pytest.raises(BudgetExceeded) as exc:
        count_solutions(PhiMap.moment_powers(1000, 2), range(1, 1001), 9)
    assert exc.value.required > exc.value.budget


def test_subset_validation():
    phi = PhiMap.moment_powers(5, 2)
    with pytest.raises(DomainError):
        count_solutions(phi, [0, 1], 1)
    with pytest.raises(DomainError):
        count_solutions(phi, [1, 2], 1, engine="nope")


def test_parse_phi_table_and_subset():
    phi = counting.parse_phi_table("# j phi\n1 1 1\n2 2 4\n3 3 9\n")
    assert phi.N == 3 and phi(2) == (2, 4)
    assert counting.parse_subset("1, 3 5") == (1, 3, 5)
    t = count_solutions(phi, [1, 2, 3], 2)
    assert t.J == diagonal_count(3, 2)


def test_large_values_use_exact_keys():
    # powers large enough to leave the int64 key range
    phi = PhiMap.from_rows([[j, j**2, 10**15 * j**3] for j in range(1, 6)])
    t = count_solutions(phi, range(1, 6), 2, engine="mitm")
    assert t.J == diagonal_count(5, 2)


def test_workers_do_not_change_result():
    phi = PhiMap.moment_powers(40, 2)
    a = counting.count_solutions_mitm(phi, range(1, 41), 2, workers=1)
    b = counting.count_solutions_mitm(phi, range(1, 41), 2, workers=3)
    assert a == b


def test_tally_dict_excludes_timing_when_asked():
    t = count_solutions(PhiMap.moment_powers(4, 1), range(1, 5), 1)
    assert "elapsed_ms" not in t.to_dict(timing=False)
    assert t.to_dict()["X_or_subset"] == 4
