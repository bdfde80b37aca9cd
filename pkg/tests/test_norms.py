import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from countdec import norms
from countdec.counting import PhiMap, count_solutions
from countdec.errors import DomainError
from countdec.norms import CoefficientVector, DecouplingCheckConfig

complex_vectors = st.lists(
    st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), min_size=1, max_size=40
)


def lorentz_by_integration(a, p):
    """Integrate lambda^(1/p) piecewise between consecutive distinct moduli."""
    m = np.abs(np.asarray(a, dtype=complex))
    levels = np.concatenate(([0.0], np.unique(m)))
    total = 0.0
    for lo, hi in zip(levels[:-1], levels[1:]):
        total += (hi - lo) * norms.distribution_function(a, lo) ** (1 / p)
    return total


def test_distribution_function():
    assert norms.distribution_function([1, 1, 1], 0.5) == 3
    assert norms.distribution_function([2, 1], 1.5) == 1
    assert norms.distribution_function([2, -3j], 3) == 0


@pytest.mark.parametrize("p", [1.25, 2, 3, 10])
def test_lorentz_trivial_values(p):
    assert norms.lorentz_p1_norm([1], p) == 1
    assert norms.lorentz_p1_norm(np.ones(9), p) == pytest.approx(9 ** (1 / p), rel=1e-15)


def test_lorentz_two_one():
    assert norms.lorentz_p1_norm([2, 1], 2) == pytest.approx(1 + math.sqrt(2), rel=1e-15)


@given(complex_vectors, st.sampled_from([1.25, 2.0, 3.0, 10.0]))
def test_lorentz_matches_integration(a, p):
    assert norms.lorentz_p1_norm(a, p) == pytest.approx(lorentz_by_integration(a, p), rel=1e-12, abs=1e-12)


@given(complex_vectors, st.sampled_from([1.25, 2.0, 3.0, 10.0]))
def test_lorentz_dominates_lp_and_bound_holds(a, p):
    lp = norms.lp_norm(a, p)
    assert norms.lorentz_p1_norm(a, p) >= lp * (1 - 1e-12)
    assert norms.lorentz_bound_check(a, p).holds


@given(complex_vectors, st.floats(1e-3, 1e3), st.sampled_from([1.5, 2.0, 4.0]))
def test_chebyshev_and_vanishing(a, s, p):
    lam = norms.distribution_function(a, s)
    assert lam ** (1 / p) <= norms.lp_norm(a, p) / s * (1 + 1e-12)
    assert norms.distribution_function(a, norms.lp_norm(a, p) * (1 + 1e-12)) == 0


def test_lorentz_bound_example():
    r = norms.lorentz_bound_check([2, 1], 2)
    assert r.lhs == pytest.approx(2.4142135623730951)
    assert r.rhs == pytest.approx((1 + math.sqrt(math.log(2)) / 2) * math.sqrt(5))
    assert r.rhs == pytest.approx(3.1669, abs=1e-4)
    assert r.holds


@pytest.mark.parametrize("N", [1, 5, 1000])
def test_equality_case(N):
    a = np.full(N, 0.3 - 0.1j)
    for p in (1.25, 2, 10):
        assert norms.lorentz_p1_norm(a, p) == norms.lp_norm(a, p)
        r = norms.lorentz_bound_check(a, p)
        assert r.lhs == pytest.approx(r.rhs / norms.lorentz_factor(N, p), rel=1e-15)


def test_p_must_exceed_one():
    with pytest.raises(DomainError):
        norms.lorentz_p1_norm([1, 2], 1.0)


def test_four_part_split_examples():
    parts = norms.four_part_split([1.0, 2.0])
    np.testing.assert_array_equal(parts[0].entries, [1, 2])
    for p in parts[1:]:
        assert not p.entries.any()
    parts = norms.four_part_split([-3])
    assert [float(p.entries[0]) for p in parts] == [0, 3, 0, 0]


@given(complex_vectors, st.sampled_from([1.25, 2.0, 3.0]))
def test_four_part_split_properties(a, p):
    rp, rm, ip, im = norms.four_part_split(a)
    z = np.asarray(a, dtype=complex)
    np.testing.assert_array_equal((rp.entries - rm.entries) + 1j * (ip.entries - im.entries), z)
    for x in (rp, rm, ip, im):
        assert (x.entries >= 0).all()
    assert not (rp.entries * rm.entries).any() and not (ip.entries * im.entries).any()
    lhs = norms.lp_norm(rp.entries - rm.entries + 0j, p) ** p + norms.lp_norm(ip.entries - im.entries + 0j, p) ** p
    assert lhs <= 2 * norms.lp_norm(a, p) ** p * (1 + 1e-12)


def test_config_derived_values():
    cfg = DecouplingCheckConfig(2, 2, 2)
    assert cfg.p == 2 and cfg.p_conj == 2
    assert cfg.c_prime == pytest.approx(2**0.5 * 4**0.5 * 2**0.25)
    cfg = DecouplingCheckConfig(3, 4.5, 1)
    assert 1 / cfg.p + 1 / cfg.p_conj == pytest.approx(1, abs=1e-15)
    for bad in [(2, 4, 1), (2, 1.5, 1), (2, 2, 0)]:
        with pytest.raises(DomainError):
            DecouplingCheckConfig(*bad)


def test_decoupling_single_entry():
    cfg = DecouplingCheckConfig(2, 3, 1.5)
    r = norms.decoupling_check(PhiMap.moment_powers(1, 2), [1], cfg)
    assert r.lhs == 1 and r.rhs == pytest.approx(cfg.c_prime) and r.holds


def test_decoupling_indicator_matches_counting_form():
    cfg = DecouplingCheckConfig(2, 2, 2)
    N = 60
    S = [j for j in range(1, N + 1) if j % 3]
    a = CoefficientVector.indicator(N, S)
    r = norms.decoupling_check(PhiMap.moment_powers(N, 2), a, cfg)
    J = count_solutions(PhiMap.moment_powers(N, 2), S, 2).J
    assert r.moment == J
    Jf, bound = norms.indicator_bound(J, len(S), N, cfg)
    assert r.holds == (Jf <= bound * (1 + 1e-9) ** 4)
    assert r.rhs ** 4 == pytest.approx(bound, rel=1e-12)


def test_decoupling_homogeneity():
    rng = np.random.default_rng(5)
    a = norms.random_complex(rng, 30)
    cfg = DecouplingCheckConfig(2, 2, 2)
    phi = PhiMap.moment_powers(30, 2)
    r1 = norms.decoupling_check(phi, a, cfg)
    r2 = norms.decoupling_check(phi, 3.5 * a, cfg)
    assert r2.lhs == pytest.approx(3.5 * r1.lhs, rel=1e-12)
    assert r2.rhs == pytest.approx(3.5 * r1.rhs, rel=1e-12)
    assert r1.holds == r2.holds


def test_decoupling_random_sweep():
    rng = np.random.default_rng(11)
    cfg = DecouplingCheckConfig(2, 2, 2)
    for _ in range(30):
        N = int(rng.integers(1, 80))
        assert norms.decoupling_check(PhiMap.moment_powers(N, 2), norms.random_complex(rng, N), cfg).holds


def test_length_mismatch():
    with pytest.raises(DomainError):
        norms.decoupling_check(PhiMap.moment_powers(3, 2), [1, 2], DecouplingCheckConfig(2, 2, 2))


def test_coefficient_vector_validation():
    with pytest.raises(DomainError):
        CoefficientVector([])
    with pytest.raises(DomainError):
        CoefficientVector([1, np.inf])
    assert CoefficientVector.indicator(5, [1, 5]).entries.tolist() == [1, 0, 0, 0, 1]


def test_report_json_fields():
    r = norms.decoupling_check(PhiMap.moment_powers(4, 2), [1, 1, 0, 1], DecouplingCheckConfig(2, 2, 2), seed=3)
    d = r.to_dict()
    assert {"N", "p", "lhs", "rhs", "ratio", "holds", "seed"} <= set(d)
