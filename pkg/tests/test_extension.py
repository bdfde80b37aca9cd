import cmath
import math

import numpy as np
import pytest

from countdec import extension
from countdec.curves import Curve
from countdec.errors import BudgetExceeded, DomainError
from countdec.extension import BallWeight, DensityFunction, GridConfig

CURVE = Curve.normalized_moment(2)  # gamma(t) = (t, t^2 / 2)


def linear_phase_integral(xi, a, b):
    """int_a^b exp(2 pi i xi t) dt in closed form."""
    if xi == 0:
        return b - a
    return (cmath.exp(2j * math.pi * xi * b) - cmath.exp(2j * math.pi * xi * a)) / (2j * math.pi * xi)


def dense_simpson(curve, f, a, b, x, n=200_000):
    t = np.linspace(a, b, n + 1)
    g = np.exp(2j * math.pi * (curve.derivative(0, t) @ np.asarray(x))) * f(t)
    w = np.ones(n + 1)
    w[1:-1:2], w[2:-1:2] = 4, 2
    return complex(np.sum(w * g) * (b - a) / (3 * n))


def test_zero_density():
    assert extension.extension_eval(CURVE, DensityFunction.constant(0), (0, 1), (3.0, -2.0)) == 0


def test_origin_with_unit_density():
    assert extension.extension_eval(CURVE, DensityFunction.constant(1), (0, 1), (0, 0)) == pytest.approx(1, abs=1e-14)


@pytest.mark.parametrize("xi", [0.5, 4.3, 37.25])
def test_linear_phase_closed_form(xi):
    got = extension.extension_eval(CURVE, DensityFunction.constant(1), (0.2, 0.9), (xi, 0))
    assert got == pytest.approx(linear_phase_integral(xi, 0.2, 0.9), abs=1e-12)


@pytest.mark.parametrize("x", [(4.0, 0.0), (3.0, 11.0), (-20.0, 35.0)])
def test_against_dense_simpson(x):
    f = DensityFunction.random(np.random.default_rng(1), grid=16)
    got = extension.extension_eval(CURVE, f, (0, 1), x)
    assert got == pytest.approx(dense_simpson(CURVE, f, 0, 1, x), abs=1e-8)


def test_additivity_and_modulus_bound():
    f = DensityFunction.random(np.random.default_rng(4), grid=32)
    x = (7.5, -12.0)
    whole = extension.extension_eval(CURVE, f, (0, 1), x)
    parts = sum(extension.extension_eval(CURVE, f, (k / 4, (k + 1) / 4), x) for k in range(4))
    assert parts == pytest.approx(whole, abs=1e-11)
    assert abs(whole) <= f.l1() + 1e-12


def test_detail_reports_agreement():
    d = extension.extension_eval_detail(CURVE, DensityFunction.constant(1), (0, 1), (50.0, 50.0))
    assert d.accurate and d.error_estimate < 1e-10 and d.panels >= 1


def test_eval_refusals():
    f = DensityFunction.constant(1)
    with pytest.raises(BudgetExceeded):
        extension.extension_eval(CURVE, f, (0, 1), (5000.0, 0.0), max_panels=100)
    with pytest.raises(DomainError):
        extension.extension_eval(CURVE, f, (0.5, 0.2), (1.0, 0.0))
    with pytest.raises(DomainError):
        extension.extension_eval(CURVE, f, (0, 1), (1.0, 0.0, 0.0))
    with pytest.raises(DomainError):
        extension.extension_eval(CURVE, f, (0, 1), (1e5, 0.0))


def test_density_function():
    f = DensityFunction([0, 2, 0])
    assert f(0.25) == pytest.approx(1) and f.grid == 2 and f.l1() == pytest.approx(1)
    r = f.restrict(0.6, 1)
    assert r.samples.tolist() == [0, 0, 0]
    with pytest.raises(DomainError):
        DensityFunction([1])
    with pytest.raises(DomainError):
        DensityFunction([1, np.nan])


def test_ball_weight_shape():
    b = BallWeight((1.0, 2.0), 4.0)
    assert b.exponent == 3 and b((1.0, 2.0)) == 1
    r = np.linspace(0, 100, 50)
    vals = b(np.stack([1 + r, np.full_like(r, 2.0)], axis=-1))
    assert np.all(np.diff(vals) < 0) and np.all(vals > 0)
    L = b.truncation_radius(1e-2)
    assert b((1 + L, 2.0)) == pytest.approx(1e-2, rel=1e-12)
    with pytest.raises(DomainError):
        BallWeight((0.0, 0.0), 1.0, exponent=2.0)
    with pytest.raises(DomainError):
        BallWeight((0.0,), 0.0)


@pytest.mark.parametrize("center,E", [((0.0,), 2.0), ((0.0,), 3.5), ((0.0, 0.0), 3.0), ((0.0, 0.0), 4.5)])
def test_tail_mass_against_radial_integral(center, E):
    b = BallWeight(center, 4.0, E)
    L = 10.0
    # substitute r = L + u / (1 - u) to map [L, inf) onto [0, 1)
    u, w = np.polynomial.legendre.leggauss(200)
    u = (u + 1) / 2
    r = L + u / (1 - u)
    jac = 1 / (1 - u) ** 2
    dens = (1 + r / b.radius) ** (-E) * (2 if b.n == 1 else 2 * math.pi * r)
    assert b.tail_mass(L) == pytest.approx(float(np.sum(w / 2 * dens * jac)), rel=1e-8)


def test_probe_single_interval_ratio_is_one():
    f = DensityFunction.random(np.random.default_rng(3), grid=8).restrict(0, 0.375)  # hat at 3/8 ends at 1/2
    probe = extension.run_probe(CURVE, f, 2, BallWeight((0.0, 0.0), 4.0), exponents=(2, 4))
    for m in (1, 2):
        assert extension.square_function_from(probe, m).ratio == pytest.approx(1, rel=1e-12)
    assert extension.decoupling_from(probe, 4).ratio == pytest.approx(1, rel=1e-12)


def test_probe_minkowski_and_p2_collapse():
    f = DensityFunction.random(np.random.default_rng(6), grid=8)
    probe = extension.run_probe(CURVE, f, 2, BallWeight((0.5, -1.0), 4.0))
    sq2 = extension.square_function_from(probe, 1)
    dec2 = extension.decoupling_from(probe, 2)
    assert dec2.rhs == pytest.approx(sq2.rhs, rel=1e-12) and dec2.lhs == sq2.lhs
    dec4 = extension.decoupling_from(probe, 4)
    assert extension.square_function_from(probe, 2).rhs <= dec4.rhs * (1 + 1e-12)
    assert dec4.to_dict()["p"] == 4 and sq2.to_dict()["m"] == 1
    assert probe.tail_estimate(4) == pytest.approx(f.l1() ** 4 * probe.tail_mass)


def test_probe_refusals():
    f = DensityFunction.constant(1)
    ball = BallWeight((0.0, 0.0), 4.0)
    with pytest.raises(DomainError):
        extension.run_probe(Curve.normalized_moment(3), f, 2, BallWeight((0.0, 0.0, 0.0), 8.0))
    with pytest.raises(DomainError):
        extension.run_probe(CURVE, f, 1, ball)
    with pytest.raises(DomainError):
        extension.run_probe(CURVE, f, 9, BallWeight((0.0, 0.0), 81.0))
    with pytest.raises(DomainError):
        extension.run_probe(CURVE, f, 4, ball)
    with pytest.raises(DomainError):
        extension.run_probe(CURVE, f, 2, ball, exponents=(3,))
    with pytest.raises(BudgetExceeded):
        extension.run_probe(CURVE, f, 2, ball, GridConfig(max_points=100))
    with pytest.raises(DomainError):
        extension.square_function_ratio(CURVE, f, 2, 3, ball)
