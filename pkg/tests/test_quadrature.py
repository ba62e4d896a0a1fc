import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pshcurrents import quadrature as q


def r2(z):
    return np.sum(np.abs(z) ** 2, axis=1)


def one(z):
    return np.ones(z.shape[0])


def test_ball_volume():
    assert q.ball_volume(2, 1.0) == pytest.approx(math.pi)
    assert q.ball_volume(4, 2.0) == pytest.approx(8 * math.pi**2)
    assert q.ball_volume(6, 1.0) == pytest.approx(math.pi**3 / 6)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_sphere_rule_weights_sum_to_area(n):
    area = 2 * math.pi**n / math.factorial(n - 1)
    pts, w, wh = q.sphere_rule(n, 3)
    assert np.sum(w) == pytest.approx(area, rel=1e-12)
    assert np.sum(wh) == pytest.approx(area, rel=1e-12)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0)


@pytest.mark.parametrize(
    "density, n, expected",
    [
        (r2, 2, 3.2898681336964524),  # pi^2 / 3
        (lambda z: np.abs(z[:, 0]) ** 2, 2, 1.6449340668482262),  # pi^2 / 6
        (lambda z: np.real(z[:, 0]) ** 2, 1, 0.7853981633974483),  # pi / 4
        (lambda z: 1.0 / r2(z), 2, 9.869604401089358),  # pi^2, singular at the centre
        (lambda z: -np.log(np.abs(z[:, 0])), 1, 1.5707963267948966),  # pi / 2
    ],
)
def test_ball_integrals(density, n, expected):
    res = q.integrate(density, q.Ball((0.0,) * n, 1.0))
    assert res.converged
    assert abs(res.value - expected) <= max(3 * res.error, 1e-9)
    assert abs(res.value - expected) <= 1e-3 * expected


def test_off_centre_ball_volume():
    res = q.integrate(one, q.Ball((0.3, -0.2j), 0.5))
    assert res.value == pytest.approx(q.ball_volume(4, 0.5), rel=1e-9)


@given(st.floats(0.05, 0.9), st.floats(0.05, 0.9))
def test_annulus_additivity(a, b):
    r1, r2_ = sorted((a, a + b))
    f = lambda z: np.exp(-r2(z)) * (1 + np.real(z[:, 0]) ** 2)
    whole = q.integrate(f, q.Ball((0.0, 0.0), r2_))
    inner = q.integrate(f, q.Ball((0.0, 0.0), r1))
    shell = q.integrate(f, q.Annulus((0.0, 0.0), r1, r2_))
    assert abs(whole.value - inner.value - shell.value) <= 3 * (whole.error + inner.error + shell.error) + 1e-12


@given(st.integers(0, 2**31 - 1))
def test_integration_is_deterministic(seed):
    f = lambda z: np.cos(np.real(z[:, 0])) + np.abs(z[:, 1]) ** 3
    a = q.integrate(f, q.Ball((0.0, 0.0), 1.0), seed=seed)
    b = q.integrate(f, q.Ball((0.0, 0.0), 1.0), seed=seed)
    assert a.value == b.value and a.error == b.error


@given(st.lists(st.floats(0.05, 1.0), min_size=2, max_size=6, unique=True), st.floats(0.1, 3.0))
def test_profile_monotone_for_nonnegative_density(radii, c):
    radii = sorted(radii)
    f = lambda z: np.abs(np.sin(c * np.real(z[:, 0]))) + np.abs(z[:, 1])
    prof = q.radial_profile(f, (0.0, 0.0), radii)
    assert np.all(np.diff(np.real(prof.values)) >= 0)


def test_polydisc_slab():
    res = q.integrate(one, q.PolydiscSlab(2, 1, 0.5))
    assert res.value == pytest.approx(math.pi * 0.25 * math.pi, rel=1e-9)
    res = q.integrate(lambda z: np.abs(z[:, 0]) ** 2, q.PolydiscSlab(2, 1, 0.5))
    assert res.value == pytest.approx(math.pi * 0.5**4 / 2 * math.pi, rel=1e-9)


def test_integrate_line():
    v, e = q.integrate_line(lambda t: 1 / t, 1.0, 2.0)
    assert v == pytest.approx(math.log(2), abs=1e-14)
    v, e = q.integrate_line(lambda t: t**3, 0.0, 1.0, log_panels=False)
    assert v == pytest.approx(0.25, abs=1e-15)
    assert q.integrate_line(lambda t: t, 1.0, 1.0) == (0.0, 0.0)


def test_sobol_integration():
    res = q.integrate_sobol(lambda u: u[:, 0] * u[:, 1], 2, seed=4)
    assert abs(res.value - 0.25) <= 3 * res.error + 1e-12
    again = q.integrate_sobol(lambda u: u[:, 0] * u[:, 1], 2, seed=4)
    assert res.value == again.value


def test_result_arithmetic_and_validation():
    a = q.QuadratureResult(1.0, 0.1, 10)
    b = q.QuadratureResult(2.0, 0.2, 5, converged=False)
    c = a + b
    assert (c.value, c.evaluations, c.converged) == (3.0, 15, False)
    assert c.error == pytest.approx(0.3)
    assert a.scaled(-2).error == pytest.approx(0.2)
    with pytest.raises(ValueError):
        q.QuadratureResult(1.0, math.inf, 1)
    with pytest.raises(ValueError):
        q.RadialProfile([1.0, 0.5], [0, 0], [0, 0])
    with pytest.raises(ValueError):
        q.Annulus((0.0,), 1.0, 0.5)
    with pytest.raises(ValueError):
        q.PolydiscSlab(2, 3, 0.5)


def test_budget_exhaustion_is_reported():
    # an oscillating density cannot reach 1e-12 relative accuracy on a tiny budget
    f = lambda z: np.cos(40 * np.real(z[:, 0])) ** 2
    res = q.integrate(f, q.Ball((0.0, 0.0), 1.0), tol=1e-12, budget=2000)
    assert not res.converged
