import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pshcurrents import forms as fm

finite = st.floats(-3, 3, allow_nan=False)
cplx = st.builds(complex, finite, finite)


def const10(v):
    return fm.constant_form(len(v), 1, 0, np.asarray(v).reshape(len(v), 1))


def test_multi_indices_are_sorted_and_counted():
    idx = fm.multi_indices(4, 2)
    assert len(idx) == 6
    assert [I.indices for I in idx][:3] == [(1, 2), (1, 3), (1, 4)]
    with pytest.raises(ValueError):
        fm.MultiIndex((2, 1))


@pytest.mark.parametrize("n, density", [(1, 0.3183098861837907), (2, 0.20264236728467555), (3, 0.19350920659919696)])
def test_beta_power_density(n, density):
    # beta^n = n!/pi^n dV, so the unit ball has mass 1
    z = np.random.default_rng(1).normal(size=(4, n)) + 0j
    d = fm.top_density(fm.power(fm.beta(n=n), n), z)
    np.testing.assert_allclose(d, density, rtol=1e-13)


def test_alpha_top_power_vanishes_off_origin():
    z = np.array([[0.3, -0.2j], [1.0, 2.0]])
    d = fm.top_density(fm.power(fm.alpha(n=2), 2), z)
    np.testing.assert_allclose(d, 0.0, atol=1e-14)


def test_alpha_singular_at_center():
    with pytest.raises(fm.SingularPointError):
        fm.alpha(n=2)(np.zeros((1, 2)))


def test_wedge_degree_overflow():
    with pytest.raises(fm.DegreeError):
        fm.power(fm.beta(n=2), 3)


@given(st.lists(cplx, min_size=3, max_size=3), st.lists(cplx, min_size=3, max_size=3))
def test_wedge_anticommutes_on_one_forms(u, v):
    U, V = const10(u), const10(v)
    z = np.zeros((1, 3))
    np.testing.assert_allclose(fm.wedge(U, V)(z), -fm.wedge(V, U)(z), atol=1e-12)


@given(*[st.lists(cplx, min_size=3, max_size=3)] * 3)
def test_wedge_is_associative(u, v, w):
    U, V, W = const10(u), const10(v), const10(w)
    z = np.zeros((1, 3))
    left = fm.wedge(fm.wedge(U, V), W)(z)
    right = fm.wedge(U, fm.wedge(V, W))(z)
    np.testing.assert_allclose(left, right, atol=1e-10)


def test_wedge_top_form_is_determinant():
    A = np.array([[1.0, 2j], [0.5, -1.0]])
    top = fm.wedge(const10(A[0]), const10(A[1]))(np.zeros((1, 2)))[0, 0, 0]
    assert top == pytest.approx(np.linalg.det(A))


@given(cplx.filter(lambda a: abs(a) > 0.05))
def test_dilate_beta(a):
    z = np.array([[0.2, 0.1j]])
    np.testing.assert_allclose(fm.dilate_form(fm.beta(n=2), a)(z), abs(a) ** 2 * fm.beta(n=2)(z), atol=1e-12)


@given(st.integers(0, 10_000))
def test_beta_is_unitarily_invariant(seed):
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    pb = fm.pullback(fm.beta(n=2), lambda w: w @ U.T, lambda w: U, 2)
    z = np.array([[0.3, 0.4j]])
    np.testing.assert_allclose(pb(z), fm.beta(n=2)(z), atol=1e-13)


def test_ddc_of_norm_squared_is_beta():
    F = fm.Form(2, 0, 0, lambda z: np.sum(np.abs(z) ** 2, axis=1)[:, None, None])
    z = np.array([[0.3 + 0.1j, -0.5j]])
    np.testing.assert_allclose(fm.ddc_form(F)(z), fm.beta(n=2)(z), atol=1e-8)


def test_ddc_of_product():
    F = fm.Form(2, 0, 0, lambda z: (np.abs(z[:, 0]) ** 2 * np.abs(z[:, 1]) ** 2)[:, None, None])
    z1, z2 = 0.3 + 0.1j, -0.5j
    got = fm.ddc_form(F, richardson=True)(np.array([[z1, z2]]))[0]
    expected = fm.DDC * np.array([[abs(z2) ** 2, np.conj(z1) * z2], [z1 * np.conj(z2), abs(z1) ** 2]])
    np.testing.assert_allclose(got, expected, atol=1e-8)


def test_ddc_of_log_is_alpha():
    F = fm.Form(2, 0, 0, lambda z: np.log(np.sum(np.abs(z) ** 2, axis=1))[:, None, None], ((0.0, 0.0),))
    z = np.array([[0.4, 0.2 - 0.3j]])
    np.testing.assert_allclose(fm.ddc_form(F)(z), fm.alpha(n=2)(z), atol=1e-7)


def test_weighted_coefficients_of_beta():
    S = fm.weighted_coefficients(fm.beta(n=3), np.zeros((1, 3)))[0]
    # beta = (i/2pi) sum dz_j ^ dzb_j = 2^{-1} i (1/pi) sum ...
    np.testing.assert_allclose(S, np.eye(3) / math.pi)


@given(st.integers(0, 10_000), st.sampled_from([(2, 1), (3, 1), (3, 2), (4, 2)]))
def test_random_positive_forms_are_positive_and_hermitian(seed, nq):
    n, q = nq
    S = fm.random_positive_form(n, q, np.random.default_rng(seed))
    z = np.zeros((1, n))
    assert fm.is_hermitian(S, z)
    assert fm.positivity_probe(S, z, seed=seed)


@given(st.integers(0, 10_000), st.sampled_from([(2, 1), (3, 1), (3, 2), (4, 2), (4, 3)]))
def test_demailly_inequality_on_positive_forms(seed, nq):
    n, q = nq
    rng = np.random.default_rng(seed)
    S = fm.random_positive_form(n, q, rng)
    lam = rng.uniform(0.05, 20.0, size=n)
    assert fm.demailly_check(S, lam, np.zeros(n)).violations == 0


def test_demailly_check_detects_nonpositive_form():
    # Hermitian but indefinite: zero diagonal, unit off-diagonal
    pref = 2.0**-1 * 1j
    S = fm.constant_form(2, 1, 1, pref * np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert fm.demailly_check(S, [1.0, 1.0], np.zeros(2)).violations > 0
    assert not fm.positivity_probe(S, np.zeros(2))


def test_demailly_rejects_bad_lambda():
    with pytest.raises(ValueError):
        fm.demailly_check(fm.beta(n=2), [1.0, 0.0], np.zeros(2))
