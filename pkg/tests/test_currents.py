import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pshcurrents import forms as fm
from pshcurrents.currents import (
    AmbientSmooth,
    ChartInvisibleError,
    Current,
    DilatationFamily,
    NonDifferentiableError,
    bump_test_form,
    chart_pullback,
    ddc,
    ddc_mass_profile,
    dilate_pullback,
    mass_profile,
    pair,
    pair_in_chart,
    subspace_current,
    test_form_bank as form_bank,
    trace_density,
    zero_current,
)
from pshcurrents.fixtures import FIXTURES, get_fixture
from pshcurrents.lelong import nu_profile

scales = st.builds(
    lambda r, t: r * complex(math.cos(t), math.sin(t)), st.floats(0.2, 2.0), st.floats(0, 2 * math.pi)
)


def close(a, b, tol=3.0, floor=1e-12):
    return abs(a.value - b.value) <= tol * (a.error + b.error) + floor


@pytest.mark.parametrize("n, p", [(2, 1), (3, 1), (3, 2)])
@pytest.mark.parametrize("where", ["annulus", "chart"])
def test_bank_has_five_forms_of_right_degree(n, p, where):
    bank = form_bank(n, p, where)
    assert len(bank) >= 5
    assert all((phi.form.s, phi.form.t) == (p, p) for phi in bank)


def test_bump_support():
    phi = form_bank(2, 1)[0]
    z = np.array([[0.1, 0.0], [0.5, 0.0], [0.0, 1.2j]])
    vals = phi.form(z)
    assert np.all(vals[0] == 0) and np.all(vals[2] == 0) and np.any(vals[1] != 0)


@given(st.floats(-3, 3))
@settings(max_examples=10)
def test_pair_is_linear(c):
    phi = form_bank(2, 1)[1]
    T2, S = get_fixture("T2"), get_fixture("S_rad")
    a, b = pair(T2, phi), pair(S, phi)
    combo = Current(2, 1, T2.components + S.components)
    lin = pair(combo, phi)
    assert abs(lin.value - a.value - b.value) <= 3 * (lin.error + a.error + b.error) + 1e-12
    scaled = bump_test_form(fm.scale_form(fm.beta(n=2), c), (0.0, 0.0), 0.25, 1.0)
    base = bump_test_form(fm.beta(n=2), (0.0, 0.0), 0.25, 1.0)
    x, y = pair(T2, scaled), pair(T2, base)
    assert abs(x.value - c * y.value) <= 3 * (x.error + abs(c) * y.error) + 1e-12


def test_sum_of_currents():
    T = get_fixture("T2") + get_fixture("H")
    prof = nu_profile(T, [0.5, 1.0])
    np.testing.assert_allclose(np.real(prof.values), [1.125, 1.5], atol=1e-6)
    with pytest.raises(ValueError):
        get_fixture("T2") + get_fixture("S3")


@pytest.mark.parametrize("fid", ["H", "T2", "S_rad", "W", "T0", "T1", "P3"])
@given(a=scales)
@settings(max_examples=4)
def test_scaling_identity(fid, a):
    # nu of h_a^* T at r equals nu of T at |a| r
    T = get_fixture(fid)
    lhs = nu_profile(dilate_pullback(T, a), [0.5, 1.0])
    rhs = nu_profile(T, [0.5 * abs(a), abs(a)])
    for k in range(2):
        diff = abs(lhs.values[k] - rhs.values[k])
        assert diff <= 2 * (lhs.errors[k] + rhs.errors[k]) + 1e-9 * max(1.0, abs(rhs.values[k]))


def test_dilatation_composes():
    T = get_fixture("W")
    phi = form_bank(2, 1)[0]
    a, b = 0.5 * np.exp(0.3j), 1.7
    one = pair(dilate_pullback(dilate_pullback(T, a), b), phi)
    two = pair(dilate_pullback(T, a * b), phi)
    assert close(one, two)


def test_conic_fixture_is_dilatation_invariant():
    T = get_fixture("T0")
    for phi in form_bank(2, 1):
        base = pair(T, phi)
        for a in (0.5, 0.3 + 0.4j):
            assert close(pair(dilate_pullback(T, a), phi), base)


def test_atomic_dilatation_moves_point():
    d = dilate_pullback(Current(2, 0, (get_fixture("T0").declared_ddc.components[0],)), 2.0)
    assert d.components[0].point == (0.0, 0.0)


@pytest.mark.parametrize("fid", ["S_rad", "Hprime", "T2prime"])
@pytest.mark.parametrize("a", [0.5, 0.3 - 0.2j])
def test_chart_pairing_agrees_with_dilatation(fid, a):
    T = get_fixture(fid)
    for phi in form_bank(2, 1, "chart")[:3]:
        direct = pair(dilate_pullback(T, a), phi)
        chart = pair_in_chart(chart_pullback(T, a), phi)
        assert abs(direct.value - chart.value) <= 3 * (direct.error + chart.error) + 1e-9


def test_chart_invisible_carrier():
    for fid in ("T1", "T2", "W", "H"):
        with pytest.raises(ChartInvisibleError):
            chart_pullback(get_fixture(fid), 0.5)
    with pytest.raises(ChartInvisibleError):
        chart_pullback(get_fixture("T0").declared_ddc, 0.5)


@pytest.mark.parametrize("fid, sign", [("T2", 1), ("S_rad", 1), ("W", 1), ("T2prime", 1), ("T0", -1), ("T1", -1)])
def test_ddc_sign(fid, sign):
    T = get_fixture(fid)
    prof = ddc_mass_profile(T, None, None, [0.25, 0.5, 1.0])
    assert np.all(sign * np.real(prof.values) >= -3 * prof.errors)
    assert np.any(np.abs(prof.values) > 3 * prof.errors)


def test_closed_fixtures_have_zero_ddc():
    for fid in ("H", "Hprime"):
        prof = ddc_mass_profile(get_fixture(fid), None, None, [0.5, 1.0])
        np.testing.assert_allclose(prof.values, 0.0, atol=1e-12)


def test_finite_difference_ddc_masses():
    # dd^c of |z1|^2 [z2 = 0] is (i/2pi) dz1 ^ dzb1 on the line: mass t^2 in B(t)
    prof = ddc_mass_profile(get_fixture("T2"), None, None, [0.25, 0.5, 1.0])
    np.testing.assert_allclose(np.real(prof.values), [0.0625, 0.25, 1.0], rtol=1e-6)


def test_ddc_of_atom_needs_declaration():
    bare = Current(2, 0, get_fixture("T0").declared_ddc.components)
    with pytest.raises(NonDifferentiableError):
        ddc(bare)


def test_mass_profile_monotone_for_positive_currents():
    for fid in ("T2", "S_rad", "W", "T1", "P3"):
        prof = mass_profile(get_fixture(fid), None, None, [0.1, 0.3, 0.6, 1.0])
        assert np.all(np.diff(np.real(prof.values)) >= 0)


def test_trace_density_of_plane_and_radial_current():
    assert trace_density(get_fixture("H"), np.array([0.3, 0.0])) == pytest.approx(1.0)
    # |z|^2 beta ^ beta = |z|^2 * 2/pi^2 dV
    z = np.array([0.3, 0.4j])
    assert trace_density(get_fixture("S_rad"), z) == pytest.approx(0.25 * 2 / math.pi**2)


def test_zero_current_and_registry():
    Z = zero_current(2, 1)
    assert pair(Z, form_bank(2, 1)[0]).value == 0
    assert set(FIXTURES) >= {"T0", "T1", "T2", "H", "S_rad", "W", "zero"}


def test_subspace_current_orthonormalises_basis():
    with pytest.raises(ValueError):
        subspace_current((0, 0), [(1, 1)], None)
    c = subspace_current((0, 0), [(1,), (1,)], None)
    B = np.asarray(c.basis)
    np.testing.assert_allclose(np.conj(B).T @ B, np.eye(1), atol=1e-14)
    np.testing.assert_allclose(B[:, 0], np.array([1, 1]) / math.sqrt(2), atol=1e-14)


def test_dilatation_family():
    fam = DilatationFamily.geometric(3, 0.5, 1j)
    assert fam.scales == (1j, 0.5j, 0.25j)
    with pytest.raises(ValueError):
        DilatationFamily((1.0, 0.0))
    with pytest.raises(ValueError):
        dilate_pullback(get_fixture("H"), 0)


def test_ambient_component_rejects_wrong_degree():
    with pytest.raises(Exception):
        Current(2, 1, (AmbientSmooth(fm.power(fm.beta(n=2), 2)),))
