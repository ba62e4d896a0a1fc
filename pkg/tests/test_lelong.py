import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pshcurrents.fixtures import get_fixture
from pshcurrents.lelong import (
    DivergentIntegralError,
    condition_C,
    dini,
    gammas,
    lambda_profile,
    lelong_number,
    nu,
    nu_profile,
    psi_criterion,
    write_profile_csv,
)

KAPPA = 2.0

NU_CLOSED_FORMS = {
    "H": lambda r: 1.0,
    "T2": lambda r: r * r / 2,
    "T1": lambda r: 1 - 2 * math.log(r),
    "T0": lambda r: 1.0,
    "S_rad": lambda r: 2 * r**4 / 3,
    "W": lambda r: 1 + r * r / 2,
    "S3": lambda r: 0.75 * r**4,
    "P3": lambda r: r * r / 3,
    "zero": lambda r: 0.0,
}


@pytest.mark.parametrize("fid", sorted(NU_CLOSED_FORMS))
def test_nu_closed_forms(fid):
    grid = (0.1, 0.25, 0.5, 1.0, 2.0)
    prof = nu_profile(get_fixture(fid), grid)
    expected = np.array([NU_CLOSED_FORMS[fid](r) for r in grid])
    assert prof.converged
    np.testing.assert_allclose(np.real(prof.values), expected, rtol=1e-6, atol=1e-9)
    assert np.all(np.abs(prof.values - expected) <= 3 * prof.errors + 1e-9 * np.maximum(1, np.abs(expected)))


def test_t1_closed_form_values():
    prof = nu_profile(get_fixture("T1"), (0.1, 0.3, 1.0))
    np.testing.assert_allclose(np.real(prof.values), [5.605170185988091, 3.4079456086518722, 1.0], atol=1e-6)


@pytest.mark.parametrize(
    "fid, expected",
    [("T2", lambda t: t * t), ("S_rad", lambda t: t**4), ("P3", lambda t: t * t / 2), ("H", lambda t: 0.0)],
)
def test_nu_ddc_closed_forms(fid, expected):
    grid = (0.25, 0.5, 1.0)
    prof = nu_profile(get_fixture(fid), grid, which="ddc")
    np.testing.assert_allclose(np.real(prof.values), [expected(t) for t in grid], rtol=1e-5, atol=1e-9)


def test_nu_off_centre():
    H = nu(get_fixture("H"), (0.5, 0.0), 0.3)
    assert H.value == pytest.approx(1.0, abs=1e-9)
    T2 = nu(get_fixture("T2"), (0.0, 0.5), 0.3)
    assert T2.value == 0


@given(st.integers(0, 1000))
@settings(max_examples=5)
def test_nu_is_seed_stable(seed):
    a = nu_profile(get_fixture("S_rad"), (0.5, 1.0), seed=seed)
    b = nu_profile(get_fixture("S_rad"), (0.5, 1.0), seed=seed)
    assert np.array_equal(a.values, b.values)
    np.testing.assert_allclose(np.real(a.values), [2 / 3 * 0.0625, 2 / 3], rtol=1e-6)


def test_bad_profile_kind():
    with pytest.raises(ValueError):
        nu_profile(get_fixture("H"), (1.0,), which="nope")


@pytest.mark.parametrize("fid, value", [("T2", 0.0), ("H", 1.0), ("T0", 1.0), ("W", 1.0), ("zero", 0.0), ("S_rad", 0.0)])
def test_lelong_numbers(fid, value):
    res = lelong_number(get_fixture(fid))
    assert res.exists
    assert abs(res.value - value) <= max(3 * res.error, 1e-6)


def test_lelong_number_of_t1_diverges_logarithmically():
    res = lelong_number(get_fixture("T1"))
    assert res.verdict == "divergent"
    assert res.slope == pytest.approx(-2.0, rel=1e-4)


def test_lelong_number_off_carrier_is_zero():
    res = lelong_number(get_fixture("H"), (0.0, 0.5))
    assert res.exists and res.value == 0


def test_lelong_grid_validation():
    with pytest.raises(ValueError):
        lelong_number(get_fixture("H"), grid=(0.1, 0.5, 1.0))


def test_condition_integrals_closed_forms():
    d = dini(get_fixture("T2"), 1.0)
    c = condition_C(get_fixture("T2"), None, 1.0)
    assert d.finite and d.value == pytest.approx(0.25, abs=1e-6)
    assert c.finite and c.value == pytest.approx(0.5, abs=1e-6)
    # nu_T2(r) - 0 = r^2/2 so the dini integral to r0 is r0^2/4
    assert dini(get_fixture("T2"), 0.5).value == pytest.approx(0.0625, abs=1e-6)


def test_condition_verdicts():
    assert condition_C(get_fixture("T0")).verdict == "divergent"
    assert condition_C(get_fixture("T0")).sign < 0
    assert condition_C(get_fixture("T1")).verdict == "divergent"
    assert dini(get_fixture("T1")).verdict == "divergent"
    for fid in ("H", "T0", "zero"):
        rep = dini(get_fixture(fid))
        assert rep.finite and abs(rep.value) <= 1e-6
    assert "divergent" in condition_C(get_fixture("T0")).summary()


def test_psi_criterion_closed_form():
    # g = 9 r^2 / 8 for T2, so int r |log r| psi = (9/8 + sqrt(9/8)) / 4
    rep = psi_criterion(get_fixture("T2"))
    assert rep.finite
    assert rep.value == pytest.approx((9 / 8 + math.sqrt(9 / 8)) / 4, abs=1e-5)


def test_gammas_closed_form():
    gT, gD = gammas(get_fixture("T2"), 0.8)
    assert gT.value == pytest.approx(3 * 0.64 / 8, rel=1e-6)
    assert gD.value == pytest.approx(3 * 0.64 / 4, rel=1e-6)


@pytest.mark.parametrize(
    "fid, expected",
    [("T2", lambda r: 0.0), ("W", lambda r: 1.0), ("S_rad", lambda r: r**4 / 2), ("H", lambda r: 1.0)],
)
def test_lambda_closed_forms(fid, expected):
    grid = (0.25, 0.5, 1.0)
    prof = lambda_profile(get_fixture(fid), grid, kappa=KAPPA)
    np.testing.assert_allclose(prof.values, [expected(r) for r in grid], atol=1e-6)


def test_lambda_with_literal_coefficient():
    # kappa = 1 leaves r^2/2 - r^2/4 for T2
    prof = lambda_profile(get_fixture("T2"), (0.5, 1.0), kappa=1.0)
    np.testing.assert_allclose(prof.values, [0.0625, 0.25], atol=1e-6)


def test_lambda_refuses_divergent_inner_integral():
    with pytest.raises(DivergentIntegralError):
        lambda_profile(get_fixture("T0"), (0.5, 1.0), kappa=KAPPA)


def test_profile_csv():
    prof = nu_profile(get_fixture("T2"), (0.5, 1.0))
    buf = io.StringIO()
    write_profile_csv(prof, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "r,value,error"
    assert lines[2].startswith("1,0.5")
    assert len(lines[1].split(",")) == 3
