import math

import numpy as np
import pytest

from pshcurrents.analysis import (
    adherence_classify,
    alpha_mass_identity,
    blowup_mass,
    calibrate_kappa,
    chart_coefficient_pairing,
    coefficient_mass_estimates,
    cone_experiment,
    conic_check,
    get_kappa,
    interleaving_check,
    jensen_check,
    restriction_identity,
)
from pshcurrents.analysis.blowup import blowup_constants
from pshcurrents.analysis.chart import index_class
from pshcurrents.analysis.jensen import CalibrationError, KappaCalibration, load_calibration, save_calibration
from pshcurrents.currents import DilatationFamily, pair
from pshcurrents.currents import test_form_bank as form_bank
from pshcurrents.fixtures import get_fixture
from pshcurrents.lelong import dini

KAPPA = 2.0
LN2 = math.log(2)


# ---------------------------------------------------------------- Jensen


@pytest.mark.parametrize(
    "fid, r1, r2, lhs, alpha, ddc_raw",
    [
        ("S_rad", 1.0, 2.0, 10.0, 7.5, 1.25),
        ("T2", 1.0, 2.0, 1.5, 0.0, 0.75),
        ("T2", 0.5, 1.0, 0.375, 0.0, 0.1875),
        ("T0", 0.5, 1.0, 0.0, 2 * LN2, -LN2),
        ("H", 0.5, 1.0, 0.0, 0.0, 0.0),
    ],
)
def test_jensen_terms(fid, r1, r2, lhs, alpha, ddc_raw):
    rep = jensen_check(get_fixture(fid), r1, r2, KAPPA)
    assert rep.lhs == pytest.approx(lhs, abs=1e-8)
    assert rep.alpha_term == pytest.approx(alpha, abs=1e-8)
    assert rep.ddc_raw == pytest.approx(ddc_raw, abs=1e-7)
    assert rep.within(3.0)


def test_jensen_literal_coefficient_leaves_residual():
    rep = jensen_check(get_fixture("T2"), 1.0, 2.0, 1.0)
    assert rep.residual == pytest.approx(0.75, abs=1e-7)
    assert not rep.within(3.0)
    assert rep.at_kappa(KAPPA).within(3.0)


@pytest.mark.parametrize("fid", ["H", "T2", "S_rad", "T0", "W", "T2prime"])
@pytest.mark.parametrize("pair_", [(0.5, 1.0), (1.0, 2.0), (0.3, 0.7)])
def test_jensen_residual_at_calibrated_kappa(fid, pair_):
    rep = jensen_check(get_fixture(fid), *pair_)
    assert rep.within(3.0)


def test_jensen_in_c3_with_p2():
    for fid in ("S3", "P3"):
        assert jensen_check(get_fixture(fid), 0.5, 1.0, KAPPA).within(3.0)


def test_jensen_rejects_bad_radii():
    with pytest.raises(ValueError):
        jensen_check(get_fixture("H"), 1.0, 0.5, KAPPA)


def test_kappa_calibration_p1():
    cal = get_kappa(1)
    assert abs(cal.kappa - 2.0) <= 1e-3
    assert cal.error < 1e-3
    assert set(cal.fixtures) == {"T2", "S_rad", "T0"}


def test_kappa_calibration_p2_is_measured_not_2p():
    cal = get_kappa(2)
    assert abs(cal.kappa - 2.0) <= 1e-3
    assert abs(cal.kappa - 4.0) > 1.0


def test_calibration_needs_informative_fixtures():
    with pytest.raises(CalibrationError):
        calibrate_kappa(1, ["H", "Hprime"])
    with pytest.raises(CalibrationError):
        calibrate_kappa(1, ["T2", "S3"])


def test_calibration_artifact_roundtrip(tmp_path):
    cal = KappaCalibration(1, 2.0000000006, 2e-8, ("T2", "S_rad"))
    path = tmp_path / "kappa.txt"
    save_calibration(cal, path)
    back = load_calibration(path)
    assert (back.p, back.kappa, back.error, back.fixtures) == (cal.p, cal.kappa, cal.error, cal.fixtures)
    path.write_text("p = 1\n")
    with pytest.raises(ValueError):
        load_calibration(path)


def test_alpha_mass_identity_on_t0():
    am = alpha_mass_identity(get_fixture("T0"), 0.5, 1.0, KAPPA)
    assert am.alpha_mass == pytest.approx(2 * LN2, abs=1e-8)
    assert am.literal_rhs == pytest.approx(LN2, abs=1e-6)
    assert am.matches(scaled=True)
    assert not am.matches(scaled=False)


def test_alpha_mass_vanishes_for_closed_cone():
    am = alpha_mass_identity(get_fixture("H"), 0.5, 1.0, KAPPA)
    assert abs(am.alpha_mass) < 1e-12


# ---------------------------------------------------------------- cones


def test_cone_t2_converges_to_zero():
    rep = cone_experiment(get_fixture("T2"))
    assert rep.converged
    assert rep.exponent == pytest.approx(2.0, abs=0.2)
    assert np.all(np.abs(rep.limit) <= 3 * rep.limit_error + 1e-9)


def test_cone_w_limit_is_h():
    forms = form_bank(2, 1)
    rep = cone_experiment(get_fixture("W"), test_forms=forms)
    assert rep.converged
    H = get_fixture("H")
    for j, phi in enumerate(forms):
        ref = pair(H, phi)
        assert abs(rep.limit[j] - ref.value) <= 2 * (rep.limit_error[j] + ref.error) + 1e-12


def test_cone_s_rad_decays_quartically():
    rep = cone_experiment(get_fixture("S_rad"))
    assert rep.converged
    assert rep.exponent == pytest.approx(4.0, abs=0.2)


def test_cone_t0_is_constant_and_flagged():
    rep = cone_experiment(get_fixture("T0"), DilatationFamily.geometric(4, 0.5))
    assert rep.converged
    assert not rep.hypotheses["condition_C"].finite
    assert "condition_C" in rep.note


def test_cone_refuses_t1():
    rep = cone_experiment(get_fixture("T1"))
    assert rep.refused and rep.verdict == "inconclusive"
    assert rep.limit is None
    assert list(rep.rows()) == []


@pytest.mark.parametrize("fid", ["T2", "W", "S_rad", "H", "zero", "T2prime"])
def test_finite_dini_implies_convergence(fid):
    T = get_fixture(fid)
    assert dini(T).finite
    assert cone_experiment(T, check_hypotheses=False).converged


def test_interleaving_merges_on_w():
    rep = interleaving_check(get_fixture("W"))
    assert rep.ok
    assert rep.ratio_bounds[0] < math.inf and rep.ratio_bounds[1] < math.inf


def test_interleaving_length_mismatch():
    with pytest.raises(ValueError):
        interleaving_check(get_fixture("W"), DilatationFamily.geometric(3), DilatationFamily.geometric(4))


@pytest.mark.parametrize("fid, conic", [("H", True), ("T0", True), ("zero", True), ("T2", False), ("W", False)])
def test_conic_check(fid, conic):
    assert conic_check(get_fixture(fid), kappa=KAPPA).conic is conic


@pytest.mark.parametrize(
    "fid, label",
    [("H", "conic pluriharmonic"), ("zero", "conic pluriharmonic"), ("T0", "conic with dd^c mass at 0"),
     ("T2", "not conic")],
)
def test_adherence_classification(fid, label):
    rep = adherence_classify(get_fixture(fid), kappa=KAPPA)
    assert rep.classification == label
    assert rep.violates_condition_C is (fid == "T0")


def test_conic_t0_uses_log_law():
    rep = conic_check(get_fixture("T0"), kappa=KAPPA)
    assert rep.alpha_law == "log" and rep.alpha_consistent


# ---------------------------------------------------------------- chart masses


def test_index_class():
    assert index_class(2, (1,), (1,)) == 1
    assert index_class(2, (2,), (2,)) == 2
    assert index_class(2, (1,), (2,)) == 3


def test_chart_masses_of_closed_line():
    out = coefficient_mass_estimates(get_fixture("Hprime"), [0.5, 0.25])
    for m in out:
        # the annulus 1/2 < |t| < 1 in the line coordinate
        assert m.masses[1].value == pytest.approx(0.75 * math.pi, rel=1e-9)
        assert m.masses[2].value == 0 and m.masses[3].value == 0


def test_chart_masses_decay_like_gamma():
    out = coefficient_mass_estimates(get_fixture("T2prime"), [0.5, 0.25, 0.125])
    f = [float(np.real(m.masses[1].value)) for m in out]
    assert f[1] / f[0] == pytest.approx(0.25, rel=1e-3)
    assert f[2] / f[1] == pytest.approx(0.25, rel=1e-3)


def test_chart_masses_depend_on_modulus_only():
    a, b = coefficient_mass_estimates(get_fixture("S_rad"), [0.5, 0.5j])
    for cls in (1, 2, 3):
        x, y = a.masses[cls], b.masses[cls]
        assert abs(x.value - y.value) <= 3 * (x.error + y.error) + 1e-12
    # class 2 bounded by a multiple of gamma along the sequence
    c = coefficient_mass_estimates(get_fixture("S_rad"), [0.25])[0]
    assert c.ratio(2) == pytest.approx(a.ratio(2), rel=1e-2)


def test_chart_pairing_rejects_last_index():
    with pytest.raises(ValueError):
        chart_coefficient_pairing(get_fixture("Hprime"), (2,), (1,), 0.5)
    val = chart_coefficient_pairing(get_fixture("Hprime"), (1,), (1,), 0.5)
    assert val.value > 0


# ---------------------------------------------------------------- blow-up and restriction


def test_blowup_constants():
    assert blowup_constants(1, 0.5) == pytest.approx((0.25, 0.125))
    assert blowup_constants(2, 1.0) == pytest.approx((3.0, 1.25))


@pytest.mark.parametrize(
    "fid, r, mass, bound",
    [("H", 0.5, 0.25, 0.25), ("H", 1.0, 1.0, 1.0), ("T2", 0.5, 0.03125, 0.15625), ("T2", 1.0, 0.5, 1.0),
     ("W", 1.0, 1.5, 2.0)],
)
def test_blowup_mass_and_bound(fid, r, mass, bound):
    rep = blowup_mass(get_fixture(fid), r, kappa=KAPPA)
    assert rep.bounded
    assert rep.mass == pytest.approx(mass, abs=1e-6)
    assert rep.bound == pytest.approx(bound, abs=1e-6)
    assert rep.respected


def test_blowup_bound_on_all_finite_fixtures():
    for fid in ("S_rad", "zero", "T2prime", "S3"):
        rep = blowup_mass(get_fixture(fid), 1.0, kappa=KAPPA)
        if rep.bounded and math.isfinite(rep.bound):
            assert rep.respected, fid


def test_blowup_unbounded_for_t0_and_no_bound_for_t1():
    assert not blowup_mass(get_fixture("T0"), 1.0, kappa=KAPPA).bounded
    t1 = blowup_mass(get_fixture("T1"), 1.0, kappa=KAPPA)
    assert t1.bound_kind == "no Lelong number" and not t1.respected


@pytest.mark.parametrize(
    "fid, k, value",
    [("H", 1, 0.5), ("T2", 1, 0.125), ("W", 1, 0.625), ("Hprime", 2, 0.5), ("T2prime", 2, 0.125), ("S_rad", 1, 0.75)],
)
def test_restriction_identity(fid, k, value):
    rep = restriction_identity(get_fixture(fid), k)
    assert rep.lhs == pytest.approx(value, abs=1e-6)
    assert rep.rhs == pytest.approx(value, abs=1e-6)
    assert rep.agree
    # truncations: lhs_u >= rhs_u, both increasing as u decreases
    lu = [t[1] for t in rep.truncations]
    ru = [t[3] for t in rep.truncations]
    assert all(a >= b - 1e-12 for a, b in zip(lu, ru))
    assert np.all(np.diff(lu) >= -1e-12) and np.all(np.diff(ru) >= -1e-12)


def test_restriction_flags_carrier_in_hyperplane():
    rep = restriction_identity(get_fixture("H"), 2)
    assert rep.lhs == 0 and rep.rhs == 0
    assert rep.flagged == (0,)
    with pytest.raises(ValueError):
        restriction_identity(get_fixture("H"), 3)
