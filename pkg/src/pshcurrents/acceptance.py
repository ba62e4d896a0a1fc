"""The acceptance batch: closed-form reproductions, verdict checks and determinism.

Each criterion returns a list of :class:`Check` rows.  The CSV rendering of a
run contains no timing information, so two runs with the same seed produce
identical bytes; wall times are reported separately in the text summary.
"""
from __future__ import annotations

import io
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import forms as fm
from .currents import DilatationFamily, pair, test_form_bank
from .fixtures import get_fixture
from .lelong import condition_C, dini, nu_profile
from .quadrature import Ball, integrate
from .analysis import (
    blowup_mass,
    calibrate_kappa,
    cone_experiment,
    interleaving_check,
    jensen_check,
    restriction_identity,
)

__all__ = ["Check", "CriterionResult", "CRITERIA", "PROFILES", "run_criterion", "run_suite", "suite_csv"]

PROFILES = {"quick": 100_000, "full": 1_000_000}
CSV_HEADER = "criterion,check,value,error,expected,tolerance,status"


@dataclass
class Check:
    name: str
    value: float
    error: float
    expected: str
    tolerance: float
    passed: bool
    flagged: bool = False  # a known, documented discrepancy rather than a numerical failure
    converged: bool = True

    @property
    def status(self) -> str:
        if self.passed:
            return "pass"
        if self.flagged:
            return "flag"
        return "fail" if self.converged else "nonconverged"


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list
    seconds: float
    limit: float  # runtime budget in seconds
    notes: list = field(default_factory=list)

    @property
    def in_time(self) -> bool:
        return self.seconds < self.limit

    @property
    def passed(self) -> bool:
        return all(c.passed or c.flagged for c in self.checks) and self.in_time

    @property
    def exit_code(self) -> int:
        if any(c.status == "fail" for c in self.checks) or not self.in_time:
            return 1
        if any(c.status == "nonconverged" for c in self.checks):
            return 3
        return 0

    def line(self) -> str:
        n_ok = sum(c.passed for c in self.checks)
        n_flag = sum(c.flagged and not c.passed for c in self.checks)
        flag = f", {n_flag} flagged" if n_flag else ""
        word = "PASS" if self.passed else "FAIL"
        return (
            f"[{word}] criterion {self.number}: {self.title} "
            f"({n_ok}/{len(self.checks)} checks{flag}; {self.seconds:.1f} s of {self.limit:.0f} s)"
        )


@dataclass
class Context:
    seed: int = 0
    budget: int = PROFILES["full"]
    tol: float = 1e-3
    kappa_mode: str = "calibrated"  # or "paper"

    @property
    def kw(self):
        return {"tol": self.tol, "seed": self.seed, "budget": self.budget}


def _close(name, res_value, res_error, expected, tol, rel=False, converged=True, flagged=False) -> Check:
    v = float(np.real(res_value))
    bound = tol * max(1.0, abs(expected)) if rel else tol
    return Check(name, v, float(res_error), f"{expected:.17g}", bound, abs(v - expected) <= bound, flagged, converged)


def _verdict(name, report, expected: str) -> Check:
    return Check(
        name, float(report.value) if report.verdict == "finite" else math.copysign(math.inf, report.sign or 1),
        float(report.error), expected, 0.0, report.verdict == expected,
    )


# ----------------------------------------------------------------------------


def c1_normalization(ctx: Context) -> list[Check]:
    out = []
    for n in (1, 2, 3):
        B = fm.power(fm.beta(n=n), n)
        dens = lambda z, B=B: fm.top_density(B, z)
        for r in (0.5, 1.0, 2.0):
            res = integrate(dens, Ball((0.0,) * n, r), **ctx.kw)
            exact = r ** (2 * n)
            ok = abs(float(np.real(res.value)) - exact) <= 1e-3 * exact
            out.append(Check(f"beta^{n} over B({r:g})", float(np.real(res.value)), res.error,
                             f"{exact:.17g}", 1e-3 * exact, ok, converged=res.converged))
    return out


def c2_nu_profiles(ctx: Context) -> list[Check]:
    out = []
    grid = (0.25, 0.5, 1.0)
    H = nu_profile(get_fixture("H"), grid, **ctx.kw)
    for r, v, e in H.rows():
        out.append(_close(f"nu_H({r:g})", v, e, 1.0, 1e-3, converged=H.converged))
    T2 = nu_profile(get_fixture("T2"), grid, **ctx.kw)
    for r, v, e in T2.rows():
        out.append(_close(f"nu_T2({r:g})", v, e, r * r / 2, 1e-3, converged=T2.converged))
    T1 = nu_profile(get_fixture("T1"), (0.1, 0.3, 1.0), **ctx.kw)
    for r, v, e in T1.rows():
        out.append(_close(f"nu_T1({r:g})", v, e, 1 - 2 * math.log(r), 1e-3, converged=T1.converged))
    T0 = nu_profile(get_fixture("T0"), grid, **ctx.kw)
    vals = np.real(T0.values)
    spread = float(np.max(vals) - np.min(vals))
    out.append(Check("nu_T0 spread over grid", spread, float(np.max(T0.errors)), "0", 1e-3, spread < 1e-3,
                     converged=T0.converged))
    # the constant itself under the i/(2 pi) d dbar convention
    out.append(_close("nu_T0 constant", vals[-1], T0.errors[-1], 1.0, 1e-3, converged=T0.converged))
    return out


def c3_jensen(ctx: Context) -> list[Check]:
    cal = calibrate_kappa(1, **ctx.kw)
    out = [Check("kappa(1) calibration", cal.kappa, cal.error, "2", 0.01, abs(cal.kappa - 2) <= 0.01)]
    literal = ctx.kappa_mode == "paper"
    kappa = 1.0 if literal else cal.kappa
    reports = {}
    for fid in ("H", "T2", "S_rad", "T0"):
        for r1, r2 in ((0.5, 1.0), (1.0, 2.0)):
            rep = jensen_check(get_fixture(fid), r1, r2, kappa, kappa_error=0.0 if literal else cal.error, **ctx.kw)
            reports[fid, r1, r2] = rep
            ok = rep.within(3.0)
            out.append(Check(
                f"jensen residual {fid} ({r1:g},{r2:g}) kappa={kappa:.6g}", rep.residual, rep.error, "0",
                3 * rep.error, ok, flagged=literal and not ok,
            ))
    S = reports["S_rad", 1.0, 2.0]
    T2 = reports["T2", 1.0, 2.0]
    T0 = reports["T0", 0.5, 1.0]
    out += [
        _close("S_rad (1,2) lhs", S.lhs, S.lhs_error, 10.0, 1e-3, rel=True),
        _close("S_rad (1,2) alpha term", S.alpha_term, S.alpha_error, 7.5, 1e-3, rel=True),
        _close("S_rad (1,2) scaled dd^c terms", S.ddc_scaled, S.kappa * S.ddc_error, 2.5, 1e-3, rel=True,
               flagged=literal),
        _close("T2 (1,2) lhs", T2.lhs, T2.lhs_error, 1.5, 1e-3, rel=True),
        _close("T2 (1,2) scaled dd^c terms", T2.ddc_scaled, T2.kappa * T2.ddc_error, 1.5, 1e-3, rel=True,
               flagged=literal),
        _close("T2 (1,2) alpha term", T2.alpha_term, T2.alpha_error, 0.0, 1e-3),
        _close("T0 (0.5,1) alpha term", T0.alpha_term, T0.alpha_error, 2 * math.log(2), 1e-3, rel=True),
    ]
    return out


def c4_conditions(ctx: Context) -> list[Check]:
    T2, T1, T0 = get_fixture("T2"), get_fixture("T1"), get_fixture("T0")
    d2 = dini(T2, 1.0, **ctx.kw)
    c2 = condition_C(T2, None, 1.0, **ctx.kw)
    return [
        _close("dini(T2, 1)", d2.value, d2.error, 0.25, 1e-3) if d2.finite else _verdict("dini(T2, 1)", d2, "finite"),
        _close("condition_C(T2, 1)", c2.value, c2.error, 0.5, 1e-3) if c2.finite
        else _verdict("condition_C(T2, 1)", c2, "finite"),
        _verdict("condition_C(T0, 1) verdict", condition_C(T0, None, 1.0, **ctx.kw), "divergent"),
        _verdict("dini(T1, 1) verdict", dini(T1, 1.0, **ctx.kw), "divergent"),
    ]


def c5_cones(ctx: Context) -> list[Check]:
    out = []
    fam = DilatationFamily.geometric(7, 0.5)
    rep = cone_experiment(get_fixture("T2"), fam, **ctx.kw)
    out.append(Check("cone T2 verdict", rep.exponent, 0.0, "converged", 0.0, rep.converged))
    lim = np.abs(rep.limit) if rep.limit is not None else np.array([math.inf])
    lerr = rep.limit_error if rep.limit_error is not None else np.array([0.0])
    out.append(Check("cone T2 limit |max|", float(np.max(lim)), float(np.max(lerr)), "0", float(3 * np.max(lerr) + 1e-9),
                     bool(np.all(lim <= 3 * lerr + 1e-9))))
    out.append(_close("cone T2 decay exponent", rep.exponent, 0.0, 2.0, 0.2))

    forms = test_form_bank(2, 1)
    W = cone_experiment(get_fixture("W"), fam, forms, **ctx.kw)
    out.append(Check("cone W verdict", W.exponent, 0.0, "converged", 0.0, W.converged))
    H = get_fixture("H")
    worst, ok = 0.0, W.converged
    for j, phi in enumerate(forms):
        ref = pair(H, phi, **ctx.kw)
        if W.limit is None:
            ok = False
            break
        dev = abs(W.limit[j] - ref.value)
        worst = max(worst, dev)
        ok = ok and dev <= 2 * (W.limit_error[j] + ref.error) + 1e-12
    out.append(Check("cone W limit vs pair(H)", worst, float(np.max(W.limit_error)) if W.limit is not None else math.inf,
                     "0", 0.0, ok))

    T0 = cone_experiment(get_fixture("T0"), DilatationFamily.geometric(4, 0.5), forms, **ctx.kw)
    spread = float(np.max(np.abs(T0.pairings - T0.pairings[0]))) if T0.pairings.size else math.inf
    floor = float(np.max(3 * (T0.errors + T0.errors[0]))) + 1e-12
    out.append(Check("cone T0 pairing spread", spread, float(np.max(T0.errors)), "0", floor, spread <= floor))
    T1 = cone_experiment(get_fixture("T1"), fam, forms, **ctx.kw)
    out.append(Check("cone T1 refused", float(T1.refused), 0.0, "refused", 0.0, T1.refused or T1.verdict == "inconclusive"))
    il = interleaving_check(get_fixture("W"), fam, None, forms, **ctx.kw)
    out.append(Check("interleaving W", il.exponent, float(np.max(il.errors)), "merged", 0.0, il.ok))
    return out


def c6_demailly(ctx: Context) -> list[Check]:
    rng = np.random.default_rng(ctx.seed)
    violations = 0
    count = 1000
    for _ in range(count):
        n = int(rng.integers(2, 5))
        q = int(rng.integers(1, n))
        S = fm.random_positive_form(n, q, rng)
        lam = rng.uniform(0.1, 10.0, size=n)
        violations += fm.demailly_check(S, lam, np.zeros(n)).violations
    return [Check(f"Demailly violations over {count} forms", float(violations), 0.0, "0", 0.0, violations == 0)]


def c7_restriction(ctx: Context) -> list[Check]:
    out = []
    for fid, target in (("H", 0.5), ("T2", 0.125)):
        rep = restriction_identity(get_fixture(fid), 1, **ctx.kw)
        out.append(_close(f"restriction {fid} k=1 lhs", rep.lhs, rep.lhs_error, target, 1e-3))
        out.append(_close(f"restriction {fid} k=1 rhs", rep.rhs, rep.rhs_error, target, 1e-3))
    return out


def c8_blowup(ctx: Context) -> list[Check]:
    out = []
    for fid in ("H", "T2"):
        for r in (0.5, 1.0):
            rep = blowup_mass(get_fixture(fid), r, **ctx.kw)
            finite = rep.bounded and math.isfinite(rep.bound) and math.isfinite(rep.mass)
            out.append(Check(f"blow-up mass {fid} r={r:g}", rep.mass, rep.mass_error, f"<= {rep.bound:.17g}",
                             3 * (rep.mass_error + rep.bound_error), finite and rep.respected))
    return out


CRITERIA: dict[int, tuple[str, Callable, float]] = {
    1: ("normalization of beta^n", c1_normalization, 30),
    2: ("nu profiles", c2_nu_profiles, 60),
    3: ("Lelong-Jensen oracle", c3_jensen, 60),
    4: ("condition integrals", c4_conditions, 60),
    5: ("tangent cones", c5_cones, 120),
    6: ("Demailly fuzz", c6_demailly, 10),
    7: ("restriction identity", c7_restriction, 30),
    8: ("blow-up mass", c8_blowup, 60),
}
DETERMINISM = 9
TOTAL_BUDGET = 360.0


def run_criterion(number: int, ctx: Context) -> CriterionResult:
    title, fn, limit = CRITERIA[number]
    t = time.perf_counter()
    checks = fn(ctx)
    return CriterionResult(number, title, checks, time.perf_counter() - t, limit)


def suite_csv(results) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for res in results:
        for c in res.checks:
            name = c.name.replace(",", ";")
            expected = c.expected.replace(",", ";")
            buf.write(f"{res.number},{name},{c.value:.17g},{c.error:.17g},{expected},{c.tolerance:.17g},{c.status}\n")
    return buf.getvalue()


def run_suite(ctx: Context, criteria=None, determinism: bool = True):
    """Run the batch.  With ``determinism`` the numerical criteria run a second
    time and criterion 9 compares the two CSV renderings byte for byte."""
    numbers = sorted(CRITERIA) if criteria is None else sorted(criteria)
    results = [run_criterion(k, ctx) for k in numbers]
    csv = suite_csv(results)
    if determinism:
        t = time.perf_counter()
        again = suite_csv([run_criterion(k, ctx) for k in numbers])
        same = again == csv
        results.append(CriterionResult(
            DETERMINISM, "determinism", [Check("identical CSV bytes on rerun", float(same), 0.0, "1", 0.0, same)],
            time.perf_counter() - t, TOTAL_BUDGET,
        ))
        csv = suite_csv(results)
    return results, csv
