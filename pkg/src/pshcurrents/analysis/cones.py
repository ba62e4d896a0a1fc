"""Tangent-cone experiments: dilatation limits, conic signatures and adherence values."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..currents import Current, DilatationFamily, TestForm, dilate_pullback, pair, test_form_bank
from ..lelong import condition_C, dini, nu_profile
from ..quadrature import DEFAULT_BUDGET, DEFAULT_TOL
from .jensen import alpha_mass_identity, get_kappa

__all__ = [
    "ConvergenceReport",
    "cone_experiment",
    "InterleavingReport",
    "interleaving_check",
    "ConicReport",
    "conic_check",
    "adherence_classify",
]

DEFAULT_FAMILY = DilatationFamily.geometric(7, 0.5)


@dataclass
class ConvergenceReport:
    scales: tuple
    labels: tuple
    pairings: np.ndarray  # (scales, forms)
    errors: np.ndarray
    differences: np.ndarray  # (scales - 1, forms)
    verdict: str  # "converged", "diverged" or "inconclusive"
    exponent: float = math.nan
    limit: np.ndarray | None = None
    limit_error: np.ndarray | None = None
    refused: bool = False
    hypotheses: dict = field(default_factory=dict)
    note: str = ""

    @property
    def converged(self) -> bool:
        return self.verdict == "converged"

    def rows(self):
        for k, a in enumerate(self.scales[: self.pairings.shape[0]]):
            for j, lab in enumerate(self.labels):
                yield complex(a), lab, complex(self.pairings[k, j]), float(self.errors[k, j])


def _pairings(T, scales, forms, tol, seed, budget):
    P = np.zeros((len(scales), len(forms)), dtype=complex)
    E = np.zeros_like(P, dtype=float)
    for k, a in enumerate(scales):
        Ta = dilate_pullback(T, a) if a != 1 else T
        for j, phi in enumerate(forms):
            res = pair(Ta, phi, tol=tol, seed=seed, budget=budget)
            P[k, j], E[k, j] = res.value, res.error
    return P, E


def _noise(E, P, tol):
    # differences at this level cannot be distinguished from zero
    return 3 * (E[1:] + E[:-1]) + 1e-12 * np.maximum(np.abs(P[1:]), np.abs(P[:-1]))


def _decay(scales, D, floor):
    """Fitted exponent e with |differences| ~ |a|^e over the significant entries."""
    la = np.log(np.abs(np.asarray(scales[1:])))
    es = []
    for j in range(D.shape[1]):
        d = np.abs(D[:, j])
        ok = d > floor[:, j]
        if np.count_nonzero(ok) >= 2:
            es.append(np.polyfit(la[ok], np.log(d[ok]), 1)[0])
    if not es:
        return math.inf
    return float(np.min(es))


def _analyse(scales, P, E):
    D = P[1:] - P[:-1]
    floor = _noise(E, P, 0)
    exponent = _decay(scales, D, floor)
    mag = np.where(np.abs(D) > floor, np.abs(D), 0.0)
    worst = np.max(mag, axis=1)
    tail = worst[-3:]
    decreasing = bool(np.all(np.diff(tail) <= 0)) and (tail[-1] < tail[0] or tail[0] == 0)
    if np.all(worst == 0):
        return D, "converged", math.inf, P[-1], E[-1]
    if decreasing and exponent > 0.5:
        q = abs(scales[-1] / scales[-2])
        rho = q**exponent
        rest = D[-1] * rho / (1 - rho)
        return D, "converged", exponent, P[-1] + rest, E[-1] + 0.5 * np.abs(rest)
    if exponent < 0 and not decreasing:
        return D, "diverged", exponent, None, None
    return D, "inconclusive", exponent, None, None


def cone_experiment(
    T: Current,
    family: DilatationFamily | None = None,
    test_forms: list[TestForm] | None = None,
    *,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    check_hypotheses: bool = True,
) -> ConvergenceReport:
    """Pairings of ``h_{a_k}^* T`` with a bank of test forms, with a Cauchy verdict.

    When the Lelong function has no limit at 0 the experiment is refused:
    no pairings are computed and the verdict is inconclusive.
    """
    family = DEFAULT_FAMILY if family is None else family
    forms = test_form_bank(T.n, T.p) if test_forms is None else list(test_forms)
    hyp = {}
    if check_hypotheses:
        d = dini(T, 1.0, tol=tol, seed=seed, budget=budget)
        hyp["dini"] = d
        if T.sign_class == "plurisuperharmonic":
            hyp["condition_C"] = condition_C(T, None, 1.0, tol=tol, seed=seed, budget=budget)
        if not d.finite:
            return ConvergenceReport(
                family.scales, tuple(f.label for f in forms), np.zeros((0, len(forms))), np.zeros((0, len(forms))),
                np.zeros((0, len(forms))), "inconclusive", refused=True, hypotheses=hyp,
                note=f"dini integral is {d.verdict}; tangent cone hypotheses fail",
            )
    P, E = _pairings(T, family.scales, forms, tol, seed, budget)
    D, verdict, ex, lim, lim_err = _analyse(family.scales, P, E)
    note = ""
    if hyp and not all(r.finite for r in hyp.values()):
        note = "hypotheses not all satisfied: " + ", ".join(k for k, r in hyp.items() if not r.finite)
    return ConvergenceReport(
        family.scales, tuple(f.label for f in forms), P, E, D, verdict, ex, lim, lim_err, False, hyp, note
    )


@dataclass
class InterleavingReport:
    a: tuple
    b: tuple
    differences: np.ndarray  # (k, forms): pair(h_a T) - pair(h_b T)
    errors: np.ndarray
    ratio_bounds: tuple
    ok: bool
    exponent: float = math.nan


def interleaving_check(
    T: Current,
    a: DilatationFamily | None = None,
    b: DilatationFamily | None = None,
    test_forms=None,
    *,
    tol=DEFAULT_TOL,
    seed=0,
    budget=DEFAULT_BUDGET,
) -> InterleavingReport:
    """Two scale sequences with ``|a_k/b_k|`` and ``|b_k/a_k|`` bounded: pairings must merge."""
    a = DEFAULT_FAMILY if a is None else a
    b = DilatationFamily(tuple(1.5 * np.exp(0.7j) * x for x in a.scales)) if b is None else b
    if len(a.scales) != len(b.scales):
        raise ValueError("scale sequences must have equal length")
    ratios = np.abs(np.asarray(a.scales) / np.asarray(b.scales))
    bounds = (float(np.max(ratios)), float(np.max(1 / ratios)))
    forms = test_form_bank(T.n, T.p) if test_forms is None else list(test_forms)
    Pa, Ea = _pairings(T, a.scales, forms, tol, seed, budget)
    Pb, Eb = _pairings(T, b.scales, forms, tol, seed, budget)
    diff = Pa - Pb
    err = Ea + Eb
    floor = 3 * err + 1e-12 * np.abs(Pa)
    mag = np.max(np.where(np.abs(diff) > floor, np.abs(diff), 0.0), axis=1)
    tail = mag[-3:]
    exponent = _decay((1.0,) + tuple(a.scales), diff, floor)
    # same rule as the Cauchy verdict: shrinking tail and a genuine power decay
    ok = bool(np.all(mag == 0)) or (bool(np.all(np.diff(tail) <= 0)) and tail[-1] < tail[0] and exponent > 0.5)
    ok = ok and math.isfinite(bounds[0]) and math.isfinite(bounds[1])
    return InterleavingReport(a.scales, b.scales, diff, err, bounds, ok, exponent)


@dataclass
class ConicReport:
    invariant: bool
    nu_constant: bool
    nu_ddc_constant: bool
    pluriharmonic: bool
    alpha_consistent: bool
    alpha_law: str  # "zero" or "log"
    details: dict = field(default_factory=dict)

    @property
    def conic(self) -> bool:
        return self.invariant and self.nu_constant and self.nu_ddc_constant and self.alpha_consistent


DEFAULT_A_SAMPLES = (0.5, 2.0, 0.3 + 0.4j, np.exp(2.0j), 0.25j)
CONIC_GRID = (0.25, 0.5, 1.0)


def _constant(prof, tol):
    v = np.real(prof.values)
    spread = float(np.max(v) - np.min(v))
    return spread <= 3 * float(np.max(prof.errors)) + tol * max(1.0, float(np.max(np.abs(v)))), spread


def conic_check(
    T: Current,
    a_samples=DEFAULT_A_SAMPLES,
    test_forms=None,
    *,
    kappa: float | None = None,
    grid=CONIC_GRID,
    tol=DEFAULT_TOL,
    seed=0,
    budget=DEFAULT_BUDGET,
) -> ConicReport:
    """Invariance of pairings under sampled dilatations, constancy of both Lelong
    functions, and the annulus alpha-mass law (zero exactly when dd^c carries no
    mass at 0)."""
    forms = test_form_bank(T.n, T.p) if test_forms is None else list(test_forms)
    base, base_e = _pairings(T, [1.0], forms, tol, seed, budget)
    inv = True
    worst = 0.0
    for a in a_samples:
        P, E = _pairings(T, [a], forms, tol, seed, budget)
        dev = np.abs(P - base)
        worst = max(worst, float(np.max(dev)))
        inv = inv and bool(np.all(dev <= 3 * (E + base_e) + tol * np.maximum(np.abs(base), 1e-12) + 1e-13))
    nuT = nu_profile(T, grid, tol=tol, seed=seed, budget=budget)
    c1, s1 = _constant(nuT, tol)
    if T.p >= 1:
        nuD = nu_profile(T, grid, which="ddc", tol=tol, seed=seed, budget=budget)
        c2, s2 = _constant(nuD, tol)
        d_val = float(np.real(nuD.values[0]))
        d_err = float(np.max(nuD.errors))
    else:
        c2, s2, d_val, d_err = True, 0.0, 0.0, 0.0
    harmonic = abs(d_val) <= 3 * d_err + tol
    k = get_kappa(T.p).kappa if kappa is None else kappa
    am = alpha_mass_identity(T, grid[1], grid[-1], k, tol=tol, seed=seed, budget=budget)
    if harmonic:
        law, ok = "zero", abs(am.alpha_mass) <= 3 * am.alpha_error + tol
    else:
        law, ok = "log", am.matches(scaled=True) or abs(am.alpha_mass - am.scaled_rhs) <= tol * abs(am.scaled_rhs)
    details = {
        "pairing_deviation": worst,
        "nu_spread": s1,
        "nu_ddc_spread": s2,
        "nu_ddc": d_val,
        "alpha_mass": am.alpha_mass,
        "alpha_scaled_rhs": am.scaled_rhs,
        "alpha_literal_rhs": am.literal_rhs,
    }
    return ConicReport(inv, c1, c2, harmonic, ok, law, details)


@dataclass
class AdherenceReport:
    conic: bool
    pluriharmonic: bool
    alpha_zero: bool
    violates_condition_C: bool
    conic_report: ConicReport

    @property
    def classification(self) -> str:
        if not self.conic:
            return "not conic"
        if self.pluriharmonic and self.alpha_zero:
            return "conic pluriharmonic"
        return "conic with dd^c mass at 0"


def adherence_classify(theta: Current, **kw) -> AdherenceReport:
    """Signature of a dilatation limit: conic, pluriharmonic, no annulus alpha-mass.

    A conic candidate whose dd^c has mass at 0 (so condition (C) fails) is
    flagged instead of being classified pluriharmonic.
    """
    rep = conic_check(theta, **kw)
    alpha_zero = rep.alpha_law == "zero" and rep.alpha_consistent
    return AdherenceReport(rep.conic, rep.pluriharmonic, alpha_zero, rep.conic and not rep.pluriharmonic, rep)
