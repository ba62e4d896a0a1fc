"""Lelong-Jensen balance, calibration of its dd^c coefficient, and the alpha-mass log law."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .. import forms as fm
from ..currents import Current, ddc_mass_profile, mass_profile
from ..fixtures import get_fixture
from ..lelong import lelong_number, nu_profile
from ..quadrature import DEFAULT_BUDGET, DEFAULT_TOL, _gl

__all__ = [
    "JensenReport",
    "jensen_check",
    "KappaCalibration",
    "CalibrationError",
    "calibrate_kappa",
    "get_kappa",
    "save_calibration",
    "load_calibration",
    "AlphaMassReport",
    "alpha_mass_identity",
    "ddc_terms",
    "CALIBRATION_SETS",
]


class CalibrationError(RuntimeError):
    pass


def _ddc_mass_fn(T: Current, z0, tol, seed, budget):
    """``t -> int_{B(z0,t)} dd^cT ^ beta^{p-1}`` on arrays, with errors."""
    def fn(t):
        prof = ddc_mass_profile(T, None, z0, np.asarray(t), tol=tol, seed=seed, budget=budget)
        return np.real(prof.values), prof.errors

    return fn


def _gl_panels(a, b, panels=16, order=8, log=True):
    if log and a > 0:
        edges = np.geomspace(a, b, panels + 1)
    else:
        edges = np.linspace(a, b, panels + 1)
    x, w = _gl(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    return (0.5 * (hi - lo) * x + 0.5 * (hi + lo)).ravel(), (0.5 * (hi - lo) * w).ravel()


def ddc_terms(T: Current, r1: float, r2: float, z0=None, *, tol=DEFAULT_TOL, seed=0, budget=DEFAULT_BUDGET):
    """The two dd^c integrals of the Lelong-Jensen balance, before any coefficient.

    first  = int_{r1}^{r2} (t^{-2p} - r2^{-2p}) t M(t) dt
    second = (r1^{-2p} - r2^{-2p}) int_0^{r1} t M(t) dt
    with M(t) the dd^cT ^ beta^{p-1} mass of B(z0, t).  Returns
    ((first, err), (second, err)).
    """
    p = T.p
    z0 = np.zeros(T.n, dtype=complex) if z0 is None else np.asarray(z0, dtype=complex)
    if T.declared_ddc is None and T.p == 0:
        raise ValueError("bidimension (0,0) has no dd^c terms")
    fn = _ddc_mass_fn(T, z0, tol, seed, budget)
    # first term on [r1, r2], second on (0, r1]; t M(t) is bounded near 0
    t1, w1 = _gl_panels(r1, r2, 8, 8, log=False)
    t1h, w1h = _gl_panels(r1, r2, 8, 4, log=False)
    t2, w2 = _gl_panels(1e-6 * r1, r1, 20, 8)
    t2h, w2h = _gl_panels(1e-6 * r1, r1, 20, 4)
    allt = np.concatenate([t1, t1h, t2, t2h])
    srt = np.argsort(allt)
    v_s, e_s = fn(allt[srt])
    M = np.empty_like(allt)
    Me = np.empty_like(allt)
    M[srt], Me[srt] = v_s, e_s
    sl = np.cumsum([0, t1.size, t1h.size, t2.size, t2h.size])
    parts = [(M[sl[i] : sl[i + 1]], Me[sl[i] : sl[i + 1]]) for i in range(4)]

    k1 = lambda t: (t ** (-2.0 * p) - r2 ** (-2.0 * p)) * t
    f1 = math.fsum(w1 * k1(t1) * parts[0][0])
    f1h = math.fsum(w1h * k1(t1h) * parts[1][0])
    e1 = abs(f1 - f1h) + math.fsum(w1 * abs(k1(t1)) * parts[0][1])
    c2 = r1 ** (-2.0 * p) - r2 ** (-2.0 * p)
    g2 = math.fsum(w2 * t2 * parts[2][0])
    g2h = math.fsum(w2h * t2h * parts[3][0])
    # below 1e-6 r1 the integrand t M(t) is at most t |M(1e-6 r1)|
    tail = 0.5 * (1e-6 * r1) ** 2 * abs(parts[2][0][0])
    e2 = c2 * (abs(g2 - g2h) + math.fsum(w2 * t2 * parts[2][1]) + tail)
    return (f1, e1), (c2 * g2, e2)


@dataclass
class JensenReport:
    fixture: str
    r1: float
    r2: float
    kappa: float
    lhs: float
    lhs_error: float
    alpha_term: float
    alpha_error: float
    ddc_first: float
    ddc_second: float
    ddc_error: float
    kappa_error: float = 0.0  # uncertainty of a calibrated coefficient
    residual: float = field(init=False)
    error: float = field(init=False)

    def __post_init__(self):
        self.residual = abs(self.lhs - self.rhs)
        self.error = (
            self.lhs_error + self.alpha_error + abs(self.kappa) * self.ddc_error + self.kappa_error * abs(self.ddc_raw)
        )

    @property
    def ddc_raw(self) -> float:
        return self.ddc_first + self.ddc_second

    @property
    def ddc_scaled(self) -> float:
        return self.kappa * self.ddc_raw

    @property
    def rhs(self) -> float:
        return self.alpha_term + self.ddc_scaled

    def within(self, factor: float = 3.0, floor: float = 1e-12) -> bool:
        return self.residual <= factor * self.error + floor

    def at_kappa(self, kappa: float, kappa_error: float = 0.0) -> "JensenReport":
        return JensenReport(
            self.fixture, self.r1, self.r2, kappa, self.lhs, self.lhs_error, self.alpha_term,
            self.alpha_error, self.ddc_first, self.ddc_second, self.ddc_error, kappa_error,
        )


def jensen_check(
    S: Current,
    r1: float,
    r2: float,
    kappa: float | None = None,
    z0=None,
    *,
    kappa_error: float = 0.0,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> JensenReport:
    """Evaluate each term of the Lelong-Jensen balance independently.

    ``lhs = nu(r2) - nu(r1)``; ``rhs = alpha-mass of B(r1, r2) + kappa * (dd^c terms)``.
    ``kappa=None`` uses the calibrated value for this bidimension together with
    its uncertainty, which then enters the error budget of the residual.
    """
    if not 0 < r1 < r2:
        raise ValueError("need 0 < r1 < r2")
    if kappa is None:
        cal = get_kappa(S.p)
        kappa, kappa_error = cal.kappa, cal.error
    z0a = np.zeros(S.n, dtype=complex) if z0 is None else np.asarray(z0, dtype=complex)
    nu = nu_profile(S, [r1, r2], z0a, tol=tol, seed=seed, budget=budget)
    lhs = float(np.real(nu.values[1] - nu.values[0]))
    lhs_err = float(nu.errors[0] + nu.errors[1])
    A = fm.power(fm.alpha(tuple(z0a)), S.p)
    am = mass_profile(S, A, z0a, [r2], inner=r1, tol=tol, seed=seed, budget=budget)
    (d1, e1), (d2, e2) = ddc_terms(S, r1, r2, z0a, tol=tol, seed=seed, budget=budget)
    return JensenReport(
        S.name, r1, r2, float(kappa), lhs, lhs_err, float(np.real(am.values[0])), float(am.errors[0]),
        d1, d2, e1 + e2, float(kappa_error),
    )


# ----------------------------------------------------------------------------
# calibration of the dd^c coefficient

# fixtures and radius pairs used for the calibrated value at each bidimension
CALIBRATION_SETS = {
    1: (("T2", "S_rad", "T0"), ((0.5, 1.0), (1.0, 2.0))),
    2: (("S3", "P3"), ((0.5, 1.0), (1.0, 2.0))),
}


@dataclass
class KappaCalibration:
    p: int
    kappa: float
    error: float
    fixtures: tuple
    reports: tuple = ()

    def to_text(self) -> str:
        return (
            f"p = {self.p}\nkappa = {self.kappa:.17g}\nerror = {self.error:.17g}\n"
            f"fixtures = {', '.join(self.fixtures)}\n"
        )


def calibrate_kappa(
    p: int,
    fixtures=None,
    pairs=None,
    *,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> KappaCalibration:
    """Least-squares coefficient of the dd^c terms that balances the identity.

    ``fixtures`` holds ids or Current objects of bidimension (p, p).  The fit
    is weighted by the reported errors; all fixtures must agree with the
    fitted value, otherwise CalibrationError is raised.
    """
    default_f, default_pairs = CALIBRATION_SETS.get(p, ((), ((0.5, 1.0), (1.0, 2.0))))
    fixtures = default_f if fixtures is None else fixtures
    pairs = default_pairs if pairs is None else pairs
    currents = [get_fixture(f) if isinstance(f, str) else f for f in fixtures]
    if len(currents) < 1:
        raise CalibrationError(f"no calibration fixtures for p={p}")
    if any(T.p != p for T in currents):
        raise CalibrationError("calibration fixtures must share the bidimension")
    reports = [jensen_check(T, r1, r2, 1.0, tol=tol, seed=seed, budget=budget) for T in currents for r1, r2 in pairs]
    D = np.array([r.ddc_raw for r in reports])
    y = np.array([r.lhs - r.alpha_term for r in reports])
    s = np.array([r.lhs_error + r.alpha_error + r.ddc_error for r in reports])
    scale = max(1e-300, float(np.max(np.abs(D))))
    informative = np.abs(D) > 1e3 * s + 1e-9 * scale
    if not np.any(informative):
        raise CalibrationError("dd^c terms vanish on every fixture; coefficient is indeterminate")
    w = 1.0 / np.maximum(s, 1e-12 * np.abs(y) + 1e-15) ** 2
    D, y, s, w = D[informative], y[informative], s[informative], w[informative]
    k = float(np.sum(w * D * y) / np.sum(w * D * D))
    # propagated error plus scatter
    prop = float(np.sqrt(np.sum((w * D * s) ** 2)) / np.sum(w * D * D))
    indiv = y / D
    scatter = float(np.max(np.abs(indiv - k)))
    err = prop + scatter
    bad = np.abs(y - k * D) > 3 * (s + abs(k) * 0) + 1e-3 * np.abs(y) + 1e-12
    if np.any(bad):
        raise CalibrationError(f"fixtures disagree: individual coefficients {indiv.tolist()}")
    names = tuple(T.name for T in currents)
    return KappaCalibration(p, k, err, names, tuple(r.at_kappa(k, err) for r in reports))


@lru_cache(maxsize=None)
def get_kappa(p: int, seed: int = 0) -> KappaCalibration:
    """Calibrated coefficient for bidimension p, computed once per process."""
    return calibrate_kappa(p, seed=seed)


def save_calibration(cal: KappaCalibration, path) -> None:
    with open(path, "w") as fh:
        fh.write(cal.to_text())


def load_calibration(path) -> KappaCalibration:
    fields = {}
    with open(path) as fh:
        for line in fh:
            if "=" in line:
                k, v = line.split("=", 1)
                fields[k.strip()] = v.strip()
    try:
        return KappaCalibration(
            int(fields["p"]),
            float(fields["kappa"]),
            float(fields["error"]),
            tuple(f.strip() for f in fields.get("fixtures", "").split(",") if f.strip()),
        )
    except KeyError as exc:
        raise ValueError(f"calibration file missing field {exc}") from None


# ----------------------------------------------------------------------------
# alpha-mass log law for conic currents


@dataclass
class AlphaMassReport:
    eps: float
    r: float
    alpha_mass: float
    alpha_error: float
    nu_ddc0: float
    nu_ddc0_error: float
    kappa: float

    @property
    def literal_rhs(self) -> float:
        return self.nu_ddc0 * math.log(self.eps / self.r)

    @property
    def scaled_rhs(self) -> float:
        return self.kappa * self.literal_rhs

    @property
    def error(self) -> float:
        return self.alpha_error + abs(self.kappa * math.log(self.eps / self.r)) * self.nu_ddc0_error

    def matches(self, scaled: bool = True, factor: float = 3.0, floor: float = 1e-9) -> bool:
        rhs = self.scaled_rhs if scaled else self.literal_rhs
        return abs(self.alpha_mass - rhs) <= factor * self.error + floor


def alpha_mass_identity(
    T: Current,
    eps: float,
    r: float,
    kappa: float | None = None,
    *,
    tol=DEFAULT_TOL,
    seed=0,
    budget=DEFAULT_BUDGET,
) -> AlphaMassReport:
    """Compare the annulus alpha-mass with ``nu_{dd^cT}(0) log(eps / r)``, literal and kappa-scaled."""
    if not 0 < eps < r:
        raise ValueError("need 0 < eps < r")
    if kappa is None:
        kappa = get_kappa(T.p).kappa
    A = fm.power(fm.alpha(n=T.n), T.p)
    am = mass_profile(T, A, None, [r], inner=eps, tol=tol, seed=seed, budget=budget)
    L = lelong_number(T, which="ddc", tol=tol, seed=seed, budget=budget)
    v0, e0 = (L.value, L.error) if L.exists else (math.nan, math.inf)
    return AlphaMassReport(eps, r, float(np.real(am.values[0])), float(am.errors[0]), v0, e0, float(kappa))
