"""Lelong functions, the corrected function Lambda and the scalar condition integrals."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .currents import Current, ddc_mass_profile, mass_profile
from .quadrature import DEFAULT_BUDGET, DEFAULT_TOL, QuadratureResult, RadialProfile, _gl

__all__ = [
    "nu",
    "nu_profile",
    "LelongResult",
    "lelong_number",
    "DivergentIntegralError",
    "lambda_",
    "lambda_profile",
    "ConditionReport",
    "condition_integral",
    "condition_C",
    "dini",
    "gammas",
    "psi_criterion",
    "write_profile_csv",
    "DEFAULT_LELONG_GRID",
]

# condition integrals start at this fraction of r0
CUTOFF = 1e-4
# integrand o(1/t) margin in the fitted exponent
MARGIN = 0.1
DEFAULT_LELONG_GRID = tuple(np.geomspace(1e-3, 1.0, 7))


class DivergentIntegralError(ArithmeticError):
    pass


def _z0(T: Current, z0):
    return np.zeros(T.n, dtype=complex) if z0 is None else np.asarray(z0, dtype=complex)


def nu_profile(
    T: Current,
    grid,
    z0=None,
    *,
    which: str = "T",
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> RadialProfile:
    """``nu_T(z0, r)`` (``which="T"``) or ``nu_{dd^cT}(z0, r)`` (``"ddc"``) on a grid."""
    grid = np.asarray(grid, dtype=float)
    if which == "T":
        label, p = "nu_T", T.p
        prof = mass_profile(T, None, _z0(T, z0), grid, tol=tol, seed=seed, budget=budget)
    elif which == "ddc":
        label, p = "nu_ddcT", T.p - 1
        prof = ddc_mass_profile(T, None, _z0(T, z0), grid, tol=tol, seed=seed, budget=budget)
    else:
        raise ValueError(f"unknown profile {which!r}")
    scale = grid ** (2 * p)
    vals = np.real_if_close(prof.values / scale)
    return RadialProfile(grid, vals, prof.errors / scale, label, prof.evaluations, prof.converged)


def nu(T: Current, z0=None, r: float = 1.0, **kw) -> QuadratureResult:
    prof = nu_profile(T, [r], z0, **kw)
    return QuadratureResult(prof.values[0], float(prof.errors[0]), prof.evaluations, prof.converged)


# ----------------------------------------------------------------------------
# Lelong number


@dataclass
class LelongResult:
    verdict: str  # "exists", "divergent" or "inconclusive"
    value: float
    error: float
    exponent: float = math.nan
    slope: float = math.nan
    residual: float = 0.0
    profile: RadialProfile | None = None

    @property
    def exists(self) -> bool:
        return self.verdict == "exists"


def _solve_exponent(r1, r2, r3, rho):
    """e with (r3^e - r2^e) / (r2^e - r1^e) = rho."""
    l1, l2, l3 = math.log(r1), math.log(r2), math.log(r3)
    if abs((l3 - l2) - (l2 - l1)) < 1e-9 * abs(l2 - l1):
        return math.log(rho) / (l2 - l1)
    from scipy.optimize import brentq

    def g(e):
        if abs(e) < 1e-12:
            return (l3 - l2) / (l2 - l1) - rho
        return (math.exp(e * l3) - math.exp(e * l2)) / (math.exp(e * l2) - math.exp(e * l1)) - rho

    return brentq(g, -20.0, 20.0)


def lelong_number(
    T: Current,
    z0=None,
    grid=DEFAULT_LELONG_GRID,
    *,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    which: str = "T",
) -> LelongResult:
    """Extrapolate ``nu(r)`` to ``r -> 0`` with the model ``L + C r^e``.

    The exponent comes from the three smallest radii; ``e`` near zero with
    nonzero increments means logarithmic growth, reported as divergent with
    the fitted slope against ``log r``.  A fourth radius checks the model.
    """
    grid = np.sort(np.asarray(grid, dtype=float))
    if grid.size < 3 or grid[0] > 1e-3 * (1 + 1e-12):
        raise ValueError("grid needs at least three radii reaching down to 1e-3")
    prof = nu_profile(T, grid, z0, which=which, tol=tol, seed=seed, budget=budget)
    v = np.real(prof.values).astype(float)
    e = prof.errors
    r1, r2, r3 = grid[:3]
    d1, d2 = v[1] - v[0], v[2] - v[1]
    noise1, noise2 = 3 * (e[0] + e[1]) + 1e-13 * abs(v[0]), 3 * (e[1] + e[2]) + 1e-13 * abs(v[0])
    if abs(d1) <= noise1 and abs(d2) <= noise2:
        return LelongResult("exists", float(v[0]), float(e[0] + abs(d1)), math.inf, 0.0, 0.0, prof)
    rho = d2 / d1 if d1 != 0 else math.inf
    if not (0 < rho < math.inf):
        return LelongResult("inconclusive", float(v[0]), math.inf, math.nan, math.nan, math.nan, prof)
    ex = _solve_exponent(r1, r2, r3, rho)
    slope = d1 / math.log(r2 / r1)
    if ex <= MARGIN:
        # logarithmic or power blow-up as r -> 0
        return LelongResult("divergent", math.inf * -np.sign(slope) if slope else math.inf, math.inf, ex, slope, 0.0, prof)
    C = d1 / (r2**ex - r1**ex)
    L = v[0] - C * r1**ex
    resid = 0.0
    if grid.size >= 4:
        pred = L + C * grid[3:] ** ex
        resid = float(np.max(np.abs(pred - v[3:]) - 3 * e[3:]).clip(min=0.0))
    err = float(e[0] + (e[0] + e[1]) / abs(rho - 1) + resid)
    if resid > max(tol * max(1.0, abs(L)), 10 * float(np.max(e))):
        return LelongResult("inconclusive", float(L), err, ex, slope, resid, prof)
    return LelongResult("exists", float(L), err, ex, slope, resid, prof)


# ----------------------------------------------------------------------------
# condition integrals on (0, r0]


@dataclass
class ConditionReport:
    label: str
    verdict: str  # "finite", "divergent" or "inconclusive"
    value: float
    error: float
    r0: float
    sign: int = 0
    exponent: float = math.nan
    profile: RadialProfile | None = None
    extra: dict = field(default_factory=dict)

    @property
    def finite(self) -> bool:
        return self.verdict == "finite"

    def summary(self) -> str:
        if self.verdict == "finite":
            return f"{self.label}: finite {self.value:.6g} +- {self.error:.2g}"
        if self.verdict == "divergent":
            return f"{self.label}: divergent ({'+' if self.sign >= 0 else '-'}inf), endpoint exponent {self.exponent:.3g}"
        return f"{self.label}: inconclusive"


def _log_nodes(r0, panels=24, order=8):
    edges = np.geomspace(CUTOFF * r0, r0, panels + 1)
    x, w = _gl(order)
    a, b = edges[:-1, None], edges[1:, None]
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def condition_integral(
    integrand: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    r0: float,
    label: str = "",
    *,
    panels: int = 24,
) -> ConditionReport:
    """``int_0^r0 f(t) dt`` for an integrand that may blow up at 0.

    ``integrand(t)`` returns values and error bars on an array of radii.  The
    integral is taken over ``[1e-4 r0, r0]`` and the endpoint behaviour is
    classified from a power fit ``f ~ C t^e``: finite when ``e > -1 + 0.1``
    (with the analytic tail added), divergent when ``e <= -0.9`` and ``f`` is
    above its noise, inconclusive on a sign change near 0.
    """
    n8, w8 = _log_nodes(r0, panels, 8)
    n4, w4 = _log_nodes(r0, panels, 4)
    t_all = np.concatenate([n8.ravel(), n4.ravel()])
    order = np.argsort(t_all)
    f_sorted, e_sorted = integrand(t_all[order])
    f = np.empty_like(t_all)
    fe = np.empty_like(t_all)
    f[order] = np.real(f_sorted)
    fe[order] = e_sorted
    f8, e8 = f[: n8.size].reshape(n8.shape), fe[: n8.size].reshape(n8.shape)
    f4 = f[n8.size :].reshape(n4.shape)
    q8 = math.fsum((w8 * f8).ravel())
    q4 = math.fsum((w4 * f4).ravel())
    err = abs(q8 - q4) + math.fsum((w8 * e8).ravel())
    prof = RadialProfile(n8.ravel(), f8.ravel(), e8.ravel(), label)

    ta, tb = n8[0, 0], n8[1, -1]
    fa, fb = f8[0, 0], f8[1, -1]
    ea, eb = e8[0, 0], e8[1, -1]
    tmin = CUTOFF * r0
    if abs(fa) <= 3 * ea + 1e-300 or abs(fb) <= 3 * eb:
        # integrand is at its noise floor near 0
        tail_bound = (abs(fa) + 3 * ea) * ta
        return ConditionReport(label, "finite", q8, err + tail_bound, r0, 0, math.nan, prof)
    if np.sign(fa) != np.sign(fb):
        return ConditionReport(label, "inconclusive", q8, math.inf, r0, 0, math.nan, prof)
    ex = math.log(abs(fb) / abs(fa)) / math.log(tb / ta)
    sign = int(np.sign(fa))
    if ex <= -1 + MARGIN:
        return ConditionReport(label, "divergent", sign * math.inf, math.inf, r0, sign, ex, prof)
    tail = fa * ta ** (-ex) * tmin ** (ex + 1) / (ex + 1)
    value = q8 + tail
    return ConditionReport(label, "finite", value, err + 0.5 * abs(tail), r0, sign, ex, prof)


def _profile_fn(T: Current, z0, which, tol, seed, budget, transform=None):
    def fn(t):
        prof = nu_profile(T, t, z0, which=which, tol=tol, seed=seed, budget=budget)
        v, e = np.real(prof.values), prof.errors
        if transform is not None:
            return transform(t, v, e)
        return v, e

    return fn


def condition_C(T: Current, z0=None, r0: float = 1.0, *, tol=DEFAULT_TOL, seed=0, budget=DEFAULT_BUDGET) -> ConditionReport:
    """``int_0^r0 nu_{dd^cT}(z0, t) / t dt``."""
    fn = _profile_fn(T, z0, "ddc", tol, seed, budget, lambda t, v, e: (v / t, e / t))
    return condition_integral(fn, r0, "condition_C")


def dini(
    T: Current,
    r0: float = 1.0,
    z0=None,
    *,
    grid=DEFAULT_LELONG_GRID,
    tol=DEFAULT_TOL,
    seed=0,
    budget=DEFAULT_BUDGET,
) -> ConditionReport:
    """``int_0^r0 |nu_T(r) - nu_T(0)| / r dr`` with ``nu_T(0)`` extrapolated."""
    L = lelong_number(T, z0, grid, tol=tol, seed=seed, budget=budget)
    if not L.exists:
        verdict = "divergent" if L.verdict == "divergent" else "inconclusive"
        return ConditionReport("dini", verdict, math.inf, math.inf, r0, 1, L.exponent, None, {"lelong": L})

    def tr(t, v, e):
        return np.abs(v - L.value) / t, (e + L.error) / t

    rep = condition_integral(_profile_fn(T, z0, "T", tol, seed, budget, tr), r0, "dini")
    # the extrapolation error enters through (e + L.error) / t
    rep.extra["lelong"] = L
    return rep


def _kappa(p, kappa):
    if kappa is not None:
        return float(kappa)
    from .analysis.jensen import get_kappa

    return get_kappa(p).kappa


def lambda_profile(T: Current, grid, z0=None, *, kappa=None, tol=DEFAULT_TOL, seed=0, budget=DEFAULT_BUDGET) -> RadialProfile:
    """``Lambda(r) = nu_T(r) + kappa int_0^r (t^{2p}/r^{2p} - 1) nu_{dd^cT}(t) / t dt``."""
    k = _kappa(T.p, kappa)
    grid = np.asarray(grid, dtype=float)
    nu_T = nu_profile(T, grid, z0, tol=tol, seed=seed, budget=budget)
    vals, errs = [], []
    for j, r in enumerate(grid):
        def fn(t, r=r):
            prof = nu_profile(T, t, z0, which="ddc", tol=tol, seed=seed, budget=budget)
            w = ((t / r) ** (2 * T.p) - 1) / t
            return w * np.real(prof.values), np.abs(w) * prof.errors

        rep = condition_integral(fn, r, "lambda inner")
        if not rep.finite:
            raise DivergentIntegralError(f"inner integral of Lambda is {rep.verdict} at r={r:g}")
        vals.append(float(np.real(nu_T.values[j])) + k * rep.value)
        errs.append(float(nu_T.errors[j]) + abs(k) * rep.error)
    return RadialProfile(grid, np.array(vals), np.array(errs), "Lambda", nu_T.evaluations, nu_T.converged)


def lambda_(T: Current, z0=None, r: float = 1.0, *, kappa=None, **kw) -> QuadratureResult:
    prof = lambda_profile(T, [r], z0, kappa=kappa, **kw)
    return QuadratureResult(float(prof.values[0]), float(prof.errors[0]), prof.evaluations, prof.converged)


# ----------------------------------------------------------------------------
# gamma functions and the psi criterion


def _gamma_arrays(T: Current, t, z0, tol, seed, budget):
    t = np.asarray(t, dtype=float)
    both = np.unique(np.concatenate([t / 2, t]))
    out = []
    for which in ("T", "ddc"):
        prof = nu_profile(T, both, z0, which=which, tol=tol, seed=seed, budget=budget)
        v = np.real(prof.values)
        hi = np.searchsorted(both, t)
        lo = np.searchsorted(both, t / 2)
        out.append((v[hi] - v[lo], prof.errors[hi] + prof.errors[lo]))
    return out


def gammas(T: Current, r: float, z0=None, *, tol=DEFAULT_TOL, seed=0, budget=DEFAULT_BUDGET):
    """``(gamma_T(r), gamma_{dd^cT}(r))`` as QuadratureResults."""
    (gT, eT), (gD, eD) = _gamma_arrays(T, [r], z0, tol, seed, budget)
    return QuadratureResult(float(gT[0]), float(eT[0]), 0), QuadratureResult(float(gD[0]), float(eD[0]), 0)


def psi_criterion(T: Current, r0: float = 1.0, z0=None, *, tol=DEFAULT_TOL, seed=0, budget=DEFAULT_BUDGET) -> ConditionReport:
    """``int_0^r0 r |log r| psi(r) dr`` with ``psi = g / r^2 + sqrt(g) / r``, ``g = |gamma_T + gamma_ddc|``.

    The two split integrals ``int |log r| g / r`` and ``int |log r| sqrt(g)``
    are reported in ``extra``.
    """

    memo: dict = {}

    def g_of(t):
        key = np.asarray(t).tobytes()
        if key not in memo:
            (gT, eT), (gD, eD) = _gamma_arrays(T, t, z0, tol, seed, budget)
            memo[key] = (np.abs(gT + gD), eT + eD)
        return memo[key]

    def sq(g, e):
        return np.sqrt(g), np.sqrt(g + e) - np.sqrt(g)

    def full(t):
        g, e = g_of(t)
        s, se = sq(g, e)
        L = np.abs(np.log(t))
        return L * (g / t + s), L * (e / t + se)

    def first(t):
        g, e = g_of(t)
        L = np.abs(np.log(t))
        return L * g / t, L * e / t

    def second(t):
        g, e = g_of(t)
        s, se = sq(g, e)
        L = np.abs(np.log(t))
        return L * s, L * se

    rep = condition_integral(full, r0, "psi")
    rep.extra["split_g_over_r"] = condition_integral(first, r0, "psi_g")
    rep.extra["split_sqrt_g"] = condition_integral(second, r0, "psi_sqrt")
    return rep


def write_profile_csv(profile: RadialProfile, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["r", "value", "error"])
    for r, v, e in profile.rows():
        w.writerow(["%.17g" % r, "%.17g" % float(np.real(v)), "%.17g" % e])
