"""Mass of the lift to the blow-up at 0, and log-integrability along coordinate hyperplanes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import forms as fm
from ..currents import AmbientSmooth, Atomic, Current, SubspaceIntegration, mass_profile
from ..lelong import condition_integral, lelong_number, nu_profile
from ..quadrature import (
    DEFAULT_BUDGET,
    DEFAULT_TOL,
    _ball_profile,
    integrate_line,
    slab_profile,
)
from .jensen import get_kappa

__all__ = ["BlowupMassReport", "blowup_mass", "blowup_constants", "RestrictionReport", "restriction_identity"]


def blowup_constants(p: int, r: float) -> tuple[float, float]:
    """``(C_r, C'_r) = (sum_k C(p,k) r^{2k}, sum_k C(p,k) r^{2k} / (2k))`` over k = 1..p."""
    C = math.fsum(math.comb(p, k) * r ** (2 * k) for k in range(1, p + 1))
    Cp = math.fsum(math.comb(p, k) * r ** (2 * k) / (2 * k) for k in range(1, p + 1))
    return C, Cp


@dataclass
class BlowupMassReport:
    r: float
    eps: tuple
    partial: tuple  # lifted mass over B(eps_j, r)
    partial_errors: tuple
    mass: float
    mass_error: float
    bounded: bool
    bound: float
    bound_error: float
    C_r: float
    C_r_prime: float
    kappa: float = math.nan
    bound_kind: str = ""

    @property
    def respected(self) -> bool:
        if not (self.bounded and math.isfinite(self.bound)):
            return False
        return self.mass <= self.bound + 3 * (self.mass_error + self.bound_error) + 1e-12


def _binomial_forms(n: int, p: int):
    a, b = fm.alpha(n=n), fm.beta(n=n)
    return [(math.comb(p, k), fm.wedge(fm.power(b, k), fm.power(a, p - k))) for k in range(p + 1)]


def _extrapolate(eps, vals, errs):
    """Limit of the partial masses as eps -> 0, or unbounded growth."""
    inc = np.diff(vals)
    noise = 3 * (errs[1:] + errs[:-1]) + 1e-12 * np.abs(vals[1:])
    sig = np.abs(inc) > noise
    if not np.any(sig[-3:]):
        return float(vals[-1]), float(errs[-1] + np.sum(np.abs(inc[-3:]))), True
    d1, d2 = inc[-2], inc[-1]
    rho = d2 / d1 if d1 != 0 else math.inf
    if 0 <= rho < 0.9:
        rest = d2 * rho / (1 - rho)
        return float(vals[-1] + rest), float(errs[-1] + abs(rest)), True
    # equal (or growing) increments on a geometric eps grid: log growth or worse
    return math.inf, math.inf, False


def blowup_mass(
    T: Current,
    r: float,
    eps=None,
    *,
    kappa: float | None = None,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> BlowupMassReport:
    """Lifted mass ``sum_k C(p,k) int_{B(eps, r)} T ^ beta^k ^ alpha^{p-k}`` as eps -> 0,
    with the bound for plurisubharmonic (or closed) and plurisuperharmonic currents."""
    eps = tuple(r * 2.0 ** -j for j in range(1, 13)) if eps is None else tuple(sorted(eps, reverse=True))
    inner = eps[-1]
    radii = sorted(set(eps) | {r})
    vals = np.zeros(len(eps))
    errs = np.zeros(len(eps))
    for c, G in _binomial_forms(T.n, T.p):
        prof = mass_profile(T, G, None, radii, inner=inner, tol=tol, seed=seed, budget=budget)
        v = np.real(prof.values)
        top = v[radii.index(r)]
        et = prof.errors[radii.index(r)]
        for j, e in enumerate(eps):
            k = radii.index(e)
            vals[j] += c * (top - v[k])
            errs[j] += c * (et + prof.errors[k])
    mass, merr, bounded = _extrapolate(eps, vals, errs)

    p = T.p
    Cr, Crp = blowup_constants(p, r)
    nu_r = nu_profile(T, [r], tol=tol, seed=seed, budget=budget)
    nr, ner = float(np.real(nu_r.values[0])), float(nu_r.errors[0])
    L = lelong_number(T, tol=tol, seed=seed, budget=budget)
    k = math.nan
    if not L.exists:
        bound, berr, kind = math.inf, math.inf, "no Lelong number"
    elif T.sign_class in ("plurisubharmonic", "closed"):
        bound = nr - L.value + Cr * nr
        berr = ner + L.error + Cr * ner
        kind = "plurisubharmonic"
    elif T.sign_class == "plurisuperharmonic":
        k = get_kappa(p).kappa if kappa is None else float(kappa)
        nd = nu_profile(T, [r], which="ddc", tol=tol, seed=seed, budget=budget)

        def inner_fn(t):
            prof = nu_profile(T, t, which="ddc", tol=tol, seed=seed, budget=budget)
            w = ((t / r) ** (2 * p) - 1) / t
            return w * np.real(prof.values), np.abs(w) * prof.errors

        J = condition_integral(inner_fn, r, "J0")
        if J.finite:
            bound = abs(nr - L.value) + Cr * nr - k * Crp * float(np.real(nd.values[0])) + k * J.value
            berr = ner + L.error + Cr * ner + k * Crp * float(nd.errors[0]) + k * J.error
        else:
            bound, berr = math.inf, math.inf
        kind = "plurisuperharmonic"
    else:
        bound, berr, kind = math.nan, math.nan, "unknown sign"
    return BlowupMassReport(
        r, eps, tuple(vals), tuple(errs), mass, merr, bounded, bound, berr, Cr, Crp, k, kind
    )


# ----------------------------------------------------------------------------
# restriction identity along {z_k = 0}


@dataclass
class RestrictionReport:
    k: int
    lhs: float
    lhs_error: float
    rhs: float
    rhs_error: float
    # (u, int_u^1 sigma(r)/r dr, its error, int_{|z_k| >= u} -log|z_k| dsigma, its error)
    truncations: tuple = ()
    flagged: tuple = ()
    notes: list = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return abs(self.lhs - self.rhs) <= 3 * (self.lhs_error + self.rhs_error) + 1e-12


def _carrier_trace(c: SubspaceIntegration, p: int):
    """Trace density of a carrier component in its own coordinate."""
    W = fm.wedge(c.density, c.restrict(fm.power(fm.beta(n=len(c.anchor)), p)))
    return lambda zeta: fm.top_density(W, zeta)


def _carrier_geometry(c: SubspaceIntegration, k: int):
    A = np.asarray(c.anchor, dtype=complex)
    B = np.asarray(c.basis, dtype=complex)
    return A, B, A[k - 1], B[k - 1]


class _CarrierSlab:
    """A line carrier meeting the polydisc: |z_k| < r is a disc in the line coordinate."""

    def __init__(self, c: SubspaceIntegration, k: int, p: int):
        if c.m != 1:
            raise NotImplementedError("restriction identity implemented for line carriers")
        A, B, ak, vk = _carrier_geometry(c, k)
        self.c, self.k, self.p = c, k, p
        self.A, self.v = A, B[:, 0]
        self.ak, self.vk = complex(ak), complex(vk[0])
        self.trace = _carrier_trace(c, p)
        self.zc = np.array([-self.ak / self.vk]) if self.vk != 0 else None
        # polydisc constraints from the other coordinates
        self.contained = True
        if self.vk != 0:
            R = 1.0 / abs(self.vk)
            for j in range(len(A)):
                if j == k - 1:
                    continue
                a, v = complex(A[j]), complex(self.v[j])
                if v == 0:
                    self.contained &= abs(a) < 1
                else:
                    # disc |a + v zeta| < 1 around -a/v must contain the k-disc
                    d = abs(-a / v - self.zc[0])
                    self.contained &= d + R <= 1.0 / abs(v)
        if not self.contained:
            raise NotImplementedError("carrier leaves the polydisc inside the slab")

    def sigma(self, radii, tol, seed, budget):
        """sigma(Delta*_k(r)) for each r."""
        local = np.asarray(radii, dtype=float) / abs(self.vk)
        v, e, _, ok = _ball_profile(self.trace, self.zc, 1, 0.0, local, tol, seed, budget)
        return np.real(v), e

    def log_mass(self, u, tol, seed, budget):
        """int over u <= |z_k| < 1 of -log|z_k| dsigma."""
        f = lambda zeta: -np.log(np.abs(self.ak + self.vk * zeta[:, 0])) * self.trace(zeta)
        lo = u / abs(self.vk)
        v, e, _, ok = _ball_profile(f, self.zc, 1, lo, [1.0 / abs(self.vk)], tol, seed, budget)
        return float(np.real(v[0])), float(e[0])


def restriction_identity(
    S: Current,
    k: int,
    u_seq=(0.5, 0.1, 0.01, 1e-3),
    *,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> RestrictionReport:
    """``int_0^1 sigma_S(Delta*_k(r)) dr / r`` against ``int -log|z_k| dsigma_S`` on {z_k != 0}.

    Carriers lying inside {z_k = 0} put no mass on {z_k != 0} and are flagged.
    The truncated pair at level u satisfies
    ``int_u^1 sigma(r)/r dr >= int_{|z_k| >= u} -log|z_k| dsigma`` and both
    increase to the common value as u -> 0.
    """
    if not 1 <= k <= S.n:
        raise ValueError("k out of range")
    flagged, notes = [], []
    slabs, ambient = [], []
    for idx, c in enumerate(S.components):
        if isinstance(c, SubspaceIntegration):
            A, B, ak, vk = _carrier_geometry(c, k)
            if np.all(np.abs(vk) < 1e-14):
                if abs(ak) < 1e-14:
                    flagged.append(idx)
                    notes.append(f"component {idx} lies inside {{z_{k} = 0}}; contributes 0 on {{z_{k} != 0}}")
                    continue
                raise NotImplementedError("carrier parallel to {z_k = 0}")
            slabs.append(_CarrierSlab(c, k, S.p))
        elif isinstance(c, AmbientSmooth):
            ambient.append(c)
        elif isinstance(c, Atomic):
            raise NotImplementedError("atomic components have no restriction identity")

    def sigma(t):
        t = np.asarray(t, dtype=float)
        v = np.zeros(t.size)
        e = np.zeros(t.size)
        for sl in slabs:
            a, b = sl.sigma(t, tol, seed, budget)
            v += a
            e += b
        for c in ambient:
            dens = _ambient_trace(c, S.p)
            a, b, _, _ = slab_profile(dens, S.n, k, t, tol=tol, seed=seed, budget=budget)
            v += np.real(a)
            e += b
        return v, e

    lhs_rep = condition_integral(lambda t: tuple(x / t for x in sigma(t)), 1.0, "restriction lhs")
    lhs, lhs_err = lhs_rep.value, lhs_rep.error

    def log_mass(u):
        tot, err = 0.0, 0.0
        for sl in slabs:
            a, b = sl.log_mass(u, tol, seed, budget)
            tot += a
            err += b
        for c in ambient:
            dens = _ambient_trace(c, S.p)
            f = lambda z, dens=dens: -np.log(np.abs(z[:, k - 1])) * dens(z)
            # the slab panels are aligned with u, so the cut at |z_k| = u is exact
            radii = [1.0] if u <= 0 else [u, 1.0]
            a, b, _, _ = slab_profile(f, S.n, k, radii, tol=tol, seed=seed, budget=budget)
            a = np.real(a)
            tot += float(a[-1] - (a[0] if u > 0 else 0.0))
            err += float(b[-1] + (b[0] if u > 0 else 0.0))
        return tot, err

    rhs, rhs_err = log_mass(0.0)
    truncations = []
    for u in u_seq:
        val, er = integrate_line(lambda t: sigma(t)[0] / t, u, 1.0, panels=16)
        # the profile's own quadrature error, carried through the outer rule
        er += integrate_line(lambda t: sigma(t)[1] / t, u, 1.0, panels=16)[0]
        lm, lme = log_mass(u)
        truncations.append((u, val, er, lm, lme))
    return RestrictionReport(k, lhs, lhs_err, rhs, rhs_err, tuple(truncations), tuple(flagged), notes)


def _ambient_trace(c: AmbientSmooth, p: int):
    W = fm.wedge(c.form, fm.power(fm.beta(n=c.form.n), p))
    return lambda z: fm.top_density(W, z)
