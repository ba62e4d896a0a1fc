"""Positive (p, p)-currents on C^n built from smooth, carrier and atomic parts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import forms as fm
from .quadrature import (
    DEFAULT_BUDGET,
    DEFAULT_TOL,
    Annulus,
    Ball,
    QuadratureResult,
    RadialProfile,
    SubspaceDisc,
    _ball_profile,
    ball_volume,
    integrate,
    integrate_sobol,
)

__all__ = [
    "AmbientSmooth",
    "SubspaceIntegration",
    "Atomic",
    "Current",
    "TestForm",
    "DilatationFamily",
    "NonDifferentiableError",
    "ChartInvisibleError",
    "IntegrationError",
    "subspace_current",
    "zero_current",
    "ddc",
    "dilate_pullback",
    "chart_pullback",
    "ChartCurrent",
    "trace_density",
    "pair",
    "mass_against",
    "mass_profile",
    "ddc_mass_profile",
    "bump_test_form",
    "test_form_bank",
]

SIGN_CLASSES = ("plurisubharmonic", "plurisuperharmonic", "closed", "unknown")


class NonDifferentiableError(ValueError):
    """dd^c requested for a component that has no smooth coefficients."""


class ChartInvisibleError(ValueError):
    """Carrier lies inside {z_n = 0}, outside the projective chart."""


class IntegrationError(RuntimeError):
    """Quadrature did not reach its tolerance within budget."""


@dataclass(frozen=True)
class AmbientSmooth:
    form: fm.Form


@dataclass(frozen=True)
class SubspaceIntegration:
    """Integration over ``{anchor + basis @ zeta}`` against an (s, s)-form on C^m.

    ``density`` is expressed in the intrinsic coordinate ``zeta``; a scalar
    weight is the case s = 0.  ``basis`` has orthonormal columns.
    """

    anchor: tuple
    basis: tuple
    density: fm.Form

    @property
    def m(self) -> int:
        return len(self.basis[0])

    @property
    def bidimension(self) -> int:
        return self.m - self.density.s

    def embed(self, zeta) -> np.ndarray:
        B = np.asarray(self.basis, dtype=complex)
        return np.asarray(self.anchor, dtype=complex)[None, :] + np.asarray(zeta) @ B.T

    def restrict(self, G: fm.Form) -> fm.Form:
        """Pull an ambient form back to the carrier coordinates."""
        B = np.asarray(self.basis, dtype=complex)
        singular = []
        for sp in G.singular:
            zc = np.conj(B).T @ (np.asarray(sp) - np.asarray(self.anchor))
            if np.allclose(self.embed(zc[None])[0], sp):
                singular.append(tuple(zc))
        return fm.pullback(G, self.embed, lambda w: B, self.m, singular)


@dataclass(frozen=True)
class Atomic:
    point: tuple
    mass: float

    def __post_init__(self):
        if not np.isreal(self.mass):
            raise ValueError("atomic mass must be real")


@dataclass(frozen=True)
class Current:
    n: int
    p: int
    components: tuple = ()
    declared_ddc: "Current | None" = None
    sign_class: str = "unknown"
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.sign_class not in SIGN_CLASSES:
            raise ValueError(f"unknown sign class {self.sign_class!r}")
        if not 0 <= self.p <= self.n:
            raise ValueError("bidimension out of range")
        for c in self.components:
            if isinstance(c, AmbientSmooth):
                if c.form.n != self.n or c.form.s != self.n - self.p or c.form.t != self.n - self.p:
                    raise ValueError("ambient component has wrong bidegree")
            elif isinstance(c, SubspaceIntegration):
                if c.bidimension != self.p or len(c.anchor) != self.n:
                    raise ValueError("carrier component has wrong bidimension")
            elif isinstance(c, Atomic):
                if self.p != 0:
                    raise ValueError("atomic components need bidimension (0, 0)")
            else:
                raise TypeError(f"unknown component {c!r}")
        if self.declared_ddc is not None and self.p >= 1 and self.declared_ddc.p != self.p - 1:
            raise ValueError("declared dd^c has wrong bidimension")

    @property
    def q(self) -> int:
        return self.n - self.p

    def __add__(self, other: "Current") -> "Current":
        if (self.n, self.p) != (other.n, other.p):
            raise ValueError("bidimension mismatch")
        ddc_sum = None
        if self.declared_ddc is not None and other.declared_ddc is not None:
            ddc_sum = self.declared_ddc + other.declared_ddc
        sign = self.sign_class if self.sign_class == other.sign_class else "unknown"
        return Current(self.n, self.p, self.components + other.components, ddc_sum, sign)


def zero_current(n: int, p: int, name: str = "zero") -> Current:
    z = Current(n, p - 1, (), None, "closed") if p >= 1 else None
    return Current(n, p, (), z, "closed", name)


def subspace_current(
    anchor,
    basis,
    weight: Callable | None = None,
    singular: Sequence = (),
) -> SubspaceIntegration:
    """Carrier component with scalar weight ``weight(z)`` given on ambient points.

    ``basis`` columns are orthonormalised; ``singular`` lists ambient points
    where the weight blows up.
    """
    A = np.asarray(anchor, dtype=complex)
    B = np.asarray(basis, dtype=complex)
    if B.ndim == 1:
        B = B[:, None]
    if B.shape[0] != A.size or B.shape[1] > A.size or np.linalg.matrix_rank(B) < B.shape[1]:
        raise ValueError(f"basis must be an (n, m) array of rank m <= n = {A.size}, got shape {B.shape}")
    Q, _ = np.linalg.qr(B)
    # keep orientation of the first column
    Q = Q * np.exp(-1j * np.angle(np.diag(np.conj(Q).T @ B)))[None, :]
    m = Q.shape[1]
    sing_local = []
    for sp in singular:
        sing_local.append(tuple(np.conj(Q).T @ (np.asarray(sp, dtype=complex) - A)))

    def coeffs(zeta):
        z = A[None, :] + zeta @ Q.T
        w = np.ones(zeta.shape[0]) if weight is None else np.asarray(weight(z))
        return w[:, None, None]

    density = fm.Form(m, 0, 0, coeffs, tuple(sing_local))
    return SubspaceIntegration(tuple(A), tuple(map(tuple, Q)), density)


@dataclass(frozen=True)
class DilatationFamily:
    scales: tuple

    def __post_init__(self):
        if any(a == 0 for a in self.scales):
            raise ValueError("dilatation scales must be nonzero")

    @classmethod
    def geometric(cls, k: int, ratio: float = 0.5, phase: complex = 1.0):
        return cls(tuple(phase * ratio**j for j in range(k)))


@dataclass(frozen=True)
class TestForm:
    """Smooth (p, p)-form with support in ``inner <= |z - center| <= outer``."""

    form: fm.Form
    center: tuple
    inner: float
    outer: float
    label: str = ""

    def dilate(self, b: complex) -> "TestForm":
        """``h_b^* phi``."""
        c = tuple(np.asarray(self.center, dtype=complex) / b)
        return TestForm(fm.dilate_form(self.form, b), c, self.inner / abs(b), self.outer / abs(b), self.label)


def _bump(rho, inner, outer):
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    if inner <= 0:
        t = rho / outer
        m = t < 1
        out[m] = np.exp(1.0 - 1.0 / (1.0 - t[m] ** 2))
    else:
        m = (rho > inner) & (rho < outer)
        half = 0.5 * (outer - inner)
        x = (rho[m] - inner) * (outer - rho[m]) / half**2
        out[m] = np.exp(1.0 - 1.0 / x)
    return out


def bump_test_form(coeff: fm.Form, center, inner: float, outer: float, label: str = "") -> TestForm:
    """Radial bump around ``center`` times the (p, p)-form ``coeff``."""
    c = np.asarray(center, dtype=complex)

    def coeffs(z):
        rho = np.linalg.norm(z - c[None, :], axis=1)
        return _bump(rho, inner, outer)[:, None, None] * coeff(z)

    return TestForm(fm.Form(coeff.n, coeff.s, coeff.t, coeffs), tuple(c), inner, outer, label)


def _elementary(n, p, I, J, scale=1.0):
    N = math.comb(n, p)
    look = {m.indices: k for k, m in enumerate(fm.multi_indices(n, p))}
    vals = np.zeros((N, N), dtype=complex)
    vals[look[I], look[J]] += scale
    return vals


def test_form_bank(n: int, p: int, where: str = "annulus") -> list[TestForm]:
    """At least five (p, p) test forms.

    ``where="annulus"`` gives bumps supported in 1/4 <= |z| <= 1; ``"chart"``
    gives bumps supported in small balls inside {|z| < 1, 1/2 < |z_n| < 1}.
    """
    pref = 2.0**-p * 1j ** (p * p)
    idx = fm.multi_indices(n, p)
    coeffs = [("beta^p", fm.power(fm.beta(n=n), p))]
    for I in idx:
        coeffs.append((f"diag{I.indices}", fm.constant_form(n, p, p, pref * _elementary(n, p, I.indices, I.indices))))
    if len(idx) >= 2:
        I, J = idx[0].indices, idx[1].indices
        re = _elementary(n, p, I, J) + _elementary(n, p, J, I)
        im = 1j * (_elementary(n, p, I, J) - _elementary(n, p, J, I))
        coeffs.append((f"re{I}{J}", fm.constant_form(n, p, p, pref * (re + 2 * np.eye(len(idx))))))
        coeffs.append((f"im{I}{J}", fm.constant_form(n, p, p, pref * (im + 2 * np.eye(len(idx))))))
    bank = []
    if where == "annulus":
        origin = (0.0,) * n
        for k, (label, F) in enumerate(coeffs):
            bank.append(bump_test_form(F, origin, 0.25, 1.0, label))
    elif where == "chart":
        centers = [(0.0,) * (n - 1) + (0.75,), (0.1,) + (0.0,) * (n - 2) + (0.7j,)]
        for k, (label, F) in enumerate(coeffs):
            c = centers[k % len(centers)]
            bank.append(bump_test_form(F, c, 0.0, 0.18, label))
    else:
        raise ValueError(f"unknown test form region {where!r}")
    while len(bank) < 5:
        extra = bank[len(bank) % len(coeffs)]
        shifted = bump_test_form(
            fm.scale_form(coeffs[len(bank) % len(coeffs)][1], 2.0),
            extra.center,
            extra.inner,
            extra.outer,
            extra.label + "x2",
        )
        bank.append(shifted)
    return bank


# ----------------------------------------------------------------------------
# dd^c and dilatations


def ddc(T: Current, step: float = 1e-4, richardson: bool = False) -> Current:
    """``dd^c T``: declared value when present, finite differences otherwise."""
    if T.declared_ddc is not None:
        return T.declared_ddc
    if T.p == 0:
        raise NonDifferentiableError("dd^c of a bidimension (0,0) current is not represented")
    comps = []
    for c in T.components:
        if isinstance(c, AmbientSmooth):
            comps.append(AmbientSmooth(fm.ddc_form(c.form, step, richardson)))
        elif isinstance(c, SubspaceIntegration):
            comps.append(SubspaceIntegration(c.anchor, c.basis, fm.ddc_form(c.density, step, richardson)))
        else:
            raise NonDifferentiableError("atomic component without declared dd^c")
    return Current(T.n, T.p - 1, tuple(comps), None, "closed", f"ddc({T.name})")


def dilate_pullback(T: Current, a: complex) -> Current:
    """``h_a^* T`` for ``h_a(z) = a z``."""
    if a == 0:
        raise ValueError("dilatation factor must be nonzero")
    comps = []
    for c in T.components:
        if isinstance(c, AmbientSmooth):
            comps.append(AmbientSmooth(fm.dilate_form(c.form, a)))
        elif isinstance(c, SubspaceIntegration):
            anchor = tuple(np.asarray(c.anchor, dtype=complex) / a)
            comps.append(SubspaceIntegration(anchor, c.basis, fm.dilate_form(c.density, a)))
        else:
            comps.append(Atomic(tuple(np.asarray(c.point, dtype=complex) / a), c.mass))
    declared = None if T.declared_ddc is None else dilate_pullback(T.declared_ddc, a)
    return Current(T.n, T.p, tuple(comps), declared, T.sign_class, f"h_{a}^*{T.name}", T.meta)


# ----------------------------------------------------------------------------
# integrals against ambient forms


def _form_power_for(T: Current, k: int | None) -> fm.Form:
    k = T.p if k is None else k
    return fm.power(fm.beta(n=T.n), k)


def _component_profile(c, n, G: fm.Form, center, radii, inner, tol, seed, budget):
    center = np.asarray(center, dtype=complex)
    radii = np.asarray(radii, dtype=float)
    if isinstance(c, AmbientSmooth):
        W = fm.wedge(c.form, G)
        vals, errs, ev, ok = _ball_profile(lambda z: fm.top_density(W, z), center, n, inner, radii, tol, seed, budget)
        return vals, errs, ev, ok
    if isinstance(c, SubspaceIntegration):
        region = SubspaceDisc(c.anchor, c.basis, tuple(center), inner, float(radii[-1]))
        zc, _ = region.local_geometry()
        local = np.array([region.local_radius(r) for r in radii])
        lo = region.local_radius(inner) if inner > 0 else 0.0
        W = fm.wedge(c.density, c.restrict(G))
        if W.s != c.m:
            raise fm.DegreeError("test form degree does not match the carrier")
        vals = np.zeros(radii.size, dtype=complex)
        errs = np.zeros(radii.size)
        mask = local > lo
        if inner > 0 and math.sqrt(max(inner**2 - region.local_geometry()[1], 0.0)) == 0.0:
            lo = 0.0
        ev, ok = 0, True
        if np.any(mask):
            rr = local[mask]
            # distinct strictly increasing local radii
            uniq, inv = np.unique(rr, return_inverse=True)
            v, e, ev, ok = _ball_profile(
                lambda zeta: fm.top_density(W, zeta), zc, c.m, lo, uniq, tol, seed, budget
            )
            vals[mask] = v[inv]
            errs[mask] = e[inv]
        return vals, errs, ev, ok
    if isinstance(c, Atomic):
        d = float(np.linalg.norm(np.asarray(c.point, dtype=complex) - center))
        g = G(np.asarray(c.point, dtype=complex)[None, :])[0, 0, 0] if G.s == 0 else 0.0
        vals = np.where((d < radii) & (d >= inner), c.mass * g, 0.0)
        return vals.astype(complex), np.zeros(radii.size), 0, True
    raise TypeError(c)


def mass_profile(
    T: Current,
    G: fm.Form | None = None,
    center=None,
    radii=(1.0,),
    *,
    inner: float = 0.0,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    label: str = "",
) -> RadialProfile:
    """``r -> int_{inner <= |z - center| < r} T ^ G`` on a grid (G defaults to beta^p)."""
    G = _form_power_for(T, None) if G is None else G
    center = np.zeros(T.n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
    radii = np.asarray(radii, dtype=float)
    total = np.zeros(radii.size, dtype=complex)
    errs = np.zeros(radii.size)
    evals, ok = 0, True
    for c in T.components:
        v, e, ev, o = _component_profile(c, T.n, G, center, radii, inner, tol, seed, budget)
        total += v
        errs += e
        evals += ev
        ok = ok and o
    values = total.real if np.all(np.abs(total.imag) <= 1e-12 * np.maximum(1, np.abs(total.real))) else total
    return RadialProfile(radii, values, errs, label, evals, ok)


FD_STEP = 1e-4


def ddc_mass_profile(T: Current, G: fm.Form | None = None, center=None, radii=(1.0,), **kw) -> RadialProfile:
    """``mass_profile`` of ``dd^c T``.

    For finite-difference dd^c the profile is repeated with twice the step and
    the difference is added to the error bars (truncation and roundoff).
    """
    if T.declared_ddc is not None:
        return mass_profile(T.declared_ddc, G, center, radii, **kw)
    P1 = mass_profile(ddc(T, FD_STEP), G, center, radii, **kw)
    P2 = mass_profile(ddc(T, 2 * FD_STEP), G, center, radii, **kw)
    P1.errors = P1.errors + np.abs(P1.values - P2.values)
    P1.evaluations += P2.evaluations
    P1.converged = P1.converged and P2.converged
    return P1


def mass_against(T: Current, G: fm.Form, region, *, tol=DEFAULT_TOL, seed=0, budget=DEFAULT_BUDGET) -> QuadratureResult:
    """``int_region T ^ G`` for a Ball or Annulus region."""
    if isinstance(region, Ball):
        region = Annulus(region.center, 0.0, region.r)
    if region.r2 == region.r1:
        return QuadratureResult(0.0, 0.0, 0)
    prof = mass_profile(T, G, region.center, [region.r2], inner=region.r1, tol=tol, seed=seed, budget=budget)
    v = prof.values[0]
    return QuadratureResult(v, float(prof.errors[0]), prof.evaluations, prof.converged)


def pair(T: Current, phi: TestForm, *, tol=DEFAULT_TOL, seed=0, budget=DEFAULT_BUDGET) -> QuadratureResult:
    """``<T, phi> = int T ^ phi`` for a real test form (densities are real parts)."""
    if phi.form.s != T.p:
        raise fm.DegreeError("test form must have bidegree (p, p)")
    region = Annulus(phi.center, phi.inner, phi.outer * (1 + 1e-12))
    return mass_against(T, phi.form, region, tol=tol, seed=seed, budget=budget)


def trace_density(T: Current, z) -> float:
    """Density of the trace measure T ^ beta^p at ``z``.

    Smooth parts give the density against Lebesgue measure.  Carrier parts
    give the density against the carrier's own beta^p volume, so an
    unweighted linear subspace has density 1.
    """
    z = np.asarray(z, dtype=complex)
    G = _form_power_for(T, None)
    total = 0.0
    for c in T.components:
        if isinstance(c, AmbientSmooth):
            W = fm.wedge(c.form, G)
            total += float(fm.top_density(W, z[None])[0])
        elif isinstance(c, SubspaceIntegration):
            B = np.asarray(c.basis, dtype=complex)
            zeta = np.conj(B).T @ (z - np.asarray(c.anchor))
            if not np.allclose(c.embed(zeta[None])[0], z, atol=1e-12):
                continue
            W = fm.wedge(c.density, c.restrict(G))
            unit = math.factorial(c.m) / math.pi**c.m
            total += float(fm.top_density(W, zeta[None])[0]) / unit
        elif np.allclose(c.point, z):
            raise fm.SingularPointError("trace density at an atom")
    return total


# ----------------------------------------------------------------------------
# projective chart  w' = z'/z_n, w_n = z_n


def _chart_map(w):
    z = w.copy()
    z[:, :-1] = w[:, :-1] * w[:, -1:]
    return z


def _chart_jac(w):
    m, n = w.shape
    J = np.zeros((m, n, n), dtype=complex)
    for j in range(n - 1):
        J[:, j, j] = w[:, -1]
        J[:, j, n - 1] = w[:, j]
    J[:, n - 1, n - 1] = 1.0
    return J


def _case_factors(n, q, a):
    idx = fm.multi_indices(n, q)
    fI = np.array([a if n in I else 1.0 for I in idx], dtype=complex)
    fJ = np.array([np.conj(a) if n in J else 1.0 for J in idx], dtype=complex)
    return fI[:, None] * fJ[None, :]


@dataclass(frozen=True)
class ChartLine:
    """Line {w' = slope} in chart coordinates, weight read off the original carrier."""

    slope: tuple
    direction: tuple
    density: fm.Form


@dataclass(frozen=True)
class ChartCurrent:
    """``h_a^* T`` written in projective coordinates on the chart region."""

    n: int
    p: int
    a: complex
    ambient: tuple = ()
    lines: tuple = ()

    def coefficients(self, w) -> np.ndarray:
        """Weighted coefficients T^a_{I,J}(w) of the smooth part."""
        w = np.asarray(w, dtype=complex)
        shape = (w.shape[0],) + (math.comb(self.n, self.q),) * 2
        total = np.zeros(shape, dtype=complex)
        for F in self.ambient:
            total += fm.weighted_coefficients(F, w)
        return total

    @property
    def q(self):
        return self.n - self.p

    def line_weight(self, line: ChartLine, t) -> np.ndarray:
        """Weight at the chart point (slope, t) after the chart dilatation."""
        v = np.asarray(line.direction, dtype=complex)
        zeta = (self.a * np.asarray(t)) / v[-1]
        return np.real(line.density(zeta.reshape(-1, 1))[:, 0, 0])


def chart_pullback(T: Current, a: complex) -> ChartCurrent:
    """Coefficients of ``h_a^* T`` in the chart w' = z'/z_n, w_n = z_n.

    The chart dilatation is ``(w', w_n) -> (w', a w_n)``; coefficients pick up
    1, a, conj(a) or |a|^2 according to whether n lies in I and/or J.
    """
    if a == 0:
        raise ValueError("dilatation factor must be nonzero")
    n, q = T.n, T.q
    ambient, lines = [], []
    factors = _case_factors(n, q, a)
    for c in T.components:
        if isinstance(c, AmbientSmooth):
            Tw = fm.pullback(c.form, _chart_map, _chart_jac, n)

            def coeffs(w, Tw=Tw):
                wa = w.copy()
                wa[:, -1] = a * w[:, -1]
                return factors[None] * Tw(wa)

            ambient.append(fm.Form(n, q, q, coeffs))
        elif isinstance(c, SubspaceIntegration):
            v = np.asarray(c.basis, dtype=complex)[:, 0]
            anchor = np.asarray(c.anchor, dtype=complex)
            if c.m == 1 and abs(v[-1]) < 1e-14 and abs(anchor[-1]) < 1e-14:
                raise ChartInvisibleError("carrier lies inside {z_n = 0}")
            if c.m != 1 or np.any(np.abs(anchor) > 1e-14) or c.density.s != 0:
                raise NotImplementedError("chart form only for weighted lines through the origin")
            lines.append(ChartLine(tuple(v[:-1] / v[-1]), tuple(v), c.density))
        else:
            raise ChartInvisibleError("atomic components have no chart coefficients")
    return ChartCurrent(n, T.p, a, tuple(ambient), tuple(lines))


def chart_region_sampler(n: int):
    """Map the unit cube onto U_w = {1/2 < |w_n| < 1, |w_n|^2 (1 + |w'|^2) < 1}.

    Returns (dim, map) where map(u) -> (w, weight) with weight the Jacobian.
    """
    from scipy.special import ndtri

    k = 2 * n - 2
    dim = 2 + (2 if n == 2 else k + 1)

    def mapping(u):
        rho = 0.5 + 0.5 * u[:, 0]
        theta = 2 * np.pi * u[:, 1]
        wn = rho * np.exp(1j * theta)
        R = np.sqrt(1.0 / rho**2 - 1.0)
        if n == 2:
            r = R * np.sqrt(u[:, 2])
            wp = (r * np.exp(2j * np.pi * u[:, 3]))[:, None]
        else:
            g = ndtri(np.clip(u[:, 3 : 3 + k], 1e-12, 1 - 1e-12))
            g = g / np.linalg.norm(g, axis=1, keepdims=True)
            r = R * u[:, 2] ** (1.0 / k)
            gc = g[:, 0::2] + 1j * g[:, 1::2]
            wp = r[:, None] * gc
        w = np.concatenate([wp, wn[:, None]], axis=1)
        weight = (0.5 * 2 * np.pi * rho) * ball_volume(k, 1.0) * R**k
        return w, weight

    return dim, mapping


def pair_in_chart(C: ChartCurrent, phi: TestForm, *, seed=0, points=2**14) -> QuadratureResult:
    """Pair the chart representation with a z-coordinate test form supported in U."""
    n = C.n
    phi_w = fm.pullback(phi.form, _chart_map, _chart_jac, n)
    total = QuadratureResult(0.0, 0.0, 0)
    if C.ambient:
        dim, mapping = chart_region_sampler(n)

        def integrand(u):
            w, wt = mapping(u)
            out = np.zeros(w.shape[0])
            for F in C.ambient:
                out += fm.top_density(fm.wedge(F, phi_w), w)
            return out * wt

        total = total + integrate_sobol(integrand, dim, seed=seed, points=points)
    for line in C.lines:
        direction = np.array(line.slope + (1.0,), dtype=complex)
        emb = lambda t, d=direction: t @ d[None, :]
        pulled = fm.pullback(phi.form, emb, lambda t, d=direction: d[:, None], 1)
        hi = min(1.0, 1.0 / math.sqrt(1.0 + float(np.sum(np.abs(direction[:-1]) ** 2))))

        def dens(t, line=line, pulled=pulled):
            return C.line_weight(line, t[:, 0]) * fm.top_density(pulled, t)

        total = total + integrate(dens, Annulus((0.0,), 0.5, hi), seed=seed)
    return total
