"""Integration of densities over balls, annuli, polydisc slabs and carrier discs.

Ball-type regions are integrated in polar form around the region centre:
Gauss-Legendre panels in the radius (geometric shells down to ``1e-6`` of the
region scale when the region contains its centre, plus a fitted power-law
tail) times an angular rule on the sphere S^{2n-1}.  The angular rule writes
``z_j = sqrt(u_j) exp(i theta_j)`` with ``u`` on the simplex (nested
Clenshaw-Curtis, stick-breaking map) and ``theta`` on the torus (trapezoid
with a seeded random shift).  Angular and radial errors come from nested
lower-order rules evaluated on the same samples.

Regions without polar structure (projective chart neighbourhoods) use
scrambled Sobol replicates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.stats import qmc

__all__ = [
    "Ball",
    "Annulus",
    "PolydiscSlab",
    "SubspaceDisc",
    "QuadratureResult",
    "RadialProfile",
    "integrate",
    "radial_profile",
    "sphere_rule",
    "ball_volume",
    "integrate_sobol",
    "integrate_line",
    "DEFAULT_BUDGET",
    "DEFAULT_TOL",
]

DEFAULT_BUDGET = 1_000_000
DEFAULT_TOL = 1e-3
SHELL_DEPTH = 1e-6
PANEL_RATIO = 2.0
GL_ORDER = 8
GL_LOW = 6
CHUNK = 200_000


@dataclass(frozen=True)
class Ball:
    center: tuple
    r: float


@dataclass(frozen=True)
class Annulus:
    """``r1 <= |z - center| < r2``."""

    center: tuple
    r1: float
    r2: float

    def __post_init__(self):
        if not 0 <= self.r1 <= self.r2:
            raise ValueError("annulus needs 0 <= r1 <= r2")


@dataclass(frozen=True)
class PolydiscSlab:
    """``{z in unit polydisc : 0 < |z_k| < r}`` (k is 1-based)."""

    n: int
    k: int
    r: float

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError("k must lie in 1..n")
        if self.r <= 0:
            raise ValueError("r must be positive")


@dataclass(frozen=True)
class SubspaceDisc:
    """Points ``anchor + basis @ zeta`` with ``r1 <= |z - center| < r2``.

    ``basis`` has orthonormal columns; the density is a function of ``zeta``
    and is integrated against Lebesgue measure of C^m.
    """

    anchor: tuple
    basis: tuple
    center: tuple
    r1: float
    r2: float

    def local_geometry(self):
        A = np.asarray(self.anchor, dtype=complex)
        B = np.asarray(self.basis, dtype=complex)
        c = np.asarray(self.center, dtype=complex)
        zc = np.conj(B).T @ (c - A)
        d2 = float(np.sum(np.abs(c - A - B @ zc) ** 2))
        return zc, d2

    def local_radius(self, r):
        _, d2 = self.local_geometry()
        return math.sqrt(max(r * r - d2, 0.0))


@dataclass
class QuadratureResult:
    value: complex | float
    error: float
    evaluations: int
    converged: bool = True

    def __post_init__(self):
        if self.converged and not math.isfinite(self.error):
            raise ValueError("converged result must carry a finite error")

    def __add__(self, other):
        if not isinstance(other, QuadratureResult):
            return NotImplemented
        return QuadratureResult(
            self.value + other.value,
            self.error + other.error,
            self.evaluations + other.evaluations,
            self.converged and other.converged,
        )

    def scaled(self, c):
        return QuadratureResult(self.value * c, self.error * abs(c), self.evaluations, self.converged)


@dataclass
class RadialProfile:
    """Values of ``r -> f(r)`` on an increasing radius grid."""

    grid: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    label: str = ""
    evaluations: int = 0
    converged: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values)
        self.errors = np.asarray(self.errors, dtype=float)
        if self.grid.size and (np.any(self.grid <= 0) or np.any(np.diff(self.grid) <= 0)):
            raise ValueError("profile grid must be positive and strictly increasing")

    def __len__(self):
        return self.grid.size

    def rows(self):
        for r, v, e in zip(self.grid, self.values, self.errors):
            yield float(r), v, float(e)


def ball_volume(d: int, r: float = 1.0) -> float:
    """Lebesgue volume of the ball of radius ``r`` in R^d."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r**d


# ----------------------------------------------------------------------------
# angular rules


@lru_cache(maxsize=None)
def _cc_rule(level: int):
    """Clenshaw-Curtis nodes/weights on [0, 1] with 2^level + 1 points."""
    N = 2**level
    j = np.arange(N + 1)
    x = (1 - np.cos(np.pi * j / N)) / 2
    w = np.zeros(N + 1)
    for jj in range(N + 1):
        c = 1.0 if jj in (0, N) else 2.0
        s = 0.0
        for k in range(1, N // 2 + 1):
            b = 1.0 if 2 * k == N else 2.0
            s += b / (4 * k * k - 1) * math.cos(2 * k * jj * math.pi / N)
        w[jj] = c / N * (1 - s) / 2
    return x, w


def _simplex_rule(n: int, level: int, half: bool):
    """Nodes u on the (n-1)-simplex with weights; half uses the nested sub-rule."""
    if n == 1:
        return np.ones((1, 1)), np.ones(1)
    x, w = _cc_rule(level)
    if half:
        wh = np.zeros_like(w)
        if level >= 1:
            _, w2 = _cc_rule(level - 1)
            wh[::2] = w2
        else:
            wh[:] = w
        w = wh
    grids = np.meshgrid(*([x] * (n - 1)), indexing="ij")
    wgrids = np.meshgrid(*([w] * (n - 1)), indexing="ij")
    s = np.stack([g.ravel() for g in grids], axis=1)
    ws = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    u = np.zeros((s.shape[0], n))
    rest = np.ones(s.shape[0])
    jac = np.ones(s.shape[0])
    for i in range(n - 1):
        u[:, i] = rest * s[:, i]
        if i < n - 2:
            jac *= (1 - s[:, i]) ** (n - 2 - i)
        rest = rest * (1 - s[:, i])
    u[:, n - 1] = rest
    return u, ws * jac


@lru_cache(maxsize=64)
def _sphere_rule_cached(n: int, level: int, shift: tuple):
    Nt = 2**level
    u, wu = _simplex_rule(n, level, half=False)
    _, wuh = _simplex_rule(n, level, half=True)
    k = np.arange(Nt)
    thetas = [2 * np.pi * (k + shift[j]) / Nt for j in range(n)]
    tg = np.meshgrid(*thetas, indexing="ij")
    theta = np.stack([g.ravel() for g in tg], axis=1)
    even = np.ones(theta.shape[0], dtype=bool)
    kg = np.meshgrid(*([k] * n), indexing="ij")
    for g in kg:
        even &= g.ravel() % 2 == 0
    pts = np.sqrt(u)[:, None, :] * np.exp(1j * theta)[None, :, :]
    pts = pts.reshape(-1, n)
    tw = (2 * np.pi / Nt) ** n
    wfull = 2.0 ** (1 - n) * wu[:, None] * tw * np.ones(theta.shape[0])[None, :]
    twh = (2 * np.pi / max(Nt // 2, 1)) ** n if Nt > 1 else tw
    whalf = 2.0 ** (1 - n) * wuh[:, None] * np.where(even, twh, 0.0)[None, :]
    return pts, wfull.ravel(), whalf.ravel()


def sphere_rule(n: int, level: int, seed: int = 0):
    """Points on S^{2n-1} in C^n with full and nested-half weights.

    Both weight vectors sum to the sphere area ``2 pi^n / (n-1)!``.
    """
    rng = np.random.default_rng([seed, n, level])
    shift = tuple(float(s) for s in rng.random(n))
    return _sphere_rule_cached(n, level, shift)


def _angular_count(n: int, level: int) -> int:
    return (2**level + 1) ** (n - 1) * 2 ** (level * n)


def _start_level(n: int, min_points: int = 64) -> int:
    # too few directions can miss a localised integrand and report a false zero
    level = 1
    while _angular_count(n, level) < min_points:
        level += 1
    return level


# ----------------------------------------------------------------------------
# radial machinery


@lru_cache(maxsize=None)
def _gl(order: int):
    return np.polynomial.legendre.leggauss(order)


def _panel_edges(lo: float, radii: np.ndarray, hi_scale: float) -> np.ndarray:
    """Panel edges containing every radius, ratio at most PANEL_RATIO."""
    pts = sorted(set([float(r) for r in radii if r > lo]))
    if lo == 0.0:
        bottom = SHELL_DEPTH * hi_scale
        start = [bottom]
    else:
        start = [lo]
    edges = list(start)
    for r in pts:
        a = edges[-1]
        if r <= a:
            continue
        k = max(1, math.ceil(math.log(r / a) / math.log(PANEL_RATIO))) if a > 0 else 1
        edges.extend(a * (r / a) ** (np.arange(1, k + 1) / k))
        edges[-1] = r
    return np.asarray(edges)


def _radial_nodes(edges: np.ndarray, order: int):
    x, w = _gl(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w[None, :]
    return nodes, weights


def _evaluate_shells(density, center, n, rho, pts, chunk=CHUNK):
    """Density at center + rho * pts for all rho; returns (len(rho), len(pts))."""
    out = np.empty((rho.size, pts.shape[0]), dtype=complex)
    per = max(1, chunk // max(pts.shape[0], 1))
    for s in range(0, rho.size, per):
        rr = rho[s : s + per]
        z = center[None, None, :] + rr[:, None, None] * pts[None, :, :]
        vals = np.asarray(density(z.reshape(-1, n)), dtype=complex)
        out[s : s + per] = vals.reshape(rr.size, pts.shape[0])
    return out


def _fsum_complex(values) -> complex:
    values = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))


def _split_edges(edges: np.ndarray, split: int) -> np.ndarray:
    if split == 1:
        return edges
    f = np.arange(split) / split
    parts = [a * (b / a) ** f for a, b in zip(edges[:-1], edges[1:])]
    return np.concatenate(parts + [edges[-1:]])


def _profile_once(density, center, n, lo, radii, level, seed, hi_scale, split=1):
    d = 2 * n
    edges = _split_edges(_panel_edges(lo, radii, hi_scale), split)
    pts, wf, wh = sphere_rule(n, level, seed)
    nodes, wts = _radial_nodes(edges, GL_ORDER)
    lnodes, lwts = _radial_nodes(edges, GL_LOW)
    vals = _evaluate_shells(density, center, n, nodes.ravel(), pts)
    lvals = _evaluate_shells(density, center, n, lnodes.ravel(), pts)
    evals = vals.size + lvals.size
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(lvals))):
        return None, evals
    A_full = (vals @ wf).reshape(nodes.shape)
    A_half = (vals @ wh).reshape(nodes.shape)
    A_low = (lvals @ wf).reshape(lnodes.shape)
    jac = nodes ** (d - 1)
    panel_full = np.sum(wts * jac * A_full, axis=1)
    panel_half = np.sum(wts * jac * A_half, axis=1)
    panel_low = np.sum(lwts * lnodes ** (d - 1) * A_low, axis=1)

    tail = 0.0
    tail_err = 0.0
    if lo == 0.0:
        # power-law fit A(rho) ~ c rho^e on the innermost panel
        r0, r1 = nodes[0, 0], nodes[0, -1]
        a0, a1 = A_full[0, 0], A_full[0, -1]
        rb = edges[0]
        if abs(a0) > 0 and abs(a1) > 0:
            e = math.log(abs(a1) / abs(a0)) / math.log(r1 / r0)
            if d + e <= 0:
                return None, evals
            cb = a0 * (rb / r0) ** e
            tail = cb * rb**d / (d + e)
            tail_err = 0.5 * abs(tail)
    # cumulative values at requested radii; compensated sums per chunk between radii
    out_v, out_a, out_r = [], [], []
    chunks = {"f": [tail], "h": [tail], "l": [tail]}
    prev = 0
    for r in radii:
        if r <= lo:
            out_v.append(0.0)
            out_a.append(0.0)
            out_r.append(0.0)
            continue
        k = int(np.searchsorted(edges, r * (1 - 1e-14), side="left"))
        for key, arr in (("f", panel_full), ("h", panel_half), ("l", panel_low)):
            chunks[key].append(_fsum_complex(arr[prev:k]))
        prev = k
        full = _fsum_complex(chunks["f"])
        half = _fsum_complex(chunks["h"])
        low = _fsum_complex(chunks["l"])
        out_v.append(full)
        out_a.append(abs(full - half))
        out_r.append(abs(full - low) + tail_err + 4 * np.finfo(float).eps * abs(full))
    return (np.array(out_v), np.array(out_a), np.array(out_r)), evals


def _within(vals, errs, tol, atol):
    return bool(np.all(errs <= tol * np.maximum(np.abs(vals), atol)))


MAX_SPLIT = 16


def _ball_profile(density, center, n, lo, radii, tol, seed, budget, atol=1e-10):
    """Adaptive polar rule: refine the angular level or split radial panels,
    whichever error part dominates, until within tolerance or out of budget."""
    radii = np.asarray(radii, dtype=float)
    hi_scale = float(np.max(radii))
    panels = _panel_edges(lo, radii, hi_scale).size - 1
    level = _start_level(n)
    split = 1
    total = 0
    while True:
        res, evals = _profile_once(density, center, n, lo, radii, level, seed, hi_scale, split)
        total += evals
        if res is None:
            return np.full(radii.size, np.inf), np.full(radii.size, np.inf), total, False
        vals, ang, rad = res
        errs = ang + rad
        ok = _within(vals, errs, tol, atol)
        if ok:
            return vals, errs, total, True
        refine_radial = float(np.sum(rad)) >= float(np.sum(ang))
        nxt_level, nxt_split = (level, 2 * split) if refine_radial else (level + 1, split)
        if nxt_split > MAX_SPLIT or nxt_level > 9:
            nxt_level, nxt_split = (level + 1, split) if refine_radial else (level, 2 * split)
        cost = _angular_count(n, nxt_level) * panels * nxt_split * (GL_ORDER + GL_LOW)
        if nxt_split > MAX_SPLIT or nxt_level > 9 or total + cost > budget:
            return vals, errs, total, False
        level, split = nxt_level, nxt_split


def _real_if_close(v):
    v = np.asarray(v)
    if np.iscomplexobj(v) and np.all(np.abs(v.imag) <= 1e-13 * np.maximum(1.0, np.abs(v.real))):
        return v.real
    return v


def radial_profile(
    density: Callable,
    center,
    radii,
    *,
    inner: float = 0.0,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    label: str = "",
) -> RadialProfile:
    """``r -> int_{inner <= |z - center| < r} density`` on a radius grid.

    One sample pass serves all radii, so for a nonnegative density the values
    are exactly nondecreasing in ``r``.
    """
    center = np.asarray(center, dtype=complex)
    n = center.size
    vals, errs, evals, ok = _ball_profile(density, center, n, inner, radii, tol, seed, budget)
    return RadialProfile(np.asarray(radii, float), _real_if_close(vals), errs, label, evals, ok)


def integrate(
    density: Callable,
    region,
    *,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> QuadratureResult:
    """Integrate ``density`` (a vectorised callable on points) over ``region``."""
    if isinstance(region, Ball):
        region = Annulus(region.center, 0.0, region.r)
    if isinstance(region, Annulus):
        if region.r2 == region.r1:
            return QuadratureResult(0.0, 0.0, 0)
        center = np.asarray(region.center, dtype=complex)
        vals, errs, evals, ok = _ball_profile(
            density, center, center.size, region.r1, [region.r2], tol, seed, budget
        )
        return _result(vals[0], errs[0], evals, ok)
    if isinstance(region, SubspaceDisc):
        zc, _ = region.local_geometry()
        lo, hi = region.local_radius(region.r1), region.local_radius(region.r2)
        if hi <= lo:
            return QuadratureResult(0.0, 0.0, 0)
        vals, errs, evals, ok = _ball_profile(density, zc, zc.size, lo, [hi], tol, seed, budget)
        return _result(vals[0], errs[0], evals, ok)
    if isinstance(region, PolydiscSlab):
        return _integrate_slab(density, region, tol, seed, budget)
    raise TypeError(f"unsupported region {region!r}")


def _result(v, e, evals, ok):
    v = complex(v)
    if not math.isfinite(abs(v)) or not math.isfinite(e):
        return QuadratureResult(v, math.inf, evals, False)
    value = v.real if abs(v.imag) <= 1e-13 * max(1.0, abs(v.real)) else v
    return QuadratureResult(value, float(e), evals, bool(ok))


def _disc_rule(R: float, N: int, shift: float):
    """Polar product rule on |w| < R: GL8 on two radial panels times an N-point
    shifted trapezoid.  Also returns the mask of the nested half rule."""
    nodes, wts = _radial_nodes(np.array([0.0, 0.5 * R, R]), GL_ORDER)
    rho, wr = nodes.ravel(), (wts * nodes).ravel()
    theta = 2 * np.pi * (np.arange(N) + shift) / N
    z = (rho[:, None] * np.exp(1j * theta)[None, :]).ravel()
    w = (wr[:, None] * np.full(N, 2 * np.pi / N)[None, :]).ravel()
    even = np.broadcast_to((np.arange(N) % 2 == 0)[None, :], (rho.size, N)).ravel()
    return z, w, even


def slab_profile(density: Callable, n: int, k: int, radii, *, tol=DEFAULT_TOL, seed=0, budget=DEFAULT_BUDGET):
    """``r -> int over {|z_k| < r, |z_j| < 1 (j != k)} density`` for all radii in one pass.

    The k-th coordinate gets Gauss-Legendre panels aligned with the radii; the
    other coordinates a fixed polar disc rule.  Returns (values, errors,
    evaluations, converged) in the order of ``radii``.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise ValueError("slab radii must be positive")
    uniq, inv = np.unique(radii, return_inverse=True)
    R = float(uniq[-1])
    edges = _panel_edges(0.0, uniq, R)
    n8, w8 = _radial_nodes(edges, GL_ORDER)
    n6, w6 = _radial_nodes(edges, GL_LOW)
    K = n8.size + n6.size
    per_angle = K * (2 * GL_ORDER) ** (n - 1)
    N = 2 ** int(np.clip(math.floor(math.log2(max(budget / per_angle, 1.0) ** (1.0 / n))), 2, 6))
    shifts = np.random.default_rng([seed, n, k, 7]).random(n)
    # product rule over the other coordinates
    others = [_disc_rule(1.0, N, shifts[j]) for j in range(n - 1)]
    grids = np.meshgrid(*[o[0] for o in others], indexing="ij")
    Z = np.stack([g.ravel() for g in grids], axis=1) if others else np.zeros((1, 0))
    W = np.prod(np.stack([g.ravel() for g in np.meshgrid(*[o[1] for o in others], indexing="ij")], axis=1), axis=1) \
        if others else np.ones(1)
    E = np.all(np.stack([g.ravel() for g in np.meshgrid(*[o[2] for o in others], indexing="ij")], axis=1), axis=1) \
        if others else np.ones(1, dtype=bool)
    theta = 2 * np.pi * (np.arange(N) + shifts[-1]) / N
    even_k = np.arange(N) % 2 == 0
    half_scale = 2.0**n  # every angular axis keeps half of its points

    def marginals(rho):
        """Angle-and-others sums at each |z_k| = rho: full and half rules."""
        full = np.empty(rho.size, dtype=complex)
        half = np.empty(rho.size, dtype=complex)
        per = max(1, CHUNK // (N * Z.shape[0]))
        for s in range(0, rho.size, per):
            rr = rho[s : s + per]
            zk = (rr[:, None] * np.exp(1j * theta)[None, :]).reshape(-1)
            pts = np.empty((zk.size, Z.shape[0], n), dtype=complex)
            pts[:, :, k - 1] = zk[:, None]
            rest = [j for j in range(n) if j != k - 1]
            pts[:, :, rest] = Z[None, :, :]
            vals = np.asarray(density(pts.reshape(-1, n)), dtype=complex).reshape(rr.size, N, Z.shape[0])
            vals = vals * W[None, None, :] * (2 * np.pi / N)
            full[s : s + per] = vals.sum(axis=(1, 2))
            half[s : s + per] = half_scale * vals[:, even_k][:, :, E].sum(axis=(1, 2))
        return full, half

    f8, h8 = marginals(n8.ravel())
    f6, _ = marginals(n6.ravel())
    rho8 = n8.ravel()
    P8 = (w8.ravel() * rho8 * f8).reshape(n8.shape).sum(axis=1)
    P6 = (w6.ravel() * n6.ravel() * f6).reshape(n6.shape).sum(axis=1)
    Ph = (w8.ravel() * rho8 * h8).reshape(n8.shape).sum(axis=1)
    idx = np.searchsorted(edges, uniq) - 1  # last panel ending at each radius
    vals = np.array([_fsum_complex(P8[: j + 1]) for j in idx])
    rad = np.cumsum(np.abs(P8 - P6))[idx]
    ang = np.cumsum(np.abs(P8 - Ph))[idx]
    # the disc below the innermost panel, bounded by its edge value
    tail = 0.5 * edges[0] ** 2 * abs(f8[0])
    errs = rad + ang + tail + 4 * np.finfo(float).eps * np.abs(vals)
    evals = int(N * Z.shape[0] * K)
    ok = bool(np.all(errs <= tol * np.maximum(np.abs(vals), 1e-10)))
    return _real_if_close(vals)[inv], errs[inv], evals, ok


def _integrate_slab(density, region: PolydiscSlab, tol, seed, budget):
    vals, errs, evals, ok = slab_profile(density, region.n, region.k, [region.r], tol=tol, seed=seed, budget=budget)
    return _result(vals[0], errs[0], evals, ok)


def integrate_line(f: Callable, a: float, b: float, *, log_panels: bool = True, panels: int = 24, order: int = 8):
    """1-D Gauss-Legendre on [a, b] (log-spaced panels when ``a > 0``).

    Returns (value, error estimate) with the error from a half-order rule.
    """
    if b <= a:
        return 0.0, 0.0
    if log_panels and a > 0:
        edges = np.geomspace(a, b, panels + 1)
    else:
        edges = np.linspace(a, b, panels + 1)
    vals = []
    for o in (order, order // 2):
        nodes, wts = _radial_nodes(edges, o)
        fv = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
        vals.append(math.fsum((wts * fv).ravel()))
    return vals[0], abs(vals[0] - vals[1])


def integrate_sobol(
    integrand: Callable,
    dim: int,
    *,
    seed: int = 0,
    points: int = 2**14,
    replicates: int = 8,
) -> QuadratureResult:
    """Randomised QMC on the unit cube: ``integrand(u)`` gets an (m, dim) array.

    The integrand must fold in any Jacobian of its own map from the cube.
    Error is three standard errors of the replicate means.
    """
    m = int(round(math.log2(max(points, 2))))
    ss = np.random.SeedSequence([seed, dim])
    means = []
    for child in ss.spawn(replicates):
        rng = np.random.default_rng(child)
        eng = qmc.Sobol(dim, scramble=True, seed=rng)
        # scrambled points live on a 2^-bits lattice; dither within the cell so
        # the replicate means are unbiased and the spread sees the full error
        cell = 2.0 ** -getattr(eng, "bits", 30)
        u = eng.random_base2(m) + rng.random((2**m, dim)) * cell
        u = np.minimum(u, 1.0 - 2.0**-53)
        vals = np.asarray(integrand(u), dtype=complex)
        means.append(_fsum_complex(vals) / vals.size)
    means = np.array(means)
    value = _fsum_complex(means) / replicates
    se = math.sqrt(float(np.sum(np.abs(means - value) ** 2)) / (replicates * (replicates - 1)))
    return _result(value, 3 * se + 4 * np.finfo(float).eps * abs(value), replicates * 2**m, True)
