"""Coefficient masses of dilated currents in the projective chart over U."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import forms as fm
from ..currents import ChartCurrent, Current, chart_pullback, chart_region_sampler
from ..lelong import gammas
from ..quadrature import DEFAULT_BUDGET, DEFAULT_TOL, Annulus, QuadratureResult, integrate, integrate_sobol

__all__ = ["CoefficientMasses", "coefficient_mass_estimates", "chart_coefficient_pairing", "chart_bump", "index_class"]


def index_class(n: int, I, J) -> int:
    """1: n in neither index set, 2: n in both, 3: n in exactly one."""
    a, b = n in I, n in J
    if not a and not b:
        return 1
    return 2 if a and b else 3


def _line_range(line):
    c2 = float(np.sum(np.abs(np.asarray(line.slope)) ** 2))
    return 0.5, min(1.0, 1.0 / math.sqrt(1.0 + c2))


def _line_mass(C: ChartCurrent, line, g: Callable | None, tol, seed, budget) -> QuadratureResult:
    """int over the chart line inside U of |weight| (times g(w) if given) dA(t)."""
    lo, hi = _line_range(line)
    if hi <= lo:
        return QuadratureResult(0.0, 0.0, 0)
    slope = np.asarray(line.slope, dtype=complex)

    def dens(t):
        wt = np.abs(C.line_weight(line, t[:, 0])) if g is None else C.line_weight(line, t[:, 0])
        if g is None:
            return wt
        w = np.concatenate([np.broadcast_to(slope, (t.shape[0], slope.size)), t], axis=1)
        return wt * g(w)

    return integrate(dens, Annulus((0.0,), lo, hi), tol=tol, seed=seed, budget=budget)


@dataclass
class CoefficientMasses:
    a: complex
    masses: dict  # class -> QuadratureResult
    gamma_sum: float
    gamma_error: float
    per_index: dict = field(default_factory=dict)

    def ratio(self, cls: int) -> float:
        m = float(np.real(self.masses[cls].value))
        if cls == 1:
            return m
        g = self.gamma_sum if cls == 2 else math.sqrt(max(self.gamma_sum, 0.0))
        return m / g if g > 0 else (0.0 if m == 0 else math.inf)


def coefficient_mass_estimates(
    T: Current,
    a_values,
    *,
    points: int = 2**14,
    tol=DEFAULT_TOL,
    seed: int = 0,
    budget=DEFAULT_BUDGET,
) -> list[CoefficientMasses]:
    """``int_U |T^a_{I,J}|`` grouped by how the index n meets (I, J), for each a.

    Each entry also carries ``(gamma_T + gamma_ddc)(|a|)`` so the ratios
    against the three bounds can be monitored along the sequence.
    """
    n, q = T.n, T.q
    idx = fm.multi_indices(n, q)
    out = []
    for a in a_values:
        C = chart_pullback(T, a)
        per = {}
        masses = {1: QuadratureResult(0.0, 0.0, 0), 2: QuadratureResult(0.0, 0.0, 0), 3: QuadratureResult(0.0, 0.0, 0)}
        if C.ambient:
            dim, mapping = chart_region_sampler(n)
            for i, I in enumerate(idx):
                for j, J in enumerate(idx):
                    def integrand(u, i=i, j=j):
                        w, wt = mapping(u)
                        return np.abs(C.coefficients(w)[:, i, j]) * wt

                    res = integrate_sobol(integrand, dim, seed=seed, points=points)
                    per[(I.indices, J.indices)] = res
                    cls = index_class(n, I, J)
                    masses[cls] = masses[cls] + res
        for line in C.lines:
            # the line {w' = c} carries only the dw'-block, n in neither index set
            res = _line_mass(C, line, None, tol, seed, budget)
            key = (tuple(range(1, n)), tuple(range(1, n)))
            per[key] = per.get(key, QuadratureResult(0.0, 0.0, 0)) + res
            masses[1] = masses[1] + res
        gT, gD = gammas(T, abs(a), tol=tol, seed=seed, budget=budget) if T.p >= 1 else (None, None)
        gs = float(gT.value + gD.value)
        ge = float(gT.error + gD.error)
        out.append(CoefficientMasses(complex(a), masses, abs(gs), ge, per))
    return out


def chart_bump(n: int, center=None, radius: float = 0.2) -> Callable:
    """Smooth bump in w-coordinates supported in a small ball inside U."""
    c = np.asarray((0.0,) * (n - 1) + (0.75,) if center is None else center, dtype=complex)

    def g(w):
        t = np.linalg.norm(w - c[None, :], axis=1) / radius
        out = np.zeros(w.shape[0])
        m = t < 1
        out[m] = np.exp(1.0 - 1.0 / (1.0 - t[m] ** 2))
        return out

    return g


def chart_coefficient_pairing(
    T: Current,
    I,
    J,
    a: complex,
    phi: Callable | None = None,
    *,
    points: int = 2**14,
    tol=DEFAULT_TOL,
    seed: int = 0,
    budget=DEFAULT_BUDGET,
) -> QuadratureResult:
    """``f_{I,J}(a) = int_U T^a_{I,J} phi dtau`` for index sets avoiding n."""
    n = T.n
    I = tuple(I)
    J = tuple(J)
    if n in I or n in J:
        raise ValueError("index sets must avoid the last coordinate")
    phi = chart_bump(n) if phi is None else phi
    C = chart_pullback(T, a)
    look = {m.indices: k for k, m in enumerate(fm.multi_indices(n, T.q))}
    i, j = look[I], look[J]
    total = QuadratureResult(0.0, 0.0, 0)
    if C.ambient:
        dim, mapping = chart_region_sampler(n)

        def integrand(u):
            w, wt = mapping(u)
            return C.coefficients(w)[:, i, j] * phi(w) * wt

        total = total + integrate_sobol(integrand, dim, seed=seed, points=points)
    if I == J == tuple(range(1, n)):
        for line in C.lines:
            total = total + _line_mass(C, line, phi, tol, seed, budget)
    return total
