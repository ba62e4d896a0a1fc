"""Exterior algebra of (s, t)-forms on open sets of C^n.

A :class:`Form` stores *raw* coefficient fields ``c_{I,J}`` on the basis
``dz_I ^ dzbar_J``.  The operator ``dd^c`` is ``(i / 2 pi) d dbar``, so that
``beta = dd^c |z|^2`` satisfies ``int_{B(r)} beta^n = r^{2n}``.

Coefficients "in the weighted convention" of a (q, q)-form are obtained by
dividing out the prefactor ``2^{-q} i^{q^2}``; see :func:`weighted_coefficients`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "MultiIndex",
    "Form",
    "SingularPointError",
    "DegreeError",
    "multi_indices",
    "constant_form",
    "beta",
    "alpha",
    "wedge",
    "power",
    "pullback",
    "dilate_form",
    "scale_form",
    "add_forms",
    "ddc_form",
    "top_density",
    "weighted_coefficients",
    "is_hermitian",
    "demailly_check",
    "DemaillyReport",
    "positivity_probe",
    "random_positive_form",
]

DDC = 1j / (2.0 * math.pi)


class SingularPointError(ValueError):
    """Raised when a form is evaluated on its declared singular locus."""


class DegreeError(ValueError):
    """Raised when a wedge product would exceed bidegree (n, n)."""


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Strictly increasing tuple of 1-based coordinate indices."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"multi-index must be strictly increasing: {idx}")
        if idx and idx[0] < 1:
            raise ValueError(f"multi-index entries start at 1: {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_unsorted(cls, seq: Sequence[int]) -> tuple["MultiIndex", int]:
        """Sort ``seq`` and return the index with the permutation sign.

        A repeated entry gives sign 0 (the wedge vanishes).
        """
        seq = list(seq)
        if len(set(seq)) != len(seq):
            return cls(tuple(sorted(set(seq)))), 0
        return cls(tuple(sorted(seq))), _perm_sign(seq)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, k):
        return k in self.indices

    def __iter__(self):
        return iter(self.indices)


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def multi_indices(n: int, q: int) -> tuple[MultiIndex, ...]:
    """All increasing multi-indices of length ``q`` in ``1..n`` (lexicographic)."""
    return tuple(MultiIndex(c) for c in itertools.combinations(range(1, n + 1), q))


@lru_cache(maxsize=None)
def _index_lookup(n: int, q: int) -> dict[tuple[int, ...], int]:
    return {m.indices: k for k, m in enumerate(multi_indices(n, q))}


@lru_cache(maxsize=None)
def _merge_table(n: int, a: int, b: int):
    """Entries (i, k, out, sign) with dz_I ^ dz_K = sign dz_{out}."""
    lookup = _index_lookup(n, a + b)
    table = []
    for i, I in enumerate(multi_indices(n, a)):
        for k, K in enumerate(multi_indices(n, b)):
            merged, sign = MultiIndex.from_unsorted(I.indices + K.indices)
            if sign:
                table.append((i, k, lookup[merged.indices], sign))
    return tuple(table)


Coefficients = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Form:
    """Form of bidegree ``(s, t)`` on C^n.

    ``coeffs`` maps an ``(m, n)`` complex array of points to an array of shape
    ``(m, C(n, s), C(n, t))`` holding the raw coefficients.  ``singular`` lists
    the points where the coefficient fields may blow up.
    """

    n: int
    s: int
    t: int
    coeffs: Coefficients = field(repr=False, compare=False)
    singular: tuple[tuple[complex, ...], ...] = ()
    guard: float = 1e-12

    @property
    def shape(self):
        return (math.comb(self.n, self.s), math.comb(self.n, self.t))

    @property
    def degree(self) -> int:
        return self.s + self.t

    def __call__(self, z) -> np.ndarray:
        z = _as_points(z, self.n)
        for sp in self.singular:
            d = np.linalg.norm(z - np.asarray(sp, dtype=complex), axis=1)
            if np.any(d <= self.guard):
                raise SingularPointError(f"evaluation at singular point {sp}")
        out = np.asarray(self.coeffs(z), dtype=complex)
        return np.broadcast_to(out, (z.shape[0],) + self.shape)

    def coefficient(self, I, J, z) -> np.ndarray:
        I = I if isinstance(I, MultiIndex) else MultiIndex(tuple(I))
        J = J if isinstance(J, MultiIndex) else MultiIndex(tuple(J))
        i = _index_lookup(self.n, self.s)[I.indices]
        j = _index_lookup(self.n, self.t)[J.indices]
        return self(z)[:, i, j]


def _as_points(z, n) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.ndim == 1:
        z = z[None, :]
    if z.shape[-1] != n:
        raise ValueError(f"expected points in C^{n}, got shape {z.shape}")
    return z


def constant_form(n: int, s: int, t: int, values, singular=()) -> Form:
    """Form with constant raw coefficients ``values`` of shape (C(n,s), C(n,t))."""
    values = np.asarray(values, dtype=complex).reshape(math.comb(n, s), math.comb(n, t))
    return Form(n, s, t, lambda z: values[None, :, :], tuple(singular))


def beta(z0=None, n: int | None = None) -> Form:
    """``dd^c |z - z0|^2``; translation invariant, so ``z0`` only fixes ``n``."""
    n = _dim(z0, n)
    return constant_form(n, 1, 1, DDC * np.eye(n))


def alpha(z0=None, n: int | None = None) -> Form:
    """``dd^c log |z - z0|^2``, singular at ``z0``."""
    n = _dim(z0, n)
    center = np.zeros(n, dtype=complex) if z0 is None else np.asarray(z0, dtype=complex)

    def coeffs(z):
        w = z - center
        r2 = np.sum(np.abs(w) ** 2, axis=1)[:, None, None]
        outer = np.conj(w)[:, :, None] * w[:, None, :]
        return DDC * (np.eye(n)[None] * r2 - outer) / r2**2

    return Form(n, 1, 1, coeffs, (tuple(center),))


def _dim(z0, n):
    if n is None:
        if z0 is None:
            raise ValueError("need z0 or n")
        n = len(z0)
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return n


def _wedge_arrays(n, a, b, s1, t1, s2, t2) -> np.ndarray:
    m = max(a.shape[0], b.shape[0])
    out = np.zeros((m, math.comb(n, s1 + s2), math.comb(n, t1 + t2)), dtype=complex)
    # dz_I ^ dzb_J ^ dz_K ^ dzb_L = (-1)^{t1 s2} dz_I ^ dz_K ^ dzb_J ^ dzb_L
    base = -1 if (t1 * s2) % 2 else 1
    holo = _merge_table(n, s1, s2)
    anti = _merge_table(n, t1, t2)
    for i, k, ik, sh in holo:
        for j, l, jl, sa in anti:
            out[:, ik, jl] += (base * sh * sa) * a[:, i, j] * b[:, k, l]
    return out


def wedge(F: Form, G: Form) -> Form:
    """Exterior product ``F ^ G``; singular loci are merged."""
    if F.n != G.n:
        raise ValueError("forms live on different spaces")
    n = F.n
    s, t = F.s + G.s, F.t + G.t
    if s > n or t > n:
        raise DegreeError(f"bidegree ({s},{t}) exceeds ({n},{n})")

    def coeffs(z):
        return _wedge_arrays(n, F(z), G(z), F.s, F.t, G.s, G.t)

    return Form(n, s, t, coeffs, _merge_singular(F.singular, G.singular))


def _merge_singular(*groups):
    seen = []
    for g in groups:
        for p in g:
            if p not in seen:
                seen.append(p)
    return tuple(seen)


def power(F: Form, k: int) -> Form:
    """``F^k``; ``F^0`` is the constant function 1."""
    if k < 0:
        raise ValueError("negative power")
    result = constant_form(F.n, 0, 0, [[1.0]])
    for _ in range(k):
        result = wedge(result, F)
    return result


def scale_form(F: Form, c) -> Form:
    """Multiply by a scalar or by a scalar field ``c(z)``."""
    if callable(c):
        return Form(F.n, F.s, F.t, lambda z: np.asarray(c(z))[:, None, None] * F(z), F.singular)
    return Form(F.n, F.s, F.t, lambda z: c * F(z), F.singular)


def add_forms(*forms: Form) -> Form:
    F0 = forms[0]
    if any((F.n, F.s, F.t) != (F0.n, F0.s, F0.t) for F in forms):
        raise ValueError("cannot add forms of different bidegree")
    singular = _merge_singular(*(F.singular for F in forms))
    return Form(F0.n, F0.s, F0.t, lambda z: sum(F(z) for F in forms), singular)


def _minors(jac: np.ndarray, rows: tuple[MultiIndex, ...], cols: tuple[MultiIndex, ...]):
    """Array of minors det(jac[:, I, K]) of shape (m, len(rows), len(cols))."""
    m = jac.shape[0]
    out = np.empty((m, len(rows), len(cols)), dtype=complex)
    if rows and len(rows[0]) == 0:
        out[...] = 1.0
        return out
    for a, I in enumerate(rows):
        ri = [i - 1 for i in I]
        for b, K in enumerate(cols):
            ck = [k - 1 for k in K]
            out[:, a, b] = np.linalg.det(jac[:, ri][:, :, ck])
    return out


def pullback(F: Form, phi: Callable, jac: Callable, m: int, singular=()) -> Form:
    """Pull ``F`` back by a holomorphic map ``phi: C^m -> C^n``.

    ``jac(w)`` returns the complex Jacobian ``d phi_j / d w_k`` with shape
    ``(pts, n, m)``.
    """
    if F.s > m or F.t > m:
        return constant_form(m, min(F.s, m), min(F.t, m), 0.0)
    rows_s, rows_t = multi_indices(F.n, F.s), multi_indices(F.n, F.t)
    cols_s, cols_t = multi_indices(m, F.s), multi_indices(m, F.t)

    def coeffs(w):
        z = phi(w)
        J = np.asarray(jac(w), dtype=complex)
        if J.ndim == 2:
            J = np.broadcast_to(J, (w.shape[0],) + J.shape)
        A = _minors(J, rows_s, cols_s)
        B = np.conj(_minors(J, rows_t, cols_t))
        c = F(z)
        return np.einsum("pik,pij,pjl->pkl", A, c, B)

    return Form(m, F.s, F.t, coeffs, tuple(singular))


def dilate_form(F: Form, a: complex) -> Form:
    """``h_a^* F`` for ``h_a(z) = a z``: coefficients ``a^s abar^t c(a z)``."""
    if a == 0:
        raise ValueError("dilatation factor must be nonzero")
    factor = a**F.s * np.conj(a) ** F.t
    singular = tuple(tuple(np.asarray(p) / a) for p in F.singular)
    return Form(F.n, F.s, F.t, lambda z: factor * F(a * z), singular)


def ddc_form(F: Form, step: float = 1e-4, richardson: bool = False) -> Form:
    """``dd^c F`` by central finite differences on the coefficient fields.

    The step is ``step`` times the local scale ``min(1, distance to the
    singular locus)``.  With ``richardson`` the h and h/2 estimates are
    combined to cancel the O(h^2) term.
    """
    n = F.n
    if F.s + 1 > n or F.t + 1 > n:
        raise DegreeError("dd^c would exceed top degree")
    holo = _merge_table(n, 1, F.s)
    anti = _merge_table(n, 1, F.t)
    base = -1 if F.s % 2 else 1

    def hessian(z, h):
        # mixed derivatives d_k dbar_l of every coefficient
        m = z.shape[0]
        e = np.eye(n)
        hcol = h[:, None]
        dirs = [e[j] for j in range(n)] + [1j * e[j] for j in range(n)]
        f0 = F(z)
        d2 = {}
        for a in range(2 * n):
            for b in range(a, 2 * n):
                if a == b:
                    fp = F(z + hcol * dirs[a])
                    fm = F(z - hcol * dirs[a])
                    val = (fp - 2 * f0 + fm) / (h**2)[:, None, None]
                else:
                    fpp = F(z + hcol * (dirs[a] + dirs[b]))
                    fpm = F(z + hcol * (dirs[a] - dirs[b]))
                    fmp = F(z - hcol * (dirs[a] - dirs[b]))
                    fmm = F(z - hcol * (dirs[a] + dirs[b]))
                    val = (fpp - fpm - fmp + fmm) / (4 * h**2)[:, None, None]
                d2[a, b] = d2[b, a] = val
        H = np.empty((m, n, n) + F.shape, dtype=complex)
        for k in range(n):
            for l in range(n):
                xx = d2[k, l]
                yy = d2[n + k, n + l]
                xy = d2[k, n + l]
                yx = d2[n + k, l]
                H[:, k, l] = 0.25 * ((xx + yy) + 1j * (xy - yx))
        return H

    def local_step(z):
        scale = np.ones(z.shape[0])
        for sp in F.singular:
            d = np.linalg.norm(z - np.asarray(sp, dtype=complex), axis=1)
            scale = np.minimum(scale, d)
        return step * scale

    def coeffs(z):
        h = local_step(z)
        H = hessian(z, h)
        if richardson:
            H = (4 * hessian(z, h / 2) - H) / 3
        out = np.zeros((z.shape[0], math.comb(n, F.s + 1), math.comb(n, F.t + 1)), dtype=complex)
        for k, i, ki, sh in holo:
            for l, j, lj, sa in anti:
                out[:, ki, lj] += (DDC * base * sh * sa) * H[:, k, l, i, j]
        return out

    return Form(n, F.s + 1, F.t + 1, coeffs, F.singular)


def top_density(F: Form, z) -> np.ndarray:
    """Real density of a top-degree form against Lebesgue measure on C^n."""
    if F.s != F.n or F.t != F.n:
        raise DegreeError("top_density needs bidegree (n, n)")
    n = F.n
    c = F(z)[:, 0, 0]
    # dz_1..dz_n ^ dzb_1..dzb_n = (-1)^{n(n-1)/2} (-2i)^n dV
    factor = (-1) ** (n * (n - 1) // 2) * (-2j) ** n
    return np.real(factor * c)


def weighted_coefficients(F: Form, z) -> np.ndarray:
    """Coefficients S_{I,J} with F = 2^{-q} i^{q^2} sum S_{I,J} dz_I ^ dzb_J."""
    if F.s != F.t:
        raise DegreeError("weighted coefficients need a (q, q)-form")
    q = F.s
    return F(z) / (2.0**-q * 1j ** (q * q))


def is_hermitian(F: Form, z, rtol: float = 1e-9) -> bool:
    S = weighted_coefficients(F, z)
    diff = np.abs(S - np.conj(np.swapaxes(S, 1, 2)))
    return bool(np.all(diff <= rtol * max(1.0, float(np.max(np.abs(S))))))


@dataclass
class DemaillyReport:
    lhs: np.ndarray
    rhs: np.ndarray
    ok: bool
    pairs: tuple[tuple[MultiIndex, MultiIndex], ...]

    @property
    def violations(self) -> int:
        return int(np.sum(self.lhs > self.rhs * (1 + 1e-9) + 1e-12))


def demailly_check(S: Form, lam, z, rtol: float = 1e-9, weight_power: int = 2) -> DemaillyReport:
    """Off-diagonal coefficient bound for a positive (q, q)-form at one point.

    For every pair (I, J) checks
    ``lam_I lam_J |S_IJ| <= 2^q sum_{M in M_IJ} lam_M^weight_power S_MM``
    where ``M_IJ = {M : |M| = q, I & J <= M <= I | J}``.  Homogeneity in
    ``lam`` requires ``weight_power=2``; 1 is the literal unsquared reading.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (S.n,) or np.any(lam <= 0):
        raise ValueError("lambda must be a strictly positive vector of length n")
    if not is_hermitian(S, z):
        raise ValueError("coefficient matrix is not Hermitian")
    q = S.s
    idx = multi_indices(S.n, q)
    coef = weighted_coefficients(S, z)[0]
    lam_of = {I: float(np.prod(lam[[i - 1 for i in I]])) for I in idx}
    diag = {I: float(np.real(coef[k, k])) for k, I in enumerate(idx)}
    lhs, rhs, pairs = [], [], []
    for a, I in enumerate(idx):
        for b, J in enumerate(idx):
            inter, union = set(I) & set(J), set(I) | set(J)
            total = sum(
                lam_of[M] ** weight_power * diag[M]
                for M in idx
                if inter <= set(M) <= union
            )
            lhs.append(lam_of[I] * lam_of[J] * abs(coef[a, b]))
            rhs.append(2.0**q * total)
            pairs.append((I, J))
    lhs, rhs = np.array(lhs), np.array(rhs)
    scale = max(1.0, float(np.max(np.abs(rhs))))
    ok = bool(np.all(lhs <= rhs + rtol * scale))
    return DemaillyReport(lhs, rhs, ok, tuple(pairs))


def random_positive_form(n: int, q: int, rng: np.random.Generator, terms: int = 3) -> Form:
    """Constant form sum_i c_i i^{q^2} v_i ^ conj(v_i) with c_i > 0.

    Each ``v_i`` is a random (q, 0)-form (not necessarily decomposable).
    """
    N = math.comb(n, q)
    total = np.zeros((N, N), dtype=complex)
    for _ in range(terms):
        c = rng.exponential()
        v = rng.normal(size=N) + 1j * rng.normal(size=N)
        total += c * (1j ** (q * q)) * np.outer(v, np.conj(v))
    return constant_form(n, q, q, total)


def _simple_positive(n: int, p: int, rng: np.random.Generator) -> Form:
    """i v_1 ^ vb_1 ^ ... ^ i v_p ^ vb_p for random (1, 0)-forms v_k."""
    result = constant_form(n, 0, 0, [[1.0]])
    for _ in range(p):
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        result = wedge(result, constant_form(n, 1, 1, 1j * np.outer(v, np.conj(v))))
    return result


def positivity_probe(S: Form, z, trials: int = 32, seed: int = 0, rtol: float = 1e-9) -> bool:
    """Pair ``S`` with random simple positive forms of complementary degree at ``z``."""
    rng = np.random.default_rng(seed)
    p = S.n - S.s
    z = _as_points(z, S.n)
    for _ in range(trials):
        psi = _simple_positive(S.n, p, rng)
        top = wedge(S, psi)
        c = top(z)[:, 0, 0] * (-1) ** (S.n * (S.n - 1) // 2) * (-2j) ** S.n
        scale = max(1.0, float(np.max(np.abs(c))))
        if np.any(np.real(c) < -rtol * scale):
            return False
    return True
