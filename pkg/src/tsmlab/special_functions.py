"""Laguerre polynomials, radial eigenfunctions, the special Hermite family
on C, and bigraded solid harmonics with exact rational coefficients.

Frozen conventions
------------------
* ``laguerre_function(LaguerreSpec(k, n-1), rho)`` is
  ``L_k^(n-1)(rho^2/2) exp(-rho^2/4)``.  With this scaling the operator
  ``-Laplacian + |z|^2/4`` acting on the induced radial field on C^n has
  eigenvalue ``2k + n``.
* ``special_hermite_basis`` on C uses, for beta >= alpha,

      phi_ab(z) = (2 pi)^(-1/2) sqrt(a!/b!) (i conj(z)/sqrt(2))^(b-a)
                  L_a^(b-a)(|z|^2/2) exp(-|z|^2/4)

  and ``phi_ab = conj(phi_ba)`` for alpha > beta.  The family is
  orthonormal in L^2(C, Lebesgue); the diagonal element of index (k, k)
  equals ``(2 pi)^(-1/2)`` times the degree-k radial eigenfunction.  With
  the twisted convolution sign of ``constants.TWIST_SIGN`` the degree-k
  projection of a field lands in span{phi_(k, m) : m >= 0}, i.e. the
  *first* index is the spectral one.  Any phase change breaks the last
  property silently, so it is pinned by tests.
* Solid harmonic bases are ordered by the lexicographic order on the
  concatenated exponent pair (alpha, beta), largest first, and kernel
  vectors are produced by exact Gauss-Jordan elimination over Fractions:
  the output is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

SQRT2 = math.sqrt(2.0)
_NORM_2PI = (2.0 * math.pi) ** (-0.5)


@dataclass(frozen=True)
class LaguerreSpec:
    """Degree and order of a generalized Laguerre polynomial L_k^alpha."""

    degree: int
    order: int

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError(f"degree must be >= 0, got {self.degree}")
        if self.order < 0:
            raise ValueError(f"order must be >= 0, got {self.order}")


def laguerre_polynomial(spec: LaguerreSpec, x):
    """Evaluate L_k^alpha(x) by the upward three-term recurrence in k.

    The recurrence
        (k+1) L_(k+1) = (2k+1+alpha-x) L_k - (k+alpha) L_(k-1)
    is stable for x >= 0 at the degrees used here.  x may be a scalar or
    an ndarray; negative or non-finite inputs are rejected.
    """
    arr = np.asarray(x, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr < 0.0)):
        raise ValueError("laguerre_polynomial requires finite x >= 0")
    k, alpha = spec.degree, spec.order
    prev = np.ones_like(arr)
    if k == 0:
        out = prev
    else:
        cur = 1.0 + alpha - arr
        for j in range(1, k):
            prev, cur = cur, ((2 * j + 1 + alpha - arr) * cur - (j + alpha) * prev) / (j + 1)
        out = cur
    return out if arr.ndim else float(out)


def laguerre_function(spec: LaguerreSpec, rho):
    """L_k^alpha(rho^2/2) exp(-rho^2/4) for rho >= 0.

    For alpha = n-1 this is the degree-k radial eigenfunction on C^n
    (eigenvalue 2k+n of -Laplacian + |z|^2/4); general alpha appears in
    the sector expansions of spectral projections.
    """
    r = np.asarray(rho, dtype=float)
    if r.size and (not np.all(np.isfinite(r)) or np.any(r < 0.0)):
        raise ValueError("laguerre_function requires finite rho >= 0")
    t = 0.5 * r * r
    out = laguerre_polynomial(spec, t) * np.exp(-0.5 * t)
    return out if r.ndim else float(out)


def radial_eigenfunction_origin(n: int, k: int) -> float:
    """Value at rho = 0: L_k^(n-1)(0) = binom(k+n-1, k)."""
    return float(math.comb(k + n - 1, k))


@dataclass(frozen=True)
class SpecialHermiteIndex:
    alpha: int
    beta: int

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("special Hermite indices must be >= 0")


def special_hermite_basis(idx: SpecialHermiteIndex, z):
    """phi_(alpha,beta)(z) on C, vectorized over a complex array z."""
    a, b = idx.alpha, idx.beta
    zz = np.asarray(z, dtype=complex)
    if b < a:
        return np.conj(special_hermite_basis(SpecialHermiteIndex(b, a), zz))
    d = b - a
    t = 0.5 * (zz.real ** 2 + zz.imag ** 2)
    amp = math.exp(0.5 * (math.lgamma(a + 1) - math.lgamma(b + 1)))
    out = _NORM_2PI * amp * (1j * np.conj(zz) / SQRT2) ** d
    out = out * laguerre_polynomial(LaguerreSpec(a, d), t) * np.exp(-0.5 * t)
    return out


def special_hermite_indices(max_degree: int) -> list[SpecialHermiteIndex]:
    """All (alpha, beta) with both indices <= max_degree, row-major in alpha.
    This is the frozen column order of ``special_hermite_matrix``."""
    return [SpecialHermiteIndex(a, b)
            for a in range(max_degree + 1) for b in range(max_degree + 1)]


def special_hermite_matrix(z, max_degree: int) -> np.ndarray:
    """phi_(a,b)(z_m) for all a, b <= max_degree at once: (len(z), (K+1)^2).

    Runs one Laguerre degree recurrence per angular order instead of one per
    basis element; columns follow ``special_hermite_indices``."""
    zz = np.asarray(z, dtype=complex).reshape(-1)
    K = max_degree
    t = 0.5 * (zz.real ** 2 + zz.imag ** 2)
    gauss = np.exp(-0.5 * t)
    out = np.empty((zz.shape[0], (K + 1) ** 2), dtype=complex)
    for d in range(K + 1):
        base = _NORM_2PI * (1j * np.conj(zz) / SQRT2) ** d * gauss
        prev = np.ones_like(t)
        cur = 1.0 + d - t
        for a in range(K + 1 - d):
            if a == 0:
                lag = prev
            elif a == 1:
                lag = cur
            else:
                prev, cur = cur, ((2 * (a - 1) + 1 + d - t) * cur
                                  - (a - 1 + d) * prev) / a
                lag = cur
            amp = math.exp(0.5 * (math.lgamma(a + 1) - math.lgamma(a + d + 1)))
            vals = amp * base * lag
            out[:, a * (K + 1) + (a + d)] = vals
            if d:
                out[:, (a + d) * (K + 1) + a] = np.conj(vals)
    return out


# ---------------------------------------------------------------------------
# bigraded solid harmonics


def _exponents(total: int, nvars: int) -> list[tuple[int, ...]]:
    """All exponent tuples of the given total degree, lexicographically
    descending (z_1-heavy first).  Deterministic basis ordering hangs on it."""
    if nvars == 1:
        return [(total,)]
    out = []
    for first in range(total, -1, -1):
        for rest in _exponents(total - first, nvars - 1):
            out.append((first,) + rest)
    return out


def _fraction_kernel(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Kernel basis of the matrix with the given rows, exact arithmetic.

    Gauss-Jordan with leftmost-pivot selection; free columns generate the
    kernel vectors in ascending column order.
    """
    mat = [row[:] for row in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [vi - f * vr for vi, vr in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    free = [c for c in range(ncols) if c not in pivots]
    kernel = []
    for fcol in free:
        vec = [Fraction(0)] * ncols
        vec[fcol] = Fraction(1)
        for prow, pcol in enumerate(pivots):
            vec[pcol] = -mat[prow][fcol]
        kernel.append(vec)
    return kernel


@dataclass
class SolidHarmonic:
    """A bigraded polynomial P(z) = sum c_(alpha,beta) z^alpha conj(z)^beta
    with Delta P = 0, Delta = 4 sum_j d^2/(dz_j dconj(z_j)).

    Coefficients are exact Fractions keyed by the exponent pair."""

    p: int
    q: int
    dimension: int
    coefficients: dict[tuple[tuple[int, ...], tuple[int, ...]], Fraction] = field(default_factory=dict)

    def evaluate(self, z):
        """P at points of shape (..., n) complex."""
        pts = np.asarray(z, dtype=complex)
        if pts.shape[-1] != self.dimension:
            raise ValueError(f"points must have last axis {self.dimension}")
        out = np.zeros(pts.shape[:-1], dtype=complex)
        zc = np.conj(pts)
        for (al, be), c in self.coefficients.items():
            term = np.full(pts.shape[:-1], complex(c))
            for j in range(self.dimension):
                if al[j]:
                    term = term * pts[..., j] ** al[j]
                if be[j]:
                    term = term * zc[..., j] ** be[j]
            out += term
        return out

    def laplacian_coefficients(self) -> dict:
        """Exact coefficients of Delta P (empty dict iff harmonic)."""
        out: dict = {}
        for (al, be), c in self.coefficients.items():
            for j in range(self.dimension):
                if al[j] and be[j]:
                    al2 = al[:j] + (al[j] - 1,) + al[j + 1:]
                    be2 = be[:j] + (be[j] - 1,) + be[j + 1:]
                    out[(al2, be2)] = out.get((al2, be2), Fraction(0)) + 4 * al[j] * be[j] * c
        return {k: v for k, v in out.items() if v != 0}

    @property
    def is_harmonic(self) -> bool:
        return not self.laplacian_coefficients()


def solid_harmonic_basis(p: int, q: int, n: int) -> list[SolidHarmonic]:
    """Basis of the harmonic subspace of bidegree-(p, q) polynomials on C^n.

    The Laplacian is a linear map between monomial coefficient lattices, so
    the basis is its exact kernel.  May be empty: for n = 1 the space is
    nonzero only when min(p, q) = 0.
    """
    if p < 0 or q < 0 or n < 1:
        raise ValueError("need p, q >= 0 and n >= 1")
    mono_p = _exponents(p, n)
    mono_q = _exponents(q, n)
    cols = [(al, be) for al in mono_p for be in mono_q]
    if p == 0 or q == 0:
        return [SolidHarmonic(p, q, n, {pair: Fraction(1)}) for pair in cols]

    rows_index = {pair: i for i, pair in enumerate(
        (al, be) for al in _exponents(p - 1, n) for be in _exponents(q - 1, n))}
    rows = [[Fraction(0)] * len(cols) for _ in rows_index]
    for ci, (al, be) in enumerate(cols):
        for j in range(n):
            if al[j] and be[j]:
                al2 = al[:j] + (al[j] - 1,) + al[j + 1:]
                be2 = be[:j] + (be[j] - 1,) + be[j + 1:]
                rows[rows_index[(al2, be2)]][ci] += 4 * al[j] * be[j]
    kernel = _fraction_kernel(rows, len(cols))
    basis = []
    for vec in kernel:
        coeffs = {cols[i]: v for i, v in enumerate(vec) if v != 0}
        basis.append(SolidHarmonic(p, q, n, coeffs))
    return basis
