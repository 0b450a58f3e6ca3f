"""Laguerre and special Hermite building blocks.

The Laguerre recurrence is checked against an independent closed-form
series oracle (exact binomial coefficients, Horner evaluation) and against
scipy, so a defect in the recurrence cannot hide.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.special

from tsmlab.quadrature import plane_rule
from tsmlab.special_functions import (LaguerreSpec, SpecialHermiteIndex,
                                      laguerre_function, laguerre_polynomial,
                                      radial_eigenfunction_origin,
                                      solid_harmonic_basis,
                                      special_hermite_basis,
                                      special_hermite_indices,
                                      special_hermite_matrix)


def laguerre_series_oracle(k: int, alpha: int, x: np.ndarray) -> np.ndarray:
    """L_k^alpha(x) = sum_j (-1)^j C(k+alpha, k-j) x^j / j!.

    Evaluated in exact rational arithmetic (the grid points are dyadic), so
    the alternating series loses nothing to cancellation; rounding happens
    once, at the end."""
    coeffs = [Fraction((-1) ** j * math.comb(k + alpha, k - j), math.factorial(j))
              for j in range(k + 1)]
    out = []
    for xv in np.asarray(x, dtype=float).ravel():
        xf = Fraction(xv)
        acc = Fraction(0)
        for c in reversed(coeffs):
            acc = acc * xf + c
        out.append(float(acc))
    return np.asarray(out).reshape(np.shape(x))


XGRID = np.linspace(0.0, 40.0, 81)


@pytest.mark.parametrize("alpha", [0, 1, 2, 3])
def test_laguerre_recurrence_vs_series_oracle(alpha):
    # error scaled by the sup of |L| on the grid: pointwise-relative error
    # at the zero crossings only measures rounding of the working amplitude
    for k in range(13):
        got = laguerre_polynomial(LaguerreSpec(k, alpha), XGRID)
        ref = laguerre_series_oracle(k, alpha, XGRID)
        scale = max(1.0, float(np.max(np.abs(ref))))
        assert np.max(np.abs(got - ref)) < 1e-12 * scale


def test_laguerre_vs_scipy():
    # scipy rounds a little worse than the recurrence near sign changes;
    # the strict comparison lives in the exact-series test above
    for k in [0, 1, 4, 9, 15]:
        for alpha in [0, 1, 3]:
            got = laguerre_polynomial(LaguerreSpec(k, alpha), XGRID)
            ref = scipy.special.eval_genlaguerre(k, alpha, XGRID)
            scale = np.maximum(1.0, np.abs(ref))
            assert np.max(np.abs(got - ref) / scale) < 1e-9


def test_laguerre_rejects_bad_spec():
    with pytest.raises(ValueError):
        LaguerreSpec(-1, 0)
    with pytest.raises(ValueError):
        LaguerreSpec(2, -1)


def test_laguerre_function_value_and_origin():
    rho = np.linspace(0.0, 8.0, 33)
    for n in (1, 2):
        for k in range(6):
            got = laguerre_function(LaguerreSpec(k, n - 1), rho)
            ref = (laguerre_series_oracle(k, n - 1, 0.5 * rho ** 2)
                   * np.exp(-0.25 * rho ** 2))
            assert np.max(np.abs(got - ref)) < 1e-12
            # L_k^alpha(0) = C(k+alpha, k)
            assert radial_eigenfunction_origin(n, k) == pytest.approx(
                math.comb(k + n - 1, k), rel=1e-14)
            assert got[0] == pytest.approx(radial_eigenfunction_origin(n, k))


def test_special_hermite_explicit_low_orders():
    z = np.array([0.4 + 0.3j, -1.2 + 0.8j, 2.0 - 0.5j])
    g = np.exp(-0.25 * np.abs(z) ** 2)
    c = (2.0 * np.pi) ** -0.5
    assert np.allclose(special_hermite_basis(SpecialHermiteIndex(0, 0), z), c * g)
    assert np.allclose(special_hermite_basis(SpecialHermiteIndex(0, 1), z),
                       c * (1j * np.conj(z) / np.sqrt(2.0)) * g)
    # index swap is complex conjugation
    assert np.allclose(special_hermite_basis(SpecialHermiteIndex(1, 0), z),
                       np.conj(special_hermite_basis(SpecialHermiteIndex(0, 1), z)))


def test_special_hermite_orthonormality():
    """Gram matrix of phi_(a,b), a, b <= 3, is the identity in L^2(C)."""
    rule = plane_rule(1, extent=10.0, radial_points=40, angular_points=128)
    idx = [i for i in special_hermite_indices(3)]
    mat = special_hermite_matrix(rule.nodes[:, 0], 3)
    cols = {(i.alpha, i.beta): mat[:, j] for j, i in enumerate(idx)}
    for i1 in idx:
        for i2 in idx:
            inner = rule.integrate(cols[(i1.alpha, i1.beta)]
                                   * np.conj(cols[(i2.alpha, i2.beta)]))
            want = 1.0 if (i1.alpha, i1.beta) == (i2.alpha, i2.beta) else 0.0
            assert abs(inner - want) < 1e-7


def test_special_hermite_matrix_agrees_with_single_evaluations():
    rng = np.random.default_rng(3)
    z = rng.normal(size=40) + 1j * rng.normal(size=40)
    K = 4
    mat = special_hermite_matrix(z, K)
    for j, i in enumerate(special_hermite_indices(K)):
        ref = special_hermite_basis(i, z)
        assert np.max(np.abs(mat[:, j] - ref)) < 1e-12


def _fd_laplacian(fn, pts, h=0.25):
    """Exact for polynomials of per-variable degree <= 3."""
    out = np.zeros(pts.shape[0], dtype=complex)
    n = pts.shape[1]
    for j in range(n):
        for step in (h, 1j * h):
            e = np.zeros((1, n), dtype=complex)
            e[0, j] = step
            out += (fn(pts + e) - 2.0 * fn(pts) + fn(pts - e)) / h ** 2
    return out


@pytest.mark.parametrize("p,q,n,dim", [
    (1, 0, 1, 1), (0, 2, 1, 1), (1, 1, 1, 0),
    (1, 0, 2, 2), (1, 1, 2, 3), (2, 1, 2, 4),
])
def test_solid_harmonic_dimensions_and_harmonicity(p, q, n, dim):
    basis = solid_harmonic_basis(p, q, n)
    assert len(basis) == dim
    rng = np.random.default_rng(11)
    pts = rng.normal(size=(12, n)) + 1j * rng.normal(size=(12, n))
    for h in basis:
        lap = _fd_laplacian(h.evaluate, pts)
        scale = max(1.0, float(np.max(np.abs(h.evaluate(pts)))))
        assert np.max(np.abs(lap)) < 1e-9 * scale


def test_solid_harmonic_bigrading():
    # H(e^(i t) z) = e^(i (p - q) t) H(z)
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(8, 2)) + 1j * rng.normal(size=(8, 2))
    t = 0.73
    for (p, q) in [(1, 0), (1, 1), (2, 1)]:
        for h in solid_harmonic_basis(p, q, 2):
            lhs = h.evaluate(pts * np.exp(1j * t))
            rhs = np.exp(1j * (p - q) * t) * h.evaluate(pts)
            assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_solid_harmonic_span_contains_z1_z2bar():
    basis = solid_harmonic_basis(1, 1, 2)
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(20, 2)) + 1j * rng.normal(size=(20, 2))
    A = np.stack([h.evaluate(pts) for h in basis], axis=1)
    b = pts[:, 0] * np.conj(pts[:, 1])
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    assert np.max(np.abs(A @ coef - b)) < 1e-10
