"""Quadrature rules against closed-form moments."""

import math

import numpy as np
import pytest

from tsmlab.errors import QuadratureError
from tsmlab.quadrature import (circle_rule, compensated_sum, gauss_legendre,
                               plane_rule, radial_rule, sphere3_rule)


def test_compensated_sum_matches_fsum():
    rng = np.random.default_rng(7)
    v = np.concatenate([rng.normal(size=9000) * 1e8, rng.normal(size=9000)])
    rng.shuffle(v)
    assert compensated_sum(v) == pytest.approx(math.fsum(v), abs=1e-6)


def test_compensated_sum_axis_and_dtype():
    m = np.arange(12.0).reshape(3, 4)
    assert np.allclose(compensated_sum(m, axis=0), m.sum(axis=0))
    c = m + 1j * m[::-1]
    out = compensated_sum(c, axis=1)
    assert out.dtype.kind == "c"
    assert np.allclose(out, c.sum(axis=1))


def test_gauss_legendre_polynomial_exactness():
    x, w = gauss_legendre(8, 0.0, 3.0)
    for p in range(0, 16):          # degree <= 2*8-1
        exact = 3.0 ** (p + 1) / (p + 1)
        assert np.dot(w, x ** p) == pytest.approx(exact, rel=1e-13)


def test_circle_rule_trig_moments():
    rule = circle_rule(1.7, m=32)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-15)
    rule.validate()
    th = np.angle(rule.nodes[:, 0])
    for k in range(1, 16):          # all modes below the aliasing limit
        assert abs(rule.integrate(np.exp(1j * k * th))) < 1e-14
    assert rule.integrate(np.ones(32)) == pytest.approx(1.0)


def test_circle_rule_rejects_bad_input():
    with pytest.raises(ValueError):
        circle_rule(0.0)
    with pytest.raises(ValueError):
        circle_rule(1.0, m=3)


def test_sphere3_moments():
    """Normalized S^3 moments: E |w1|^(2a) |w2|^(2b) = a! b! / (a+b+1)! r^(2a+2b)."""
    r = 1.3
    # the t factor is Gauss-Legendre against a trig integrand, not exact;
    # order 20 puts its error well below the tolerance
    rule = sphere3_rule(r, orders=(20, 8, 8))
    rule.validate()
    a1 = np.abs(rule.nodes[:, 0])
    a2 = np.abs(rule.nodes[:, 1])
    for a in range(4):
        for b in range(4):
            exact = (math.factorial(a) * math.factorial(b)
                     / math.factorial(a + b + 1)) * r ** (2 * (a + b))
            got = rule.integrate(a1 ** (2 * a) * a2 ** (2 * b))
            assert got.real == pytest.approx(exact, rel=1e-12)
            assert abs(got.imag) < 1e-15


def test_sphere3_phase_moments_vanish():
    rule = sphere3_rule(1.0, orders=(6, 8, 8))
    w1, w2 = rule.nodes[:, 0], rule.nodes[:, 1]
    for (j, k) in [(1, 0), (0, 1), (2, 1), (1, 3)]:
        assert abs(rule.integrate(w1 ** j * np.conj(w2) ** k)) < 1e-14


def test_radial_rule_moments():
    rule = radial_rule(1, extent=14.0, points=48)
    errs = rule.moment_errors()
    assert errs.max() < 1e-12
    rule2 = radial_rule(2, extent=14.0, points=64)
    assert rule2.moment_errors().max() < 1e-12


def test_plane_rule_gaussian_and_polynomial_moments():
    rule = plane_rule(1, extent=12.0, radial_points=48, angular_points=64)
    sq = np.abs(rule.nodes[:, 0]) ** 2
    # int |z|^(2p) e^(-|z|^2/2) dz = pi 2^(p+1) p!
    for p in range(5):
        exact = math.pi * 2.0 ** (p + 1) * math.factorial(p)
        got = rule.integrate(sq ** p * np.exp(-0.5 * sq))
        assert got.real == pytest.approx(exact, rel=1e-11)


def test_plane_rule_c2_gaussian():
    rule = plane_rule(2, extent=10.0, radial_points=40, sphere3_orders=(8, 12, 12))
    sq = np.sum(np.abs(rule.nodes) ** 2, axis=1)
    got = rule.integrate(np.exp(-0.5 * sq))
    assert got.real == pytest.approx((2.0 * math.pi) ** 2, rel=1e-9)


def test_plane_rule_small_extent_checks_truncated_mass():
    # compact-support work needs small windows; the self-check must compare
    # against the truncated Gaussian moment, not the full-plane value
    rule = plane_rule(1, extent=2.0, radial_points=32, angular_points=64)
    assert rule.moment_error < 1e-9


def test_plane_rule_self_check_failure_raises():
    with pytest.raises(QuadratureError, match="Gaussian moment"):
        plane_rule(1, extent=12.0, radial_points=4, angular_points=16)


def test_plane_rule_rejects_unsupported_dimension():
    with pytest.raises(ValueError):
        plane_rule(3)
