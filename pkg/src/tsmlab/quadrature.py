"""Deterministic quadrature rules: circles, the 3-sphere, radial half-lines,
and full planes C^n (n <= 2) in polar form.

Design notes
------------
* Sphere rules carry *normalized* surface measure: weights sum to 1.
* Plane rules carry Lebesgue measure in polar factorization
  ``dz = omega_(2n-1) r^(2n-1) dr dmu_r``: Gauss-Legendre on the radius
  against the Jacobian, the normalized sphere rule in the angles.
* Reductions happen in fixed node order through ``compensated_sum`` so a
  serial rerun (or any future chunked-parallel one that combines partials
  in index order) reproduces results bit for bit.
* Every plane rule self-checks the Gaussian moment
  ``int exp(-|z|^2/2) dz = (2 pi)^n`` at construction and refuses to build
  if the achieved error exceeds its declared tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import sphere_surface_area
from .errors import QuadratureError

_SUM_CHUNK = 4096


def compensated_sum(values, axis: int = -1):
    """Sum along an axis: pairwise inside fixed 4096-wide blocks, blocks
    combined in index order with Kahan correction."""
    v = np.moveaxis(np.asarray(values), axis, -1)
    total = np.zeros(v.shape[:-1], dtype=v.dtype if v.dtype.kind == "c" else float)
    comp = np.zeros_like(total)
    for start in range(0, v.shape[-1], _SUM_CHUNK):
        part = v[..., start:start + _SUM_CHUNK].sum(axis=-1)
        y = part - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def gauss_legendre(n: int, a: float, b: float):
    """Gauss-Legendre nodes/weights mapped to [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    """Barycentric weights for polynomial interpolation on arbitrary nodes,
    computed in log space to dodge overflow, normalized to max 1."""
    x = np.asarray(nodes, dtype=float)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    logw = -np.sum(np.log(np.abs(diff)), axis=1)
    sign = np.prod(np.sign(diff), axis=1)
    logw -= logw.max()
    return sign * np.exp(logw)


@dataclass
class SphereRule:
    """Nodes/weights for a sphere |w| = radius in C^n, normalized measure."""

    dimension: int          # complex dimension n
    radius: float
    nodes: np.ndarray       # (N, n) complex
    weights: np.ndarray     # (N,) positive, sum 1

    def integrate(self, values) -> complex:
        return complex(compensated_sum(self.weights * np.asarray(values)))

    def validate(self):
        if np.any(self.weights <= 0):
            raise QuadratureError("sphere rule has non-positive weights")
        if abs(self.weights.sum() - 1.0) > 1e-13:
            raise QuadratureError("sphere rule weights do not sum to 1")
        radii = np.linalg.norm(self.nodes, axis=1)
        err = np.max(np.abs(radii - self.radius))
        if err > 1e-12 * max(1.0, self.radius):
            raise QuadratureError(f"sphere rule nodes off the sphere by {err:.3e}")


def circle_rule(radius: float, m: int = 256) -> SphereRule:
    """m equispaced points on |w| = radius in C, weights 1/m."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if m < 4:
        raise ValueError("circle rule needs at least 4 nodes")
    theta = 2.0 * np.pi * np.arange(m) / m
    nodes = radius * np.exp(1j * theta)[:, None]
    return SphereRule(1, radius, nodes, np.full(m, 1.0 / m))


def sphere3_rule(radius: float, orders: tuple[int, int, int] = (16, 32, 32)) -> SphereRule:
    """Product rule on S^3 = {(r cos(t) e^(i p1), r sin(t) e^(i p2))}.

    Gauss-Legendre in t on [0, pi/2] against the density 2 sin t cos t,
    uniform in both phases; weights renormalized to sum exactly 1.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    nt, m1, m2 = orders
    t, wt = gauss_legendre(nt, 0.0, 0.5 * np.pi)
    wt = wt * 2.0 * np.sin(t) * np.cos(t)
    wt /= wt.sum()
    p1 = 2.0 * np.pi * np.arange(m1) / m1
    p2 = 2.0 * np.pi * np.arange(m2) / m2
    ct = (radius * np.cos(t))[:, None, None]
    st = (radius * np.sin(t))[:, None, None]
    z1 = ct * np.exp(1j * p1)[None, :, None] * np.ones((1, 1, m2))
    z2 = st * np.ones((1, m1, 1)) * np.exp(1j * p2)[None, None, :]
    nodes = np.stack([z1.ravel(), z2.ravel()], axis=1)
    weights = (wt[:, None, None] * np.full((1, m1, m2), 1.0 / (m1 * m2))).ravel()
    return SphereRule(2, radius, nodes, weights)


def sphere_rule(dimension: int, radius: float, **kw) -> SphereRule:
    if dimension == 1:
        return circle_rule(radius, kw.get("m", 256))
    if dimension == 2:
        return sphere3_rule(radius, kw.get("orders", (16, 32, 32)))
    raise ValueError("sphere rules implemented for n in {1, 2}")


@dataclass
class RadialRule:
    """Gauss-Legendre rule on [0, extent] with the r^(2n-1) Jacobian folded
    into the weights, for radial integrals over C^n."""

    dimension: int
    extent: float
    nodes: np.ndarray      # (m,) ascending, in (0, extent)
    weights: np.ndarray    # (m,) gl weight * r^(2n-1)
    declared_degree: int   # polynomial-times-Gaussian degree the self-test covers

    def integrate(self, values) -> complex:
        return complex(compensated_sum(self.weights * np.asarray(values)))

    def moment_errors(self, max_power: int | None = None) -> np.ndarray:
        """Relative errors on int_0^inf r^m exp(-r^2/2) r^(2n-1) dr."""
        mp = self.declared_degree if max_power is None else max_power
        errs = []
        for m in range(mp + 1):
            a = m + 2 * self.dimension - 1
            exact = 2.0 ** ((a - 1) / 2.0) * math.gamma((a + 1) / 2.0)
            got = float(np.real(self.integrate(self.nodes ** m * np.exp(-0.5 * self.nodes ** 2))))
            errs.append(abs(got - exact) / exact)
        return np.array(errs)


def radial_rule(dimension: int, extent: float = 12.0, points: int = 64) -> RadialRule:
    if extent <= 0 or points < 2:
        raise ValueError("radial rule needs extent > 0 and points >= 2")
    r, w = gauss_legendre(points, 0.0, extent)
    jac = r ** (2 * dimension - 1)
    return RadialRule(dimension, extent, r, w * jac, declared_degree=12)


@dataclass
class PlaneRule:
    """Polar product rule over C^n (n <= 2) carrying Lebesgue measure.

    ``nodes`` enumerate the polar grid in row-major order over ``shape``:
    (radius, angle) for n = 1 and (radius, t, phase1, phase2) for n = 2.
    The axis metadata drives interpolation of fields sampled on the rule.
    """

    dimension: int
    extent: float
    nodes: np.ndarray        # (N, n) complex
    weights: np.ndarray      # (N,) Lebesgue weights
    shape: tuple             # value-tensor shape
    radial_nodes: np.ndarray
    theta_nodes: np.ndarray | None   # n = 2 only, GL nodes in [0, pi/2]
    angular_counts: tuple            # (m,) or (m1, m2)
    params: dict
    tolerance: float
    moment_error: float = 0.0
    _bary: dict = field(default_factory=dict, repr=False)

    def integrate(self, values) -> complex:
        return complex(compensated_sum(self.weights * np.asarray(values)))

    def compatible(self, other: "PlaneRule") -> bool:
        return self.dimension == other.dimension and self.params == other.params

    def barycentric(self, axis: str) -> np.ndarray:
        if axis not in self._bary:
            nodes = self.radial_nodes if axis == "radial" else self.theta_nodes
            self._bary[axis] = _barycentric_weights(nodes)
        return self._bary[axis]


def plane_rule(dimension: int,
               extent: float = 12.0,
               radial_points: int = 64,
               angular_points: int = 256,
               sphere3_orders: tuple[int, int, int] = (16, 32, 32),
               tolerance: float = 1e-9) -> PlaneRule:
    """Build the polar plane rule and run the Gaussian moment self-check.

    Raises QuadratureError with a diagnostic if the achieved error on
    ``int exp(-|z|^2/2) dz`` exceeds ``tolerance`` (for example when the
    extent truncates the Gaussian or the radial order is too low).
    """
    if dimension not in (1, 2):
        raise ValueError("plane rules implemented for n in {1, 2}")
    if extent <= 0:
        raise ValueError("extent must be positive")
    r, wr = gauss_legendre(radial_points, 0.0, extent)
    omega = sphere_surface_area(dimension)
    if dimension == 1:
        m = angular_points
        theta = 2.0 * np.pi * np.arange(m) / m
        nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()[:, None]
        weights = (wr * r)[:, None] * np.full((1, m), omega / m)
        shape: tuple = (radial_points, m)
        theta_nodes = None
        angular_counts = (m,)
        params = {"dimension": 1, "extent": extent, "radial_points": radial_points,
                  "angular_points": m, "tolerance": tolerance}
    else:
        sph = sphere3_rule(1.0, sphere3_orders)
        nodes = (r[:, None, None] * sph.nodes[None, :, :]).reshape(-1, 2)
        weights = ((wr * r ** 3)[:, None] * (omega * sph.weights)[None, :])
        nt, m1, m2 = sphere3_orders
        shape = (radial_points, nt, m1, m2)
        t_nodes, _ = gauss_legendre(nt, 0.0, 0.5 * np.pi)
        theta_nodes = t_nodes
        angular_counts = (m1, m2)
        params = {"dimension": 2, "extent": extent, "radial_points": radial_points,
                  "sphere3_orders": tuple(sphere3_orders), "tolerance": tolerance}
    rule = PlaneRule(dimension, extent, np.ascontiguousarray(nodes),
                     weights.ravel(), shape, r, theta_nodes, angular_counts,
                     params, tolerance)
    sq = np.sum(np.abs(rule.nodes) ** 2, axis=1)
    got = float(np.real(rule.integrate(np.exp(-0.5 * sq))))
    # Gaussian moment restricted to the rule's own disk, so small-extent
    # rules (compactly supported work) are checked fairly:
    # n=1: 2 pi (1 - e^(-E^2/2));  n=2: 2 pi^2 (2 - e^(-E^2/2)(E^2 + 2))
    tail = math.exp(-0.5 * extent ** 2)
    if dimension == 1:
        exact = 2.0 * np.pi * (1.0 - tail)
    else:
        exact = 2.0 * np.pi ** 2 * (2.0 - tail * (extent ** 2 + 2.0))
    rule.moment_error = abs(got - exact) / exact
    if rule.moment_error > tolerance:
        raise QuadratureError(
            f"plane rule failed the Gaussian moment check: relative error "
            f"{rule.moment_error:.3e} > tolerance {tolerance:.1e} "
            f"(extent={extent}, radial_points={radial_points})")
    return rule


def plane_rule_from_params(params: dict) -> PlaneRule:
    """Rebuild a plane rule from its serialized parameter dict."""
    p = dict(params)
    dim = p.pop("dimension")
    if "sphere3_orders" in p:
        p["sphere3_orders"] = tuple(p["sphere3_orders"])
    return plane_rule(dim, **p)
