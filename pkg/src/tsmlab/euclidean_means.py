"""Plain (untwisted) circular means on R^2 and the odd-function
counterexamples that defeat them.

The plane is coordinatized as C: a point x = (x1, x2) is the complex
number x1 + i x2.  The circular mean is the average

    M_r f(x) = (1/2pi) int_0^2pi f(x + r e^(i theta)) dtheta,

with no phase weight.  A function that is odd across a line L has zero
mean on every circle centered on L (the reflection fixing the circle
negates the integrand), so the union Sigma_N of N concurrent lines at
angles pi l / N never determines compactly supported functions: the field

    f(x) = g(|x|) Im((x1 + i x2)^N)  =  g(rho) rho^N sin(N theta)

is odd across every line of Sigma_N yet not identically zero.

The angular sector odd across all of Sigma_N is spanned by sin(s theta)
with N | s; the counterexample occupies the lowest rung s = N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import FieldDomainError
from .fields import interpolate_on_rule
from .ioutil import fmt, write_csv
from .quadrature import PlaneRule, compensated_sum, plane_rule

CIRCLE_POINTS = 240      # divisible by 1..6: reflection pairs nodes exactly

__all__ = [
    "EuclideanField", "SectorBasisFunction", "bump_profile", "circular_mean",
    "euclidean_mean_table", "write_mean_table", "coxeter_odd_counterexample",
    "coxeter_odd_orders", "euclidean_sector_basis", "CIRCLE_POINTS",
]


def bump_profile(support_radius: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """Smooth bump rho -> exp(-1/(1-(rho/R)^2)) inside rho < R, 0 outside."""
    R = float(support_radius)
    if R <= 0:
        raise ValueError("support radius must be positive")

    def g(rho):
        rho = np.asarray(rho, dtype=float)
        out = np.zeros_like(rho)
        inside = np.abs(rho) < R
        t = (rho[inside] / R) ** 2
        out[inside] = np.exp(-1.0 / (1.0 - t))
        return out

    return g


@dataclass(frozen=True)
class EuclideanField:
    """Real-valued field on R^2 sampled on a polar grid.

    ``support_radius`` declares the compact numerical support; construction
    rejects samples that carry visible mass outside it.
    """
    rule: PlaneRule
    values: np.ndarray
    support_radius: float
    evaluator: Callable | None = None
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.rule.dimension != 1:
            raise ValueError("Euclidean fields live on the plane (rule dimension 1)")
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.rule.nodes.shape[0],):
            raise ValueError("one sample per grid node required")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field samples must be finite")
        if self.support_radius <= 0:
            raise ValueError("support radius must be positive")
        r = np.abs(self.rule.nodes[:, 0])
        outside = r > self.support_radius * (1 + 1e-12)
        peak = float(np.max(np.abs(vals))) if vals.size else 0.0
        if peak > 0 and outside.any():
            tail = float(np.max(np.abs(vals[outside])))
            if tail > 1e-12 * peak:
                raise ValueError(
                    f"samples reach {tail:.2e} outside the declared support "
                    f"radius {self.support_radius} (peak {peak:.2e})")

    @classmethod
    def from_function(cls, fn, rule: PlaneRule, support_radius: float,
                      name: str = "") -> "EuclideanField":
        vals = np.asarray(fn(rule.nodes[:, 0]), dtype=float)
        return cls(rule, vals, support_radius, evaluator=fn, name=name)

    def evaluate(self, points) -> np.ndarray:
        """Values at complex plane points (any shape)."""
        pts = np.asarray(points, dtype=complex)
        flat = pts.reshape(-1)
        if self.evaluator is not None:
            out = np.asarray(self.evaluator(flat), dtype=float)
        else:
            # outside the support the field is zero by declaration, so only
            # reads in the grid-to-support gap are genuinely undefined
            out = np.zeros(flat.shape[0], dtype=float)
            r = np.abs(flat)
            inside = r <= self.support_radius * (1 + 1e-12)
            if inside.any():
                if np.any(r[inside] > self.rule.extent * (1 + 1e-12)):
                    bad = flat[inside][r[inside] > self.rule.extent * (1 + 1e-12)]
                    raise FieldDomainError(
                        "circular mean reads inside the declared support but "
                        "off the grid", points=bad[:8])
                out[inside] = interpolate_on_rule(
                    self.rule, self.values.astype(complex),
                    flat[inside, None], cache=self._cache).real
        return out.reshape(pts.shape)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def scaled(self, a: float) -> "EuclideanField":
        ev = None if self.evaluator is None else \
            (lambda p, _e=self.evaluator, _a=a: _a * np.asarray(_e(p)))
        return EuclideanField(self.rule, a * self.values, self.support_radius,
                              ev, name=self.name)


def circular_mean(f, x, r: float, m: int = CIRCLE_POINTS) -> float:
    """Average of f over the circle of radius r about x (a complex point).

    Any object with an ``evaluate`` accepting complex points works.  r = 0
    degenerates to f(x).
    """
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {r}")
    x = complex(x)
    if r == 0.0:
        return float(np.real(f.evaluate(np.array([x]))[0]))
    theta = 2.0 * np.pi * np.arange(m) / m
    pts = x + r * np.exp(1j * theta)
    vals = np.asarray(f.evaluate(pts), dtype=float)
    return float(compensated_sum(vals) / m)


def euclidean_mean_table(f, centers, radii, m: int = CIRCLE_POINTS) -> np.ndarray:
    """Matrix of circular means, centers down, radii across."""
    centers = np.asarray(centers, dtype=complex).reshape(-1)
    radii = np.asarray(radii, dtype=float)
    out = np.empty((centers.size, radii.size), dtype=float)
    for j, c in enumerate(centers):
        for i, r in enumerate(radii):
            out[j, i] = circular_mean(f, c, r, m=m)
    return out


def write_mean_table(path, centers, radii, table) -> None:
    centers = np.asarray(centers, dtype=complex).reshape(-1)
    radii = np.asarray(radii, dtype=float)
    rows = []
    for j, c in enumerate(centers):
        for i, r in enumerate(radii):
            rows.append([fmt(c.real), fmt(c.imag), fmt(r), fmt(table[j, i])])
    write_csv(path, ["re_center", "im_center", "r", "mean"], rows)


def _default_plane(support_radius: float) -> PlaneRule:
    return plane_rule(1, extent=2.0 * support_radius, radial_points=48,
                      angular_points=CIRCLE_POINTS)


def coxeter_odd_counterexample(n_lines: int,
                               radial_profile: Callable | None = None,
                               support_radius: float = 1.0,
                               rule: PlaneRule | None = None) -> EuclideanField:
    """The compactly supported field g(|x|) Im((x1+ix2)^N), odd across every
    line of Sigma_N, whose circular means vanish at all centers on Sigma_N."""
    if n_lines < 1:
        raise ValueError("need at least one line")
    g = radial_profile if radial_profile is not None else bump_profile(support_radius)
    N = int(n_lines)

    def f(p):
        p = np.asarray(p, dtype=complex)
        return g(np.abs(p)) * np.imag(p ** N)

    return EuclideanField.from_function(
        f, rule or _default_plane(support_radius), support_radius,
        name=f"odd_sigma{N}")


def coxeter_odd_orders(n_lines: int, max_order: int) -> list[int]:
    """Angular orders s with sin(s theta) odd across every line of Sigma_N:
    exactly the multiples of N."""
    return [s for s in range(1, max_order + 1) if s % n_lines == 0]


@dataclass(frozen=True)
class SectorBasisFunction:
    """One (radial bump) x (Fourier mode) basis element for the Euclidean
    sampling operator: bump(rho; R) (rho/R)^s trig(s theta)."""
    kind: str              # "sin" | "cos"
    order: int
    support_radius: float
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("sin", "cos"):
            raise ValueError(f"unknown sector kind {self.kind!r}")
        if self.order < 0 or (self.kind == "sin" and self.order == 0):
            raise ValueError("bad angular order")
        if not self.name:
            object.__setattr__(
                self, "name",
                f"{self.kind}{self.order}_R{self.support_radius:g}")

    def evaluate(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=complex)
        rho = np.abs(p)
        g = bump_profile(self.support_radius)(rho)
        if self.order == 0:
            return g
        # (rho/R)^s trig(s theta) written via p^s for smoothness at 0
        mono = (p / self.support_radius) ** self.order
        ang = mono.imag if self.kind == "sin" else mono.real
        return g * ang


def euclidean_sector_basis(max_order: int,
                           support_radii=(1.0, 0.6),
                           orders: list[int] | None = None,
                           kinds=("sin", "cos")) -> list[SectorBasisFunction]:
    """Basis (radial bumps) x (Fourier modes): all requested orders at each
    support radius.  Restrict ``orders``/``kinds`` to carve out a sector,
    e.g. orders=coxeter_odd_orders(N, K), kinds=("sin",)."""
    if orders is None:
        orders = list(range(0, max_order + 1))
    out = []
    for R in support_radii:
        for s in orders:
            for kind in kinds:
                if kind == "sin" and s == 0:
                    continue
                if s > max_order:
                    raise ValueError(f"order {s} above max_order {max_order}")
                out.append(SectorBasisFunction(kind, s, R))
    return out
