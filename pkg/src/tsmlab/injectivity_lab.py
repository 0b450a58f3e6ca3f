"""Candidate sampling sets, sampling operators, and injectivity probes.

The central object is the sampling operator M: rows are (center, radius)
pairs drawn from a candidate set S and a radius grid, columns are truncated
basis elements b, and

    M[(j, i), b] = (b x mu_(r_i))(z_j)

(twisted engine) or the plain circular mean (euclidean engine).  A function
with vanishing means on S corresponds to a (near-)null vector of M, so
sigma_min probes whether S can distinguish fields at the truncation: small
sigma_min plus an exhibited near-null field certifies NON-injectivity at
desk scale, while large sigma_min is evidence only (see the caveat string).

Also here: the Hecke-Bochner type-function scans (fields a(|z|) P(z) whose
twisted means vanish exactly on P^(-1)(0) plus possible spheres) and the
least-squares fit of the degree-k projection's sector expansion

    Q_k(z) = sum_p C[p] z^p phi_(k-p)^p(z) + sum_q D[q] conj(z)^q phi_k^q(z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .constants import TWIST_SIGN
from .errors import IllConditionedFitError
from .euclidean_means import (CIRCLE_POINTS as EUCLID_POINTS,
                              SectorBasisFunction, circular_mean)
from .fields import GAUSSIAN_QUARTER, SCHWARTZ_LIKE, SampledField
from .ioutil import fmt, write_csv, write_json
from .quadrature import PlaneRule, compensated_sum, plane_rule, sphere_rule
from .special_functions import (LaguerreSpec, SolidHarmonic, SpecialHermiteIndex,
                                laguerre_function, special_hermite_indices,
                                special_hermite_matrix)
from .twisted_transforms import twist_phase, twisted_spherical_mean

INJECTIVITY_CAVEAT = (
    "sigma_min > 0 at a finite truncation over a finite point sample is "
    "evidence, not proof: no finite computation certifies a set of "
    "injectivity. Only the negative direction is certified here, by "
    "exhibiting a concrete near-null field with vanishing means on the set.")

DEFAULT_RADII = tuple(np.geomspace(0.2, 6.0, 24))

__all__ = [
    "INJECTIVITY_CAVEAT", "DEFAULT_RADII", "SamplingSet", "make_set",
    "curve_set", "TwistedHermiteBasis", "ProductHermiteBasis",
    "EuclideanSectorBasis", "SamplingOperator", "assemble_operator",
    "near_null_roundtrip", "InjectivityReport", "injectivity_probe",
    "TypeFunctionSpec", "VanishingSetReport", "hecke_bochner_counterexample",
    "ProjectionExpansion", "fit_projection_expansion", "plane_block_offmass",
    "operator_to_csv", "sigma_curve_to_csv",
]


# ---------------------------------------------------------------------------
# sampling sets


def _dedupe_sort(centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lexicographic sort over (re, im) per component, then merge points
    closer than 1e-12; returns (centers, keep_indices)."""
    snapped = np.round(centers.real, 12) + 1j * np.round(centers.imag, 12)
    keys = np.concatenate([np.stack([snapped[:, j].real, snapped[:, j].imag],
                                    axis=1) for j in range(centers.shape[1])],
                          axis=1)
    order = np.lexsort(keys.T[::-1])
    sorted_c = centers[order]
    keep = [0] if len(order) else []
    for i in range(1, sorted_c.shape[0]):
        if np.max(np.abs(sorted_c[i] - sorted_c[keep[-1]])) > 1e-12:
            keep.append(i)
    keep = np.asarray(keep, dtype=int)
    return sorted_c[keep], order[keep]


def _coxeter_points(n_lines: int, extent: float, points_per_ray: int) -> np.ndarray:
    """Equispaced samples of Sigma_N: on each line t e^(i pi l / N), the
    points t in linspace(-extent, extent, 2 ppr + 1); one shared origin."""
    pts = []
    t = np.linspace(-extent, extent, 2 * points_per_ray + 1)
    for l in range(n_lines):
        pts.append(t * np.exp(1j * np.pi * l / n_lines))
    return np.concatenate(pts)


def _coxeter_distance(z: np.ndarray, n_lines: int) -> np.ndarray:
    """Distance indicator to Sigma_N for points of C: min over lines of the
    transverse component."""
    d = np.full(z.shape, np.inf)
    for l in range(n_lines):
        d = np.minimum(d, np.abs((z * np.exp(-1j * np.pi * l / n_lines)).imag))
    return d


@dataclass(frozen=True)
class SamplingSet:
    """A finite center set on a declared geometric locus plus a radius grid.

    ``center_weights`` (optional) carry quadrature weights when the centers
    come from an integration rule; operator-level Gram computations use
    them.  Rows of an operator built on this set are (center-major) pairs
    (center j, radius i).
    """
    kind: str
    dimension: int
    centers: np.ndarray
    radii: np.ndarray
    params: dict
    center_weights: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=complex)
        if c.ndim == 1:
            c = c[:, None]
        object.__setattr__(self, "centers", c)
        r = np.asarray(self.radii, dtype=float)
        object.__setattr__(self, "radii", r)
        if c.shape[1] != self.dimension:
            raise ValueError(f"centers must live in C^{self.dimension}")
        if not np.all(np.isfinite(c.view(float))):
            raise ValueError("centers must be finite")
        if r.size and (np.any(r <= 0) or np.any(np.diff(r) <= 0)):
            raise ValueError("radii must be positive and strictly increasing")

    @property
    def n_rows(self) -> int:
        return self.centers.shape[0] * self.radii.shape[0]

    def row_meta(self) -> tuple[np.ndarray, np.ndarray]:
        """(center_index, radius_index) per operator row, center-major."""
        nc, nr = self.centers.shape[0], self.radii.shape[0]
        return np.repeat(np.arange(nc), nr), np.tile(np.arange(nr), nc)

    def validate(self, tol: float = 1e-12) -> None:
        """Check the membership invariant: centers lie on the declared set."""
        rot = self.params.get("rotation", 0.0)
        tr = np.asarray(self.params.get("translation", np.zeros(self.dimension)),
                        dtype=complex).reshape(self.dimension)
        base = (self.centers - tr[None, :]) * np.exp(-1j * rot)
        scale = np.maximum(1.0, np.abs(base))
        kind = self.kind
        if kind == "coxeter_lines":
            d = _coxeter_distance(base[:, 0], self.params["n_lines"])
            bad = d > tol * scale[:, 0]
        elif kind == "plane_cross_coxeter":
            d = _coxeter_distance(base[:, 1], 2 * self.params["n_lines"])
            bad = d > tol * scale[:, 1]
        elif kind == "sphere":
            rad = np.linalg.norm(base, axis=1)
            bad = np.abs(rad - self.params["radius"]) > tol * np.maximum(1.0, rad)
        elif kind == "sphere_cross_plane":
            rad = np.abs(base[:, 0])
            bad = np.abs(rad - self.params["radius"]) > tol * np.maximum(1.0, rad)
        elif kind == "curve":
            ts = np.asarray(self.params["ts"], dtype=float)
            rv = np.asarray(self.params["r_values"], dtype=float)
            ref = rv * np.exp(1j * ts)
            bad = np.abs(base[:, 0] - ref) > tol * np.maximum(1.0, np.abs(ref))
        elif kind == "custom":
            bad = np.zeros(self.centers.shape[0], dtype=bool)
        else:
            raise ValueError(f"unknown set kind {kind!r}")
        if bad.any():
            j = int(np.argmax(bad))
            raise ValueError(f"center {self.centers[j]} is off the declared "
                             f"{kind} locus")


def _apply_motion(centers: np.ndarray, rotation: float, translation) -> np.ndarray:
    tr = np.asarray(translation, dtype=complex).reshape(-1)
    return centers * np.exp(1j * rotation) + tr[None, :]


def make_set(kind: str, radii=None, rotation: float = 0.0, translation=None,
             **params) -> SamplingSet:
    """Deterministic center sampling for the candidate set families.

    kinds and their parameters:
      coxeter_lines        n_lines, extent=6.0, points_per_ray=10      (C)
      plane_cross_coxeter  n_lines, extent, points_per_ray,
                           plane_extent=6.0, plane_radial=12,
                           plane_angular=8                             (C^2,
                           Sigma_(2 n_lines) in the second slot, first slot
                           on an integration rule whose weights ride along)
      sphere               radius, n=1, m=24 | orders=(4, 8, 8)
      sphere_cross_plane   radius, m=12, plane_extent, plane_radial,
                           plane_angular                               (C^2)
      curve                r_profile, t_range=(0, 4pi), samples=64     (C)
      custom               centers, n

    Optional rigid motion: centers -> e^(i rotation) c + translation.
    Radii default to a geometric grid on [0.2, 6] with 24 points.
    """
    radii = np.asarray(DEFAULT_RADII if radii is None else radii, dtype=float)
    weights = None
    stored = dict(params)
    if kind == "coxeter_lines":
        n_lines = int(params["n_lines"])
        if n_lines < 1:
            raise ValueError("need n_lines >= 1")
        extent = float(params.get("extent", 6.0))
        ppr = int(params.get("points_per_ray", 10))
        if extent <= 0 or ppr < 1:
            raise ValueError("coxeter_lines needs extent > 0, points_per_ray >= 1")
        centers = _coxeter_points(n_lines, extent, ppr)[:, None]
        stored.update(n_lines=n_lines, extent=extent, points_per_ray=ppr)
        n = 1
    elif kind == "plane_cross_coxeter":
        n_lines = int(params["n_lines"])
        extent = float(params.get("extent", 3.0))
        ppr = int(params.get("points_per_ray", 4))
        if n_lines < 1 or extent <= 0 or ppr < 1:
            raise ValueError("bad plane_cross_coxeter parameters")
        # center carrier, not an integrator: its weights only feed the
        # weighted Gram diagnostics, so the moment self-check is waived.
        # the defaults keep the slot-1 Gram of a (1,1) product basis block
        # diagonal to ~1e-11 (extent 4 would leak its Gaussian tail)
        pr = plane_rule(1, extent=float(params.get("plane_extent", 6.0)),
                        radial_points=int(params.get("plane_radial", 12)),
                        angular_points=int(params.get("plane_angular", 8)),
                        tolerance=float("inf"))
        z2 = _coxeter_points(2 * n_lines, extent, ppr)
        z1 = pr.nodes[:, 0]
        centers = np.stack([np.repeat(z1, z2.size), np.tile(z2, z1.size)], axis=1)
        weights = np.repeat(pr.weights, z2.size)
        stored.update(n_lines=n_lines, extent=extent, points_per_ray=ppr)
        n = 2
    elif kind == "sphere":
        n = int(params.get("n", 1))
        radius = float(params["radius"])
        if radius <= 0:
            raise ValueError("sphere radius must be positive")
        if n == 1:
            rule = sphere_rule(1, radius, m=int(params.get("m", 24)))
        else:
            rule = sphere_rule(2, radius, orders=tuple(params.get("orders", (4, 8, 8))))
        centers = rule.nodes
        stored.update(radius=radius, n=n)
    elif kind == "sphere_cross_plane":
        radius = float(params["radius"])
        if radius <= 0:
            raise ValueError("sphere radius must be positive")
        m = int(params.get("m", 12))
        z1 = sphere_rule(1, radius, m=m).nodes[:, 0]
        # same carrier carve-out as plane_cross_coxeter
        pr = plane_rule(1, extent=float(params.get("plane_extent", 4.0)),
                        radial_points=int(params.get("plane_radial", 6)),
                        angular_points=int(params.get("plane_angular", 8)),
                        tolerance=float("inf"))
        z2 = pr.nodes[:, 0]
        centers = np.stack([np.repeat(z1, z2.size), np.tile(z2, z1.size)], axis=1)
        weights = np.tile(pr.weights, z1.size)
        stored.update(radius=radius, m=m)
        n = 2
    elif kind == "curve":
        r_profile = params["r_profile"]
        t0, t1 = params.get("t_range", (0.0, 4.0 * np.pi))
        samples = int(params.get("samples", 64))
        if samples < 2:
            raise ValueError("need at least 2 curve samples")
        ts = np.linspace(float(t0), float(t1), samples)
        rv = np.asarray(r_profile(ts), dtype=float)
        if np.any(rv <= 0):
            raise ValueError("curve radius profile must stay positive")
        centers = (rv * np.exp(1j * ts))[:, None]
        stored.update(ts=ts.tolist(), r_values=rv.tolist(), samples=samples)
        stored.pop("r_profile", None)
        n = 1
    elif kind == "custom":
        centers = np.asarray(params["centers"], dtype=complex)
        if centers.ndim == 1:
            centers = centers[:, None]
        n = int(params.get("n", centers.shape[1]))
        stored = {"n": n}
    else:
        raise ValueError(f"unknown set kind {kind!r}")

    centers = _apply_motion(np.asarray(centers, dtype=complex), rotation,
                            np.zeros(n) if translation is None else translation)
    if kind != "curve":   # curves may self-intersect; keep the t-order
        centers, keep = _dedupe_sort(centers)
        if weights is not None:
            weights = weights[keep]
    stored["rotation"] = rotation
    stored["translation"] = (np.zeros(n) if translation is None
                             else np.asarray(translation, dtype=complex).reshape(n))
    out = SamplingSet(kind, n, centers, radii, stored, weights)
    out.validate()
    return out


def curve_set(r_profile: Callable, t_range=(0.0, 4.0 * np.pi), samples: int = 64,
              radii=None) -> SamplingSet:
    """Centers on the curve gamma(t) = r(t) e^(it)."""
    return make_set("curve", radii=radii, r_profile=r_profile,
                    t_range=t_range, samples=samples)


# ---------------------------------------------------------------------------
# column bases


class TwistedHermiteBasis:
    """phi_(a,b), a, b <= max_degree, in special_hermite_indices order."""

    engine = "twisted"
    dimension = 1

    def __init__(self, max_degree: int):
        if max_degree < 0:
            raise ValueError("max_degree must be >= 0")
        self.max_degree = max_degree
        self.indices = special_hermite_indices(max_degree)
        self.labels = [f"phi[{i.alpha},{i.beta}]" for i in self.indices]

    @property
    def ncols(self) -> int:
        return len(self.indices)

    def matrix(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=complex).reshape(-1, 1)
        return special_hermite_matrix(pts[:, 0], self.max_degree)

    def columns_up_to(self, degree: int) -> np.ndarray:
        """Column indices of the sub-basis with both indices <= degree."""
        return np.asarray([j for j, i in enumerate(self.indices)
                           if i.alpha <= degree and i.beta <= degree], dtype=int)

    def combine(self, coefficients: np.ndarray) -> Callable:
        c = np.asarray(coefficients, dtype=complex)
        return lambda pts: self.matrix(pts) @ c


class ProductHermiteBasis:
    """Tensor products phi_(a1,b1)(z1) phi_(a2,b2)(z2) on C^2, slot-1 major:
    columns with equal slot-1 index (a1, b1) are contiguous."""

    engine = "twisted"
    dimension = 2

    def __init__(self, slot_degrees=(1, 1)):
        self.slot_degrees = (int(slot_degrees[0]), int(slot_degrees[1]))
        self.slot_indices = (special_hermite_indices(self.slot_degrees[0]),
                             special_hermite_indices(self.slot_degrees[1]))
        self.labels = [f"phi[{i.alpha},{i.beta}]*phi[{j.alpha},{j.beta}]"
                       for i in self.slot_indices[0] for j in self.slot_indices[1]]

    @property
    def ncols(self) -> int:
        return len(self.slot_indices[0]) * len(self.slot_indices[1])

    def block_key(self, col: int) -> int:
        """Index of the slot-1 factor: the documented block grouping."""
        return col // len(self.slot_indices[1])

    def matrix(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=complex).reshape(-1, 2)
        m1 = special_hermite_matrix(pts[:, 0], self.slot_degrees[0])
        m2 = special_hermite_matrix(pts[:, 1], self.slot_degrees[1])
        return (m1[:, :, None] * m2[:, None, :]).reshape(pts.shape[0], -1)

    def combine(self, coefficients: np.ndarray) -> Callable:
        c = np.asarray(coefficients, dtype=complex)
        return lambda pts: self.matrix(pts) @ c


class EuclideanSectorBasis:
    """Wrapper over (radial bump) x (Fourier mode) sector functions."""

    engine = "euclidean"
    dimension = 1

    def __init__(self, functions: Sequence[SectorBasisFunction]):
        self.functions = list(functions)
        if not self.functions:
            raise ValueError("empty basis")
        self.labels = [f.name for f in self.functions]

    @property
    def ncols(self) -> int:
        return len(self.functions)

    def matrix(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=complex).reshape(-1)
        return np.stack([f.evaluate(pts) for f in self.functions], axis=1)

    def index_of(self, kind: str, order: int, support_radius: float) -> int:
        for j, f in enumerate(self.functions):
            if (f.kind == kind and f.order == order
                    and abs(f.support_radius - support_radius) < 1e-12):
                return j
        raise KeyError(f"no basis element {kind}{order} at R={support_radius}")

    def combine(self, coefficients: np.ndarray) -> Callable:
        c = np.asarray(coefficients, dtype=float)
        return lambda pts: self.matrix(pts) @ c


# ---------------------------------------------------------------------------
# operator assembly


@dataclass
class SamplingOperator:
    """Dense mean-sampling matrix with its SVD.

    sigma_min is defined as 0 for degenerate shapes (no rows, no columns,
    or fewer rows than columns -- a genuine null space exists then).
    """
    matrix: np.ndarray
    sampling_set: SamplingSet
    basis: object
    engine: str
    center_index: np.ndarray
    radius_index: np.ndarray
    singular_values: np.ndarray = field(default=None)
    _vh: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.singular_values is None:
            rows, cols = self.matrix.shape
            if rows == 0 or cols == 0:
                self.singular_values = np.zeros(0)
                self._vh = np.eye(cols, dtype=self.matrix.dtype)
            else:
                u, s, vh = np.linalg.svd(self.matrix, full_matrices=rows < cols)
                self.singular_values = s
                self._vh = vh

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def degenerate(self) -> bool:
        rows, cols = self.matrix.shape
        return rows == 0 or cols == 0 or rows < cols

    @property
    def sigma_min(self) -> float:
        if self.degenerate:
            return 0.0
        return float(self.singular_values[-1])

    def near_null(self, threshold: float) -> list[tuple[float, np.ndarray]]:
        """(sigma, right singular vector) pairs with sigma <= threshold;
        exact null directions (degenerate shapes) count with sigma 0."""
        sig = np.concatenate([self.singular_values,
                              np.zeros(self._vh.shape[0] - self.singular_values.size)])
        out = []
        for j in range(self._vh.shape[0]):
            if sig[j] <= threshold:
                out.append((float(sig[j]), np.conj(self._vh[j])))
        return out

    def restricted(self, columns: np.ndarray) -> "SamplingOperator":
        """Same rows, a subset of basis columns (fresh SVD)."""
        return SamplingOperator(self.matrix[:, columns], self.sampling_set,
                                self.basis, self.engine,
                                self.center_index, self.radius_index)


def assemble_operator(sampling_set: SamplingSet, max_degree: int | None = None,
                      engine: str = "twisted", basis=None,
                      circle_points: int = 256, sphere_orders=(16, 32, 32),
                      euclid_points: int = EUCLID_POINTS) -> SamplingOperator:
    """Build M[(j,i), b] = (basis_b x mu_(r_i))(z_j) row by row.

    Twisted rows run the sphere quadrature against closed-form basis
    evaluations; euclidean rows are plain circle averages.  Row order is
    center-major; column order is the basis's documented order.
    """
    if basis is None:
        if engine == "twisted":
            if max_degree is None:
                raise ValueError("twisted engine needs max_degree or an explicit basis")
            basis = (TwistedHermiteBasis(max_degree) if sampling_set.dimension == 1
                     else ProductHermiteBasis((max_degree, max_degree)))
        else:
            raise ValueError("euclidean engine needs an explicit basis")
    if engine not in ("twisted", "euclidean"):
        raise ValueError(f"unknown engine {engine!r}")
    if getattr(basis, "dimension", sampling_set.dimension) != sampling_set.dimension:
        raise ValueError("basis dimension does not match the set")

    centers = sampling_set.centers
    radii = sampling_set.radii
    nc, nr, ncols = centers.shape[0], radii.shape[0], basis.ncols
    ci, ri = sampling_set.row_meta()
    dtype = complex if engine == "twisted" else float
    M = np.empty((nc * nr, ncols), dtype=dtype)

    for i, r in enumerate(radii):
        if engine == "twisted":
            rule = (sphere_rule(1, r, m=circle_points) if sampling_set.dimension == 1
                    else sphere_rule(2, r, orders=sphere_orders))
            nodes, wts = rule.nodes, rule.weights
        else:
            theta = 2.0 * np.pi * np.arange(euclid_points) / euclid_points
            nodes = (r * np.exp(1j * theta))[:, None]
            wts = np.full(euclid_points, 1.0 / euclid_points)
        m = nodes.shape[0]
        chunk = max(1, int(2_000_000 // max(1, m * ncols)))
        for s in range(0, nc, chunk):
            zc = centers[s:s + chunk]
            c = zc.shape[0]
            if engine == "twisted":
                pts = zc[:, None, :] - nodes[None, :, :]
                B = basis.matrix(pts.reshape(-1, sampling_set.dimension))
                tw = wts[None, :] * twist_phase(zc[:, None, :], nodes[None, :, :])
            else:
                pts = zc[:, None, :] + nodes[None, :, :]
                B = basis.matrix(pts.reshape(-1, 1))
                tw = np.broadcast_to(wts[None, :], (c, m))
            rows = np.einsum("cm,cmb->cb", tw, B.reshape(c, m, ncols))
            M[(np.arange(s, s + c)) * nr + i] = rows
    return SamplingOperator(M, sampling_set, basis, engine, ci, ri)


def _carrier_rule(dimension: int) -> PlaneRule:
    if dimension == 1:
        return plane_rule(1, extent=12.0, radial_points=64, angular_points=256)
    # small carrier: reconstructed fields keep exact evaluators, the grid is
    # only a container
    return plane_rule(2, extent=10.0, radial_points=6, sphere3_orders=(3, 6, 6),
                      tolerance=float("inf"))


def near_null_roundtrip(operator: SamplingOperator, coefficients: np.ndarray,
                        max_radii: int | None = None) -> float:
    """Reconstruct the field of a coefficient vector and remeasure its means
    over the whole set through the mean operators themselves; returns the
    max |mean| (normalized by the coefficient norm)."""
    v = np.asarray(coefficients)
    nv = float(np.linalg.norm(v))
    if nv == 0:
        raise ValueError("zero coefficient vector")
    fn = operator.basis.combine(v / nv)
    sset = operator.sampling_set
    radii = sset.radii if max_radii is None else sset.radii[:max_radii]
    worst = 0.0
    if operator.engine == "twisted":
        carrier = _carrier_rule(sset.dimension)
        f = SampledField(sset.dimension, carrier, fn(carrier.nodes),
                         SCHWARTZ_LIKE, evaluator=fn, name="near_null")
        for z in sset.centers:
            for r in radii:
                worst = max(worst, abs(twisted_spherical_mean(f, z, r)))
    else:
        holder = _EvalOnly(fn)
        for z in sset.centers[:, 0]:
            for r in radii:
                worst = max(worst, abs(circular_mean(holder, z, r)))
    return worst


class _EvalOnly:
    def __init__(self, fn):
        self._fn = fn

    def evaluate(self, points):
        return np.real(np.asarray(self._fn(points)))


# ---------------------------------------------------------------------------
# probes


@dataclass(frozen=True)
class InjectivityReport:
    engine: str
    set_kind: str
    base_degree: int | None
    rows: int
    cols: int
    degenerate: bool
    sigma_curve: dict
    singular_values: np.ndarray
    near_null: list
    caveat: str = INJECTIVITY_CAVEAT

    @property
    def sigma_min(self) -> float:
        return min(self.sigma_curve.values()) if self.sigma_curve else 0.0

    def as_dict(self) -> dict:
        return {
            "engine": self.engine,
            "set": self.set_kind,
            "K": self.base_degree,
            "rows": self.rows,
            "cols": self.cols,
            "degenerate": self.degenerate,
            "sigma_curve": {str(k): v for k, v in self.sigma_curve.items()},
            "sigma": [float(s) for s in self.singular_values],
            "near_null": [
                {"sigma": s,
                 "coefficients": [[float(np.real(c)), float(np.imag(c))] for c in v],
                 "roundtrip_max_mean": rt}
                for (s, v, rt) in self.near_null],
            "caveat": self.caveat,
        }


def injectivity_probe(operator: SamplingOperator, near_null_threshold: float = 1e-8,
                      degree_steps=(0, 2, 4), roundtrip: bool = True) -> InjectivityReport:
    """sigma_min across growing truncations plus certified near-null fields.

    For the n = 1 twisted Hermite basis the operator is reassembled once at
    the largest requested truncation and the smaller truncations are column
    subsets (the rows do not depend on the basis).  Other bases report the
    base truncation only.
    """
    basis = operator.basis
    curve = {}
    if isinstance(basis, TwistedHermiteBasis) and len(degree_steps) > 1:
        base = basis.max_degree
        top = base + max(degree_steps)
        big = assemble_operator(operator.sampling_set, top, engine="twisted")
        for s in sorted(degree_steps):
            sub = big.restricted(big.basis.columns_up_to(base + s))
            curve[base + s] = sub.sigma_min
        base_degree = base
    else:
        base_degree = getattr(basis, "max_degree", None)
        curve[base_degree if base_degree is not None else 0] = operator.sigma_min

    entries = []
    for sigma, v in operator.near_null(near_null_threshold):
        rt = near_null_roundtrip(operator, v) if roundtrip else float("nan")
        entries.append((sigma, v, rt))
    return InjectivityReport(
        engine=operator.engine, set_kind=operator.sampling_set.kind,
        base_degree=base_degree, rows=operator.shape[0], cols=operator.shape[1],
        degenerate=operator.degenerate, sigma_curve=curve,
        singular_values=operator.singular_values, near_null=entries)


def plane_block_offmass(operator: SamplingOperator) -> float:
    """Off-block mass ratio of the weighted Gram matrix, blocks = slot-1
    basis index of a ProductHermiteBasis.

    For a plane_cross_coxeter set whose first slot rides an integration
    rule, the z1-sum in the Gram approximates the L^2(C) pairing of slot-1
    factors, so the Gram should be block diagonal over the slot-1 index up
    to quadrature error.
    """
    basis = operator.basis
    if not isinstance(basis, ProductHermiteBasis):
        raise ValueError("block structure is defined for product bases")
    if operator.sampling_set.center_weights is None:
        raise ValueError("set carries no center weights; off-block mass "
                         "is only meaningful against rule weights")
    w = operator.sampling_set.center_weights[operator.center_index]
    A = operator.matrix
    G = (A.conj().T * w[None, :]) @ A
    keys = np.asarray([basis.block_key(j) for j in range(basis.ncols)])
    off = keys[:, None] != keys[None, :]
    total = float(np.sum(np.abs(G) ** 2))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(G[off]) ** 2) / total)


# ---------------------------------------------------------------------------
# Hecke-Bochner type functions


def gaussian_profile(width: float = 2.0) -> Callable:
    """rho -> exp(-rho^2 / (2 width)); width 2 gives exp(-rho^2/4)."""

    def profile(rho):
        rho = np.asarray(rho, dtype=float)
        return np.exp(-rho ** 2 / (2.0 * width))

    return profile


@dataclass(frozen=True)
class TypeFunctionSpec:
    """f(z) = profile(|z|) P(z) with P a bigraded solid harmonic."""
    harmonic: SolidHarmonic
    profile: Callable = None
    profile_name: str = "gaussian(width=2)"
    decay_class: str = GAUSSIAN_QUARTER

    def __post_init__(self):
        if self.profile is None:
            object.__setattr__(self, "profile", gaussian_profile(2.0))

    @property
    def dimension(self) -> int:
        return self.harmonic.dimension

    def evaluator(self) -> Callable:
        h, g = self.harmonic, self.profile

        def fn(pts):
            pts = np.asarray(pts, dtype=complex).reshape(-1, h.dimension)
            return g(np.linalg.norm(pts, axis=1)) * h.evaluate(pts)

        return fn

    def build_field(self, rule: PlaneRule) -> SampledField:
        if rule.dimension != self.dimension:
            raise ValueError("rule dimension does not match the harmonic")
        return SampledField.from_function(
            self.evaluator(), rule, decay_class=self.decay_class,
            name=f"type_p{self.harmonic.p}q{self.harmonic.q}")


@dataclass(frozen=True)
class VanishingSetReport:
    """Scan of max_r |f x mu_r| against the harmonic factor's zero set."""
    centers: np.ndarray
    max_means: np.ndarray
    harmonic_magnitude: np.ndarray
    on_zero_locus: np.ndarray        # |P(center)| ~ 0
    detected_zero: np.ndarray        # measured means below tolerance
    field_peak: float
    tolerance: float
    radii: np.ndarray

    @property
    def max_on_set(self) -> float:
        vals = self.max_means[self.on_zero_locus]
        return float(vals.max()) if vals.size else 0.0

    @property
    def min_off_set(self) -> float:
        vals = self.max_means[~self.on_zero_locus]
        return float(vals.min()) if vals.size else float("inf")

    @property
    def sphere_candidates(self) -> np.ndarray:
        """Centers off P^(-1)(0) that nevertheless measured ~zero: would-be
        members of the finite sphere family."""
        return self.centers[self.detected_zero & ~self.on_zero_locus]

    def as_dict(self) -> dict:
        return {
            "field_peak": self.field_peak,
            "tolerance": self.tolerance,
            "radii": [float(r) for r in self.radii],
            "centers": [[[c.real, c.imag] for c in row] for row in self.centers],
            "max_means": [float(v) for v in self.max_means],
            "harmonic_magnitude": [float(v) for v in self.harmonic_magnitude],
            "on_zero_locus": [bool(b) for b in self.on_zero_locus],
            "detected_zero": [bool(b) for b in self.detected_zero],
        }


def _scan_pool(dimension: int) -> np.ndarray:
    """Deterministic candidate centers: per-coordinate values 0 and four
    magnitudes along four directions, tensored."""
    vals = [0.0 + 0.0j]
    for a in (0.6, 1.1, 1.6, 2.1):
        for d in (1.0, 1j, -1.0, -1j):
            vals.append(a * d)
    axes = [np.asarray(vals) for _ in range(dimension)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def hecke_bochner_counterexample(spec: TypeFunctionSpec,
                                 rule: PlaneRule | None = None,
                                 onset_centers=None, offset_centers=None,
                                 n_onset: int = 30, n_offset: int = 10,
                                 radii=None, tolerance: float = 1e-8,
                                 sphere_orders=(16, 32, 32),
                                 circle_points: int = 256):
    """Build the type function and scan its twisted means.

    Returns (field, report).  Default scan centers come from a fixed pool:
    the ``n_onset`` lexicographically first pool points with |P| ~ 0 and the
    ``n_offset`` pool points with the largest |P|.  The headline contract:
    every scanned center on P^(-1)(0) measures max_r |f x mu_r| below
    ``tolerance`` times the field's peak.
    """
    n = spec.dimension
    if rule is None:
        rule = (plane_rule(1, extent=12.0, radial_points=64, angular_points=256)
                if n == 1 else
                plane_rule(2, extent=12.0, radial_points=40, sphere3_orders=(10, 20, 20)))
    f = spec.build_field(rule)
    peak = float(np.max(np.abs(f.values)))
    if radii is None:
        radii = np.geomspace(0.3, 3.0, 10)
    radii = np.asarray(radii, dtype=float)

    if onset_centers is None or offset_centers is None:
        pool = _scan_pool(n)
        hv = np.abs(spec.harmonic.evaluate(pool))
        scale = float(hv.max()) or 1.0
        if onset_centers is None:
            onset_centers = pool[hv <= 1e-12 * scale][:n_onset]
        if offset_centers is None:
            order = np.argsort(-hv, kind="stable")
            offset_centers = pool[order[:n_offset]]
    onset_centers = np.asarray(onset_centers, dtype=complex).reshape(-1, n)
    offset_centers = np.asarray(offset_centers, dtype=complex).reshape(-1, n)
    centers = np.concatenate([onset_centers, offset_centers], axis=0)

    max_means = np.empty(centers.shape[0])
    for j, z in enumerate(centers):
        vals = [abs(twisted_spherical_mean(f, z, r, m=circle_points,
                                           orders=sphere_orders))
                for r in radii]
        max_means[j] = max(vals)
    hmag = np.abs(spec.harmonic.evaluate(centers))
    hscale = float(hmag.max()) or 1.0
    report = VanishingSetReport(
        centers=centers, max_means=max_means, harmonic_magnitude=hmag,
        on_zero_locus=hmag <= 1e-10 * hscale,
        detected_zero=max_means <= tolerance * peak,
        field_peak=peak, tolerance=tolerance, radii=radii)
    return f, report


# ---------------------------------------------------------------------------
# Q_k sector expansion fit


@dataclass(frozen=True)
class ProjectionExpansion:
    """Fitted sector coefficients of a degree-k projection on C.

    coeff_p[p] multiplies z^p phi_(k-p)^p(|z|); coeff_q[q] multiplies
    conj(z)^q phi_k^q(|z|).  The p = 0 and q = 0 columns are the same
    purely radial function, so the fit merges them and reports the shared
    coefficient in both slots.
    """
    degree: int
    q_max: int
    coeff_p: np.ndarray
    coeff_q: np.ndarray
    residual: float
    condition_number: float

    def _columns(self, z: np.ndarray) -> list[np.ndarray]:
        k = self.degree
        rho = np.abs(z)
        cols = [z ** p * laguerre_function(LaguerreSpec(k - p, p), rho)
                for p in range(0, k + 1)]
        cols += [np.conj(z) ** q * laguerre_function(LaguerreSpec(k, q), rho)
                 for q in range(1, self.q_max + 1)]
        return cols

    def predict(self, points) -> np.ndarray:
        z = np.asarray(points, dtype=complex).reshape(-1)
        cols = self._columns(z)
        coeffs = np.concatenate([self.coeff_p, self.coeff_q[1:]])
        out = np.zeros(z.shape, dtype=complex)
        for c, col in zip(coeffs, cols):
            out += c * col
        return out

    def dominant_sector(self) -> tuple[str, int]:
        """('p', p) or ('q', q) of the largest |coefficient|."""
        mags = [abs(c) for c in self.coeff_p] + [abs(c) for c in self.coeff_q[1:]]
        j = int(np.argmax(mags))
        if j <= self.degree:
            return ("p", j)
        return ("q", j - self.degree)

    def as_dict(self) -> dict:
        return {
            "degree": self.degree,
            "q_max": self.q_max,
            "coeff_p": [[c.real, c.imag] for c in self.coeff_p],
            "coeff_q": [[c.real, c.imag] for c in self.coeff_q],
            "residual": self.residual,
            "condition_number": self.condition_number,
        }


def fit_projection_expansion(qk: SampledField, k: int, q_max: int | None = None,
                             condition_limit: float = 1e10) -> ProjectionExpansion:
    """Weighted least squares for the sector expansion of Q_k on C.

    Columns are normalized to unit weighted norm before solving; a design
    condition number above ``condition_limit`` aborts with
    IllConditionedFitError rather than returning silently garbage.
    """
    if qk.dimension != 1:
        raise ValueError("the sector expansion fit runs on C")
    if q_max is None:
        q_max = k
    z = qk.rule.nodes[:, 0]
    rho = np.abs(z)
    sqw = np.sqrt(qk.rule.weights)
    cols = [z ** p * laguerre_function(LaguerreSpec(k - p, p), rho)
            for p in range(0, k + 1)]
    cols += [np.conj(z) ** q * laguerre_function(LaguerreSpec(k, q), rho)
             for q in range(1, q_max + 1)]
    A = np.stack(cols, axis=1) * sqw[:, None]
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise IllConditionedFitError("degenerate (all-zero) design column",
                                     condition_number=float("inf"))
    An = A / norms[None, :]
    svals = np.linalg.svd(An, compute_uv=False)
    cond = float(svals[0] / svals[-1]) if svals[-1] > 0 else float("inf")
    if cond > condition_limit:
        raise IllConditionedFitError(
            f"sector design matrix condition {cond:.3e} exceeds "
            f"{condition_limit:.1e}; refine the grid or lower q_max",
            condition_number=cond)
    b = qk.values * sqw
    chat, *_ = np.linalg.lstsq(An, b, rcond=None)
    c = chat / norms
    bnorm = float(np.linalg.norm(b))
    resid = float(np.linalg.norm(An @ chat - b)) / bnorm if bnorm > 0 else 0.0
    coeff_p = c[:k + 1]
    coeff_q = np.concatenate([[c[0]], c[k + 1:]])
    return ProjectionExpansion(k, q_max, coeff_p, coeff_q, resid, cond)


# ---------------------------------------------------------------------------
# exports


def operator_to_csv(operator: SamplingOperator, csv_path, meta_path=None) -> None:
    """Matrix rows with (center, radius) indices; sidecar JSON carries the
    set geometry and column labels."""
    header = ["center_index", "radius_index"]
    twisted = operator.engine == "twisted"
    for lab in operator.basis.labels:
        header += ([f"re({lab})", f"im({lab})"] if twisted else [lab])
    rows = []
    for rix in range(operator.matrix.shape[0]):
        row = [str(int(operator.center_index[rix])), str(int(operator.radius_index[rix]))]
        for v in operator.matrix[rix]:
            if twisted:
                row += [fmt(np.real(v)), fmt(np.imag(v))]
            else:
                row.append(fmt(float(np.real(v))))
        rows.append(row)
    write_csv(csv_path, header, rows)
    meta = {
        "engine": operator.engine,
        "kind": operator.sampling_set.kind,
        "dimension": operator.sampling_set.dimension,
        "centers": [[[c.real, c.imag] for c in row]
                    for row in operator.sampling_set.centers],
        "radii": [float(r) for r in operator.sampling_set.radii],
        "labels": list(operator.basis.labels),
        "sigma": [float(s) for s in operator.singular_values],
    }
    write_json(meta_path if meta_path is not None else str(csv_path) + ".json", meta)


def sigma_curve_to_csv(report: InjectivityReport, path) -> None:
    rows = [[str(int(k)), fmt(v)] for k, v in sorted(report.sigma_curve.items())]
    write_csv(path, ["K", "sigma_min"], rows)
