"""Sampling sets, operators, probes, and the two counterexample engines."""

import json

import numpy as np
import pytest

from tsmlab.constants import REGRESSION
from tsmlab.errors import IllConditionedFitError
from tsmlab.euclidean_means import coxeter_odd_counterexample, euclidean_sector_basis
from tsmlab.fields import SampledField
from tsmlab.injectivity_lab import (DEFAULT_RADII, EuclideanSectorBasis,
                                    INJECTIVITY_CAVEAT, ProductHermiteBasis,
                                    SamplingOperator, SamplingSet,
                                    TwistedHermiteBasis, TypeFunctionSpec,
                                    assemble_operator, curve_set,
                                    fit_projection_expansion, gaussian_profile,
                                    hecke_bochner_counterexample,
                                    injectivity_probe, make_set,
                                    near_null_roundtrip, operator_to_csv,
                                    plane_block_offmass, sigma_curve_to_csv)
from tsmlab.quadrature import plane_rule
from tsmlab.special_functions import solid_harmonic_basis
from tsmlab.twisted_transforms import (spectral_projection,
                                       twisted_spherical_mean)


# ---------------------------------------------------------------------------
# sampling sets


def test_coxeter_set_count_and_membership():
    # 2 N rays x points_per_ray, plus the shared origin
    s = make_set("coxeter_lines", n_lines=2, points_per_ray=7, extent=3.0)
    assert s.centers.shape == (2 * 2 * 7 + 1, 1)
    s.validate()
    # lexicographic order, no duplicates
    c = s.centers[:, 0]
    keys = np.stack([c.real, c.imag], axis=1)
    assert np.all(np.lexsort((keys[:, 1], keys[:, 0])) == np.arange(c.size))
    dists = np.abs(c[:, None] - c[None, :])
    np.fill_diagonal(dists, 1.0)
    assert dists.min() > 1e-9


def test_set_motion_is_recorded_and_validated():
    s = make_set("coxeter_lines", n_lines=3, points_per_ray=4, extent=2.0,
                 rotation=0.37, translation=[0.5 - 0.2j])
    s.validate()        # membership is checked after unwinding the motion
    assert s.params["rotation"] == 0.37


def test_validate_rejects_off_locus_center():
    s = make_set("coxeter_lines", n_lines=2, points_per_ray=3, extent=2.0)
    tampered = SamplingSet("coxeter_lines", 1,
                           np.concatenate([s.centers, [[0.5 + 0.31j]]]),
                           s.radii, s.params)
    with pytest.raises(ValueError, match="off the declared"):
        tampered.validate()


def test_sampling_set_radius_validation():
    with pytest.raises(ValueError, match="radii"):
        make_set("coxeter_lines", n_lines=1, radii=[1.0, 0.5])
    with pytest.raises(ValueError, match="radii"):
        make_set("coxeter_lines", n_lines=1, radii=[-1.0, 0.5])


def test_sphere_and_curve_sets():
    s = make_set("sphere", radius=2.0, n=2, orders=(3, 4, 4))
    s.validate()
    assert np.allclose(np.linalg.norm(s.centers, axis=1), 2.0)

    spiral = curve_set(lambda t: 1.0 + 0.1 * t, samples=40)
    spiral.validate()
    assert spiral.centers.shape == (40, 1)
    # curve order preserved (no lex sort): radii grow along the parameter
    assert np.all(np.diff(np.abs(spiral.centers[:, 0])) > 0)


def test_plane_cross_set_carries_weights():
    s = make_set("plane_cross_coxeter", n_lines=2, extent=2.0, points_per_ray=3,
                 plane_extent=3.0, plane_radial=4, plane_angular=6)
    s.validate()
    assert s.center_weights is not None
    assert s.center_weights.shape == (s.centers.shape[0],)
    assert np.all(s.center_weights > 0)


def test_default_radii():
    s = make_set("coxeter_lines", n_lines=1)
    assert np.array_equal(s.radii, np.asarray(DEFAULT_RADII))


# ---------------------------------------------------------------------------
# bases and operator assembly


def test_twisted_basis_shapes():
    b = TwistedHermiteBasis(3)
    assert b.ncols == 16
    sub = b.columns_up_to(1)
    assert [b.labels[j] for j in sub] == \
        ["phi[0,0]", "phi[0,1]", "phi[1,0]", "phi[1,1]"]
    pts = np.array([0.3 + 0.2j, -1.0 + 0.4j])
    m = b.matrix(pts)
    assert m.shape == (2, 16)
    e3 = np.zeros(16)
    e3[3] = 1.0
    assert np.allclose(b.combine(e3)(pts), m[:, 3])


def test_product_basis_block_structure():
    b = ProductHermiteBasis((1, 1))
    assert b.ncols == 16
    assert [b.block_key(j) for j in range(8)] == [0, 0, 0, 0, 1, 1, 1, 1]
    pts = np.array([[0.2 + 0.1j, -0.4 + 0.3j]])
    m = b.matrix(pts)
    b1 = TwistedHermiteBasis(1).matrix(pts[:, 0])
    b2 = TwistedHermiteBasis(1).matrix(pts[:, 1])
    assert np.allclose(m, (b1[:, :, None] * b2[:, None, :]).reshape(1, -1))


def test_operator_entries_match_direct_means():
    """Spot-check assembled rows against scalar twisted means of the basis
    columns themselves."""
    sset = make_set("coxeter_lines", n_lines=2, points_per_ray=2, extent=2.0,
                    radii=[0.8, 1.6])
    op = assemble_operator(sset, max_degree=2, circle_points=128)
    basis = op.basis
    carrier = plane_rule(1, extent=8.0, radial_points=24, angular_points=48)
    for (row, col) in [(0, 0), (3, 5), (11, 7)]:
        j, i = op.center_index[row], op.radius_index[row]
        e = np.zeros(basis.ncols)
        e[col] = 1.0
        fn = basis.combine(e)
        f = SampledField(1, carrier, fn(carrier.nodes[:, 0]), evaluator=
                         lambda p, _fn=fn: _fn(np.asarray(p)[:, 0]))
        ref = twisted_spherical_mean(f, sset.centers[j], sset.radii[i], m=128)
        assert abs(op.matrix[row, col] - ref) < 1e-12


def test_operator_svd_invariance_under_unitary_mixing():
    sset = make_set("coxeter_lines", n_lines=2, points_per_ray=3, extent=3.0,
                    radii=np.linspace(0.5, 3.0, 8))
    op = assemble_operator(sset, max_degree=2)
    rng = np.random.default_rng(12)
    g = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    u, _ = np.linalg.qr(g)
    mixed = np.linalg.svd(op.matrix @ u, compute_uv=False)
    assert np.max(np.abs(mixed - op.singular_values)
                  / op.singular_values[0]) < 1e-12


def test_sigma_min_monotone_in_rows():
    sset = make_set("coxeter_lines", n_lines=2, points_per_ray=3, extent=3.0,
                    radii=np.linspace(0.5, 4.0, 10))
    op = assemble_operator(sset, max_degree=2)
    few = op.radius_index < 4      # same centers, fewer radii
    sub = SamplingOperator(op.matrix[few], op.sampling_set, op.basis,
                           op.engine, op.center_index[few], op.radius_index[few])
    assert sub.sigma_min <= op.sigma_min + 1e-12


def test_degenerate_operator_reports_exact_null():
    sset = make_set("coxeter_lines", n_lines=1, points_per_ray=1, extent=1.0,
                    radii=[1.0])       # 3 rows
    op = assemble_operator(sset, max_degree=2)   # 9 columns
    assert op.degenerate
    assert op.sigma_min == 0.0
    null = op.near_null(0.0)
    assert len(null) >= 9 - 3
    sigma, v = null[-1]
    assert sigma == 0.0
    assert np.linalg.norm(op.matrix @ v) < 1e-12


# ---------------------------------------------------------------------------
# euclidean engine and the twisted contrast


@pytest.fixture(scope="module")
def euclid_odd_operator():
    """Mixed basis: sin(2t), sin(4t) are odd for Sigma_2 (annihilated rows
    everywhere on the lines), sin(1t), sin(3t) are not (their columns keep
    the operator's scale honest)."""
    sset = make_set("coxeter_lines", n_lines=2, points_per_ray=10, extent=6.0)
    basis = EuclideanSectorBasis(
        euclidean_sector_basis(4, support_radii=(1.0,), orders=[1, 2, 3, 4],
                               kinds=("sin",)))
    return assemble_operator(sset, engine="euclidean", basis=basis)


def test_euclid_odd_sector_operator_is_singular(euclid_odd_operator):
    op = euclid_odd_operator
    assert not op.degenerate
    assert op.singular_values[0] > 1e-4            # surviving sectors
    assert op.sigma_min < 1e-12 * op.singular_values[0]

    # the counterexample is literally a basis element: its coordinate vector
    # must be annihilated
    for order in (2, 4):
        j = op.basis.index_of("sin", order, 1.0)
        v = np.zeros(op.basis.ncols)
        v[j] = 1.0
        assert np.linalg.norm(op.matrix @ v) / np.linalg.norm(v) < 1e-8


def test_near_null_roundtrip_remeasures_means(euclid_odd_operator):
    op = euclid_odd_operator
    sigma, v = op.near_null(1e-10)[0]
    worst = near_null_roundtrip(op, v, max_radii=6)
    assert worst < 1e-10


def test_twisted_operator_matches_frozen_regression():
    sset = make_set("coxeter_lines", n_lines=2, points_per_ray=10, extent=6.0)
    op = assemble_operator(sset, max_degree=10)
    frozen = REGRESSION["twisted_sigma_min_coxeter2_K10"]
    assert op.sigma_min == pytest.approx(frozen, rel=1e-10)
    # rerun is bit-identical (fixed node order, compensated reductions)
    again = assemble_operator(sset, max_degree=10)
    assert again.sigma_min == op.sigma_min


def test_probe_report_structure():
    sset = make_set("coxeter_lines", n_lines=2, points_per_ray=4, extent=4.0,
                    radii=np.geomspace(0.3, 4.0, 12))
    op = assemble_operator(sset, max_degree=4)
    rep = injectivity_probe(op, degree_steps=(0, 2), roundtrip=False)
    assert rep.engine == "twisted"
    assert set(rep.sigma_curve) == {4, 6}
    assert rep.sigma_curve[6] < rep.sigma_curve[4]   # tighter truncation
    assert rep.caveat == INJECTIVITY_CAVEAT
    json.dumps(rep.as_dict())                        # serializable as-is


def test_plane_cross_block_offmass():
    sset = make_set("plane_cross_coxeter", n_lines=2, extent=2.5,
                    points_per_ray=2, radii=np.geomspace(0.4, 3.0, 4))
    op = assemble_operator(sset, basis=ProductHermiteBasis((1, 1)),
                           sphere_orders=(8, 16, 16))
    assert plane_block_offmass(op) < 1e-8


# ---------------------------------------------------------------------------
# Hecke-Bochner vanishing scan


def test_hecke_bochner_zero_set_detection():
    P = solid_harmonic_basis(1, 1, 2)[0]
    spec = TypeFunctionSpec(P, profile=gaussian_profile(2.0))
    f, rep = hecke_bochner_counterexample(
        spec, n_onset=6, n_offset=4, radii=np.geomspace(0.5, 2.0, 4),
        sphere_orders=(8, 16, 16))
    assert f.dimension == 2
    assert rep.max_on_set <= 1e-8 * rep.field_peak
    assert rep.min_off_set >= 1e-3 * rep.field_peak
    assert rep.sphere_candidates.size == 0
    json.dumps(rep.as_dict())


def test_type_function_spec_guards():
    P = solid_harmonic_basis(1, 1, 2)[0]
    spec = TypeFunctionSpec(P)
    rule1 = plane_rule(1, extent=6.0, radial_points=16, angular_points=32)
    with pytest.raises(ValueError, match="dimension"):
        spec.build_field(rule1)


# ---------------------------------------------------------------------------
# sector expansion fit


@pytest.fixture(scope="module")
def q2_of_type_p1(rule_c1_small_module):
    # profile deliberately not e^(-|z|^2/4): that one is a single spectral
    # line (z e^(-|z|^2/4) is a basis element) and would leave Q_2 empty
    f = SampledField.from_function(
        lambda p: p[:, 0] * np.exp(-np.abs(p[:, 0]) ** 2 / 3.0),
        rule_c1_small_module, name="type_p1")
    return spectral_projection(f, 2)


@pytest.fixture(scope="module")
def rule_c1_small_module():
    return plane_rule(1, extent=10.0, radial_points=40, angular_points=128)


def test_fit_localizes_and_predicts(q2_of_type_p1):
    fit = fit_projection_expansion(q2_of_type_p1, 2)
    assert fit.dominant_sector() == ("p", 1)
    assert fit.condition_number < 10.0
    # held-out check away from the grid
    pts = np.array([0.45 + 0.3j, 1.3 - 0.8j, 2.2 + 0.4j])
    ref = q2_of_type_p1.evaluate(pts[:, None])
    pred = fit.predict(pts)
    scale = float(np.max(np.abs(ref)))
    assert np.max(np.abs(pred - ref)) < 1e-6 * scale
    json.dumps(fit.as_dict())


def test_fit_condition_guard(q2_of_type_p1):
    with pytest.raises(IllConditionedFitError):
        fit_projection_expansion(q2_of_type_p1, 2, condition_limit=0.5)


def test_fit_requires_c1(c2_stub=None):
    rule = plane_rule(2, extent=4.0, radial_points=8, sphere3_orders=(3, 6, 6),
                      tolerance=float("inf"))
    f = SampledField.from_function(
        lambda p: np.exp(-np.sum(np.abs(p) ** 2, axis=1)).astype(complex), rule)
    with pytest.raises(ValueError, match="on C"):
        fit_projection_expansion(f, 1)


# ---------------------------------------------------------------------------
# exports


def test_operator_and_sigma_csv(tmp_path, euclid_odd_operator):
    op = euclid_odd_operator
    csv_p = tmp_path / "operator.csv"
    meta_p = tmp_path / "operator.json"
    operator_to_csv(op, csv_p, meta_p)
    lines = csv_p.read_text().strip().splitlines()
    assert len(lines) == op.shape[0] + 1
    meta = json.loads(meta_p.read_text())
    assert meta["labels"] == op.basis.labels

    rep = injectivity_probe(op, roundtrip=False)
    sig_p = tmp_path / "sigma.csv"
    sigma_curve_to_csv(rep, sig_p)
    assert len(sig_p.read_text().strip().splitlines()) == len(rep.sigma_curve) + 1
