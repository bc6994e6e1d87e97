"""Null expansions, Gauss curvature, classification and the transformation
formula for graph sections of the cone."""

import numpy as np
import pytest

from lightcone import build_grid, AXISYM_TRUNCATED, FULL_SPHERE
from lightcone.errors import DomainError, GridMismatchError, ResolutionError
from lightcone import sections
from lightcone.sections import (BackgroundFields, NullCurvature, SectionSpec,
                                SurfaceClass, classify, compute_geometry,
                                curvature_components, frame_invariants,
                                gauss_curvature, gauss_residual, null_expansions,
                                null_frame, spec_from_function,
                                transformation_general)


@pytest.fixture(scope="module")
def rand_grid():
    """Random bandlimited sections need extra headroom for log f."""
    return build_grid(FULL_SPHERE, 128, 256)


def marginal_spec(grid):
    return spec_from_function(grid, lambda th, ph: 2.0 / (1.0 - np.cos(th)),
                              noncompact=True)


def random_bandlimited_spec(grid, rng, lband=8, amp=0.5, base=1.25):
    coeffs = np.zeros((grid.m_max + 1, grid.lmax + 1), dtype=complex)
    for l in range(lband + 1):
        for m in range(0, min(l, grid.m_max) + 1):
            coeffs[m, l] = rng.normal() + (1j * rng.normal() if m else 0.0)
    vals = grid.synthesis(coeffs.astype(np.clongdouble))
    return SectionSpec(grid.field(base + amp * vals / np.abs(vals).max()))


# ---------------------------------------------------------------------------
# null expansions and curvature
# ---------------------------------------------------------------------------


def test_round_section_expansions(full_grid):
    spec = SectionSpec(full_grid.constant_field(3.0))
    tr_chi, tr_chibar = null_expansions(spec)
    assert np.abs(tr_chi.values - 2.0 / 3.0).max() <= 1e-12
    assert np.abs(tr_chibar.values + 2.0 / 3.0).max() <= 1e-15


def test_marginal_section_expansions(axi_grid):
    spec = marginal_spec(axi_grid)
    tr_chi, tr_chibar = null_expansions(spec)
    assert np.abs(tr_chi.values).max() <= 1e-8
    expected = np.cos(axi_grid.theta_nodes) - 1.0
    assert np.abs(tr_chibar.values - expected).max() <= 1e-10


def test_expansion_product_is_minus_4K(rand_grid):
    rng = np.random.default_rng(3)
    spec = random_bandlimited_spec(rand_grid, rng, amp=0.3)
    tr_chi, tr_chibar = null_expansions(spec)
    K = gauss_curvature(spec)
    dev = np.abs(tr_chi.values * tr_chibar.values + 4.0 * K.values).max()
    assert dev <= 1e-8


def test_gauss_curvature_round_and_scaled(full_grid):
    assert np.abs(gauss_curvature(SectionSpec(full_grid.constant_field(1.0))).values
                  - 1.0).max() <= 1e-12
    assert np.abs(gauss_curvature(SectionSpec(full_grid.constant_field(2.5))).values
                  - 1.0 / 2.5 ** 2).max() <= 1e-12


def test_gauss_curvature_marginal_is_flat(axi_grid):
    K = gauss_curvature(marginal_spec(axi_grid))
    assert np.abs(K.values).max() <= 1e-8


def test_gauss_residual(full_grid, axi_grid, rand_grid):
    assert np.abs(gauss_residual(SectionSpec(full_grid.constant_field(1.0))).values
                  ).max() <= 1e-12
    assert np.abs(gauss_residual(marginal_spec(axi_grid)).values).max() <= 1e-8
    rng = np.random.default_rng(8)
    for _ in range(5):
        spec = random_bandlimited_spec(rand_grid, rng, amp=0.4)
        assert np.abs(gauss_residual(spec).values).max() <= 1e-8


def test_section_spec_requires_positive_f(full_grid):
    with pytest.raises(DomainError):
        SectionSpec(full_grid.constant_field(-1.0))


def test_unresolved_section_rejected():
    g = build_grid(AXISYM_TRUNCATED, 64, 1, 0.01)
    # blows up too fast toward the zone edge for 64 nodes
    with pytest.raises(ResolutionError):
        null_expansions(spec_from_function(g, lambda th, ph: 2.0 / (1.0 - np.cos(th))))


# ---------------------------------------------------------------------------
# null frame
# ---------------------------------------------------------------------------


def test_null_frame_round_section(full_grid):
    spec = SectionSpec(full_grid.constant_field(1.0))
    fr = null_frame(spec, 10)
    assert fr.coeff_v == 1.0
    assert abs(fr.coeff_u) <= 1e-12
    assert abs(fr.coeff_theta) <= 1e-12
    assert abs(fr.coeff_phi) <= 1e-12


def test_null_frame_marginal_theta_coefficient(axi_grid):
    """-2 f_θ/f² against the analytic derivative f_θ = -2 sinθ/(1-cosθ)²,
    itself cross-checked by finite differences."""
    spec = marginal_spec(axi_grid)
    node = np.argmin(np.abs(axi_grid.theta_nodes - np.pi / 2))
    th = axi_grid.theta_nodes[node]
    fr = null_frame(spec, int(node))
    f = 2.0 / (1.0 - np.cos(th))
    f_th = -2.0 * np.sin(th) / (1.0 - np.cos(th)) ** 2
    h = 1e-6
    f_th_fd = (2.0 / (1.0 - np.cos(th + h)) - 2.0 / (1.0 - np.cos(th - h))) / (2 * h)
    assert f_th == pytest.approx(f_th_fd, rel=1e-9)
    assert fr.coeff_theta == pytest.approx(-2.0 * f_th / f ** 2, rel=1e-9)


def test_frame_invariants_through_embedding(full_grid):
    rng = np.random.default_rng(5)
    spec = random_bandlimited_spec(full_grid, rng, amp=0.4)
    for node in (17, 901, 4000):
        inv = frame_invariants(spec, node)
        assert abs(inv["LL"]) <= 1e-10
        assert inv["LLbar"] == pytest.approx(-2.0, abs=1e-10)
        assert abs(inv["Ltheta"]) <= 1e-10
        assert abs(inv["Lphi"]) <= 1e-10


def test_null_frame_bad_node(full_grid):
    spec = SectionSpec(full_grid.constant_field(1.0))
    with pytest.raises(DomainError):
        null_frame(spec, full_grid.n_nodes)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def test_classify_round_untrapped(full_grid):
    geom = compute_geometry(SectionSpec(full_grid.constant_field(1.0)))
    assert geom.classification is SurfaceClass.UNTRAPPED
    assert not geom.noncompact


def test_classify_marginal(axi_grid):
    geom = compute_geometry(marginal_spec(axi_grid))
    assert geom.classification is SurfaceClass.MARGINALLY_TRAPPED_OUTGOING
    assert geom.noncompact


def test_classify_timelike_section_trapped():
    from lightcone import zone_grid
    g = zone_grid(np.pi / 2 + 0.2, np.pi, 64)
    geom = compute_geometry(spec_from_function(g, lambda th, ph: -1.0 / np.cos(th),
                                               noncompact=True))
    assert geom.classification is SurfaceClass.TRAPPED
    assert geom.noncompact


def test_classification_invariant_under_frame_scaling(axi_grid):
    """(L, L̲) -> (aL, L̲/a) scales the expansions by (a, 1/a); the sign
    pattern, hence the class, must not move."""
    geom = compute_geometry(marginal_spec(axi_grid))
    g = geom.tr_chi.grid
    for a in (0.25, 4.0):
        scaled = sections.SectionGeometry(
            geom.spec, g.field(a * geom.tr_chi.values),
            g.field(geom.tr_chibar.values / a), geom.K,
            geom.classification, geom.margins, geom.noncompact)
        assert classify(scaled) is geom.classification


def test_classify_mixed(rand_grid):
    rng = np.random.default_rng(11)
    spec = random_bandlimited_spec(rand_grid, rng, amp=0.6)
    geom = compute_geometry(spec)
    # a generic wiggly section has tr chi of both signs
    assert geom.classification in (SurfaceClass.MIXED, SurfaceClass.UNTRAPPED)


def test_geometry_report_keys(full_grid):
    rep = compute_geometry(SectionSpec(full_grid.constant_field(1.0))).report()
    for key in ("f_min", "f_max", "tr_chi_min", "tr_chi_max", "tr_chibar_min",
                "tr_chibar_max", "K_min", "K_max", "classification", "domain"):
        assert key in rep


# ---------------------------------------------------------------------------
# curvature components
# ---------------------------------------------------------------------------


def test_null_curvature_is_zero(full_grid):
    comp = curvature_components(SectionSpec(full_grid.constant_field(1.0)))
    assert comp.max_abs() == 0.0
    assert NullCurvature.zero().rho == 0.0


# ---------------------------------------------------------------------------
# transformation formula
# ---------------------------------------------------------------------------


def test_transformation_constant_graph(full_grid):
    f = full_grid.constant_field(2.0)
    bg = BackgroundFields.minkowski(f)
    out = transformation_general(bg, f)
    assert np.abs(out.tr_chi.values - bg.tr_chi_bg.values).max() <= 1e-13
    for name in ("laplacian", "eta", "chibar_hat", "tr_chibar", "omegabar"):
        assert np.abs(out.terms[name].values).max() <= 1e-13


def test_transformation_minkowski_reduction(rand_grid):
    rng = np.random.default_rng(21)
    spec = random_bandlimited_spec(rand_grid, rng, amp=0.35)
    tr_chi, _ = null_expansions(spec)
    out = transformation_general(BackgroundFields.minkowski(spec.f), spec.f)
    assert np.abs(out.tr_chi.values - tr_chi.values).max() <= 1e-10


def test_transformation_omegabar_isolation(full_grid):
    """Adding a constant ω̲ shifts the output by exactly -8 ω̲ |∇f|²."""
    rng = np.random.default_rng(22)
    spec = random_bandlimited_spec(full_grid, rng, amp=0.35)
    f = spec.f
    base = BackgroundFields.minkowski(f)
    out0 = transformation_general(base, f)
    cval = 0.7
    bg = BackgroundFields(base.omega, base.eta_theta, base.eta_phi,
                          base.tr_chi_bg, base.tr_chibar_bg,
                          base.chibar_hat_tt, base.chibar_hat_tp,
                          f.grid.constant_field(cval))
    out1 = transformation_general(bg, f)
    diff = out1.tr_chi.values - out0.tr_chi.values
    expected = out1.terms["omegabar"].values
    assert np.abs(diff - expected).max() <= 1e-12 * max(1.0, np.abs(expected).max())
    # and the term itself is -8 c |∇f|² in the conformal metric
    gsq = sections.sphere.gradient_sq(f).values / f.values ** 2
    assert np.abs(expected + 8.0 * cval * gsq).max() <= 1e-10


def test_transformation_round_metric_option(full_grid):
    """With metric_spec="round" the Laplacian term loses the f⁻² factor."""
    rng = np.random.default_rng(23)
    spec = random_bandlimited_spec(full_grid, rng, amp=0.3)
    bg = BackgroundFields.minkowski(spec.f)
    conf = transformation_general(bg, spec.f, metric_spec="conformal")
    rnd = transformation_general(bg, spec.f, metric_spec="round")
    lap = sections.sphere.laplacian(spec.f).values
    assert np.abs(rnd.terms["laplacian"].values + 2.0 * lap).max() <= 1e-10
    assert np.abs(conf.terms["laplacian"].values
                  + 2.0 * lap / spec.f.values ** 2).max() <= 1e-10


def test_transformation_validation(full_grid, small_full_grid):
    f = full_grid.constant_field(1.0)
    bg = BackgroundFields.minkowski(f)
    with pytest.raises(GridMismatchError):
        transformation_general(bg, small_full_grid.constant_field(1.0))
    with pytest.raises(DomainError):
        transformation_general(bg, f, metric_spec="euclidean")
    zero = full_grid.constant_field(0.0)
    with pytest.raises(DomainError):
        BackgroundFields(full_grid.constant_field(-1.0), zero, zero,
                         zero, zero, zero, zero, zero)
