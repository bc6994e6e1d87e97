"""Green's function of the sphere Laplacian and the embedded marginal
surface."""

import numpy as np
import pytest

from lightcone import build_grid, AXISYM_TRUNCATED, FULL_SPHERE, laplacian
from lightcone.errors import BlowUpError, DomainError
from lightcone.greens import (GreensFunction, conformal_factor,
                              distributional_residual, embed_marginal_section,
                              flatness_check, greens_w, log_moment_weighted,
                              marginal_section_spec, north_pole_value)
from lightcone.hyperplanes import Hyperplane, trichotomy_report
from lightcone.minkowski import Covector4


def test_greens_w_values():
    assert greens_w(np.pi) == 0.0
    assert conformal_factor(np.pi / 2) == pytest.approx(2.0, rel=1e-15)
    th = np.linspace(0.05, np.pi, 200)
    assert np.abs(conformal_factor(th) * (1 - np.cos(th)) - 2.0).max() <= 1e-12


def test_conformal_factor_matches_exp_minus_w():
    th = np.linspace(1e-3, np.pi, 500)
    rel = np.abs(conformal_factor(th) / np.exp(-greens_w(th)) - 1.0)
    assert rel.max() <= 1e-14


def test_greens_domain_errors():
    for bad in (0.0, -0.1, 3.5):
        with pytest.raises(DomainError):
            greens_w(bad)
        with pytest.raises(DomainError):
            conformal_factor(bad)


def test_greens_function_object():
    w = GreensFunction()
    assert w.pole_theta == 0.0
    assert w(np.pi) == 0.0
    assert w.conformal_factor(np.pi / 2) == pytest.approx(2.0)


def test_greens_w_negative_inside():
    th = np.linspace(0.01, np.pi - 1e-6, 100)
    assert np.all(greens_w(th) < 0.0)


# ---------------------------------------------------------------------------
# distributional identity
# ---------------------------------------------------------------------------


def test_residual_constant_test_function():
    g = build_grid(FULL_SPHERE, 128, 8)
    assert distributional_residual(g.constant_field(1.0)) <= 1e-11


def test_residual_cos_and_closed_form():
    g = build_grid(FULL_SPHERE, 256, 8)
    resid = distributional_residual(g.field_from_function(lambda th, ph: np.cos(th)))
    assert resid <= 1e-3
    # the cos test function isolates ∫ w cosθ dA = -2π
    moment = log_moment_weighted(lambda x: x)
    assert abs(moment + 2 * np.pi) <= 1e-6


def test_residual_decreases_under_refinement():
    resids = []
    for n in (128, 256):
        g = build_grid(FULL_SPHERE, n, 8)
        resids.append(distributional_residual(g.harmonic_field(4, 0)))
    assert resids[1] <= resids[0]
    assert resids[1] <= 1e-2


def test_north_pole_value_spectral():
    g = build_grid(FULL_SPHERE, 64, 8)
    f = g.field_from_function(lambda th, ph: np.cos(th) ** 3 + 0.5)
    assert north_pole_value(f) == pytest.approx(1.5, abs=1e-12)


def test_residual_needs_full_sphere(axi_grid):
    with pytest.raises(DomainError):
        distributional_residual(axi_grid.constant_field(1.0))


# ---------------------------------------------------------------------------
# embedded marginal surface
# ---------------------------------------------------------------------------


def test_embedding_examples():
    p = embed_marginal_section(np.pi, 0.0)
    assert np.allclose(p.as_array(), [-1, 0, 0, -1], atol=1e-15)
    p = embed_marginal_section(np.pi / 2, 0.0)
    assert np.allclose(p.as_array(), [-2, 2, 0, 0], atol=1e-14)


def test_embedding_lies_in_null_hyperplane_and_cone():
    rng = np.random.default_rng(2)
    for _ in range(200):
        th = rng.uniform(0.05, np.pi)
        ph = rng.uniform(0, 2 * np.pi)
        p = embed_marginal_section(th, ph)
        assert abs(p.x0 + p.x3 + 2.0) <= 1e-12 * max(1.0, abs(p.x0))
        assert abs(p.cone_residual()) <= 1e-12 * max(1.0, p.x0 ** 2)


def test_embedding_blows_up_at_pole():
    with pytest.raises(BlowUpError):
        embed_marginal_section(0.0, 0.0)
    with pytest.raises(DomainError):
        embed_marginal_section(3.5, 0.0)


# ---------------------------------------------------------------------------
# flatness and consistency with the hyperplane route
# ---------------------------------------------------------------------------


def test_flatness_check():
    g = build_grid(AXISYM_TRUNCATED, 256, 1, 0.2)
    assert flatness_check(g) <= 1e-8
    g = build_grid(AXISYM_TRUNCATED, 256, 1, 0.5)
    assert flatness_check(g) <= 1e-10


def test_greens_laplacian_invariant():
    g = build_grid(AXISYM_TRUNCATED, 224, 1, 0.2)
    w = g.field(greens_w(g.theta_nodes))
    assert np.abs(laplacian(w).values + 1.0).max() <= 1e-8


def test_marginal_expansions_closed_form():
    from lightcone.sections import null_expansions
    g = build_grid(AXISYM_TRUNCATED, 256, 1, 0.2)
    tr_chi, tr_chibar = null_expansions(marginal_section_spec(g))
    assert np.abs(tr_chi.values).max() <= 1e-8
    assert np.abs(tr_chibar.values - (np.cos(g.theta_nodes) - 1)).max() <= 1e-10


def test_embedded_surface_csv(tmp_path):
    from lightcone.greens import embedded_surface_to_csv
    path = tmp_path / "surface.csv"
    embedded_surface_to_csv(path, np.linspace(0.3, np.pi, 5), [0.0, np.pi / 2])
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (10, 6)
    # all rows in the null hyperplane x0 + x3 = -2
    assert np.abs(data[:, 2] + data[:, 5] + 2.0).max() <= 1e-10


def test_consistent_with_hyperplane_section():
    """Same surface through the hyperplane route: flat and marginal."""
    g = build_grid(AXISYM_TRUNCATED, 96, 1, 0.0)
    rep = trichotomy_report(Hyperplane(Covector4(1, 0, 0, 1), -2.0), g)
    assert abs(rep["K_value"]) <= 1e-8
    assert rep["classification"] == "MarginallyTrappedOutgoing"
