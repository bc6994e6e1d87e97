"""Grid construction, quadrature and the spherical differential operators."""

import numpy as np
import pytest

from lightcone import (AXISYM_TRUNCATED, FULL_SPHERE, ConfigurationError,
                       GridMismatchError, ResolutionError, build_grid,
                       gradient_sq, integrate, laplacian, sup_on_cap,
                       zone_grid)
from lightcone.sphere import SPHERE_AREA, field_from_csv, field_to_csv


# ---------------------------------------------------------------------------
# grid construction
# ---------------------------------------------------------------------------


def test_full_sphere_weights_sum_to_area():
    g = build_grid(FULL_SPHERE, 32, 64)
    assert abs(g.quad_weights.sum() - SPHERE_AREA) <= 1e-12 * SPHERE_AREA


def test_axisym_nodes_inside_zone():
    g = build_grid(AXISYM_TRUNCATED, 128, 1, 0.2)
    assert g.theta_nodes.min() > 0.2
    assert g.theta_nodes.max() < np.pi
    assert np.all(np.diff(g.theta_nodes) > 0)


def test_poles_never_sampled():
    g = build_grid(FULL_SPHERE, 48, 8)
    assert g.theta_nodes.min() > 0.0
    assert g.theta_nodes.max() < np.pi


@pytest.mark.parametrize("args", [
    (FULL_SPHERE, 2, 4, 0.0),          # degenerate size
    (FULL_SPHERE, 32, 0, 0.0),         # no phi nodes
    (FULL_SPHERE, 32, 8, 0.3),         # truncated full sphere
    (AXISYM_TRUNCATED, 64, 2, 0.1),    # axisym needs n_phi = 1
    (AXISYM_TRUNCATED, 64, 1, 2.0),    # theta_min past pi/2
    ("Cylinder", 32, 8, 0.0),
])
def test_build_grid_rejects_bad_configs(args):
    with pytest.raises(ConfigurationError):
        build_grid(*args)


def test_zone_grid_rejects_bad_zone():
    with pytest.raises(ConfigurationError):
        zone_grid(1.0, 0.5, 64)


# ---------------------------------------------------------------------------
# laplacian
# ---------------------------------------------------------------------------


def test_laplacian_eigenfunction_cos(full_grid):
    th, _ = full_grid.node_angles()
    f = full_grid.field(np.cos(th))
    assert np.abs(laplacian(f).values + 2.0 * np.cos(th)).max() <= 1e-10


def test_laplacian_annihilates_constants(full_grid, axi_grid):
    for g in (full_grid, axi_grid):
        lap = laplacian(g.constant_field(3.7))
        assert np.abs(lap.values).max() <= 1e-12


def test_laplacian_eigenfunctions_sample(full_grid):
    """Spot-check the l(l+1) eigenvalues across orders; the full l <= 32
    sweep runs in the acceptance suite."""
    for l, m, kind in [(3, 0, "cos"), (12, 7, "sin"), (32, 32, "cos")]:
        y = full_grid.harmonic_field(l, m, kind)
        err = np.abs(laplacian(y).values + l * (l + 1) * y.values).max()
        assert err <= 1e-10 * np.abs(y.values).max(), (l, m)


def test_laplacian_greens_function(axi_grid):
    w = axi_grid.field(2.0 * np.log(np.sin(axi_grid.theta_nodes / 2.0)))
    assert np.abs(laplacian(w).values + 1.0).max() <= 1e-8


def test_laplacian_grid_mismatch(full_grid, small_full_grid):
    f = full_grid.constant_field(1.0)
    with pytest.raises(GridMismatchError):
        from lightcone.sphere import _same_grid
        _same_grid(f, small_full_grid.constant_field(1.0))


# ---------------------------------------------------------------------------
# gradient_sq
# ---------------------------------------------------------------------------


def test_gradient_sq_cos(full_grid):
    th, _ = full_grid.node_angles()
    g2 = gradient_sq(full_grid.field(np.cos(th)))
    assert np.abs(g2.values - np.sin(th) ** 2).max() <= 1e-10


def test_gradient_sq_constant(full_grid):
    assert np.abs(gradient_sq(full_grid.constant_field(2.0)).values).max() <= 1e-12


def test_gradient_sq_greens_function(axi_grid):
    """|dw|² = cot²(θ/2), the analytic derivative squared."""
    th = axi_grid.theta_nodes
    w = axi_grid.field(2.0 * np.log(np.sin(th / 2.0)))
    expected = (np.cos(th / 2.0) / np.sin(th / 2.0)) ** 2
    assert np.abs(gradient_sq(w).values - expected).max() <= 1e-9


def test_gradient_sq_nonaxisymmetric(full_grid):
    """f = sin θ cos φ (l=1 harmonic): |df|² = cos²θcos²φ + sin²φ."""
    th, ph = full_grid.node_angles()
    f = full_grid.field(np.sin(th) * np.cos(ph))
    expected = (np.cos(th) * np.cos(ph)) ** 2 + np.sin(ph) ** 2
    assert np.abs(gradient_sq(f).values - expected).max() <= 1e-10


# ---------------------------------------------------------------------------
# integrate
# ---------------------------------------------------------------------------


def test_integrate_basic(full_grid):
    th, _ = full_grid.node_angles()
    assert abs(integrate(full_grid.constant_field(1.0)) - 4 * np.pi) <= 1e-12
    assert abs(integrate(full_grid.field(np.cos(th)))) <= 1e-12
    assert abs(integrate(full_grid.field(np.sin(th) ** 2)) - 8 * np.pi / 3) <= 1e-12


def test_quadrature_exactness(small_full_grid):
    """Exact for polynomials in cos θ up to degree 2 n_theta - 1, and zero
    for any e^{imφ} factor with m != 0."""
    g = small_full_grid
    th, ph = g.node_angles()
    x = np.cos(th)
    rng = np.random.default_rng(1)
    coeff = rng.normal(size=2 * g.n_theta)
    poly = np.polynomial.polynomial.polyval(x, coeff)
    exact = 2 * np.pi * sum(
        c * (2.0 / (k + 1) if k % 2 == 0 else 0.0) for k, c in enumerate(coeff))
    got = integrate(g.field(poly))
    assert abs(got - exact) <= 1e-12 * max(1.0, abs(exact))
    for m in (1, 5):
        assert abs(integrate(g.field(poly * np.cos(m * ph)))) <= 1e-10


def test_axisym_zone_quadrature(axi_grid):
    """Zone integral of sin²θ against the closed form over [0.2, π]."""
    th = axi_grid.theta_nodes
    a = 0.2
    exact = 2 * np.pi * (2.0 / 3.0 + np.cos(a) - np.cos(a) ** 3 / 3.0)
    got = integrate(axi_grid.field(np.sin(th) ** 2))
    assert abs(got - exact) <= 1e-10 * exact


def test_green_gauss_symmetry(full_grid):
    """∫ (Δ̊u) v dA = ∫ u (Δ̊v) dA for bandlimited u, v."""
    u = full_grid.harmonic_field(5, 2)
    v_vals = (full_grid.harmonic_field(3, 1).values
              + 0.5 * full_grid.harmonic_field(7, 2).values)
    v = full_grid.field(v_vals)
    lhs = integrate(full_grid.field(laplacian(u).values * v.values))
    rhs = integrate(full_grid.field(u.values * laplacian(v).values))
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


# ---------------------------------------------------------------------------
# sup_on_cap
# ---------------------------------------------------------------------------


def test_sup_on_cap_constant(axi_grid):
    assert sup_on_cap(axi_grid.constant_field(2.5), 1.0) == pytest.approx(2.5, abs=1e-12)


def test_sup_on_cap_monotone_field(axi_grid):
    """cos θ decreases in θ: the sup sits at the first node of the cap."""
    th = axi_grid.theta_nodes
    f = axi_grid.field(np.cos(th))
    val, (loc, _) = sup_on_cap(f, 0.5, with_location=True)
    assert val >= np.cos(th[th <= 0.5]).max()
    assert loc == pytest.approx(th[0], abs=2 * (th[1] - th[0]))


def test_sup_on_cap_refines_above_nodes(full_grid):
    """A bandlimited bump peaking between nodes: the interpolated sup must
    beat the raw node maximum."""
    y = full_grid.harmonic_field(6, 0)
    node_max = y.values.reshape(full_grid.n_theta, -1)[
        full_grid.theta_nodes <= 1.0].max()
    assert sup_on_cap(y, 1.0) >= node_max


def test_sup_on_cap_unresolved(axi_grid):
    with pytest.raises(ResolutionError):
        sup_on_cap(axi_grid.constant_field(1.0), 0.21)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_concurrent_reads_share_lazy_tables():
    """Grids are shared between threads; concurrent first-use of the lazy
    operator tables must give identical results."""
    from concurrent.futures import ThreadPoolExecutor
    g = build_grid(FULL_SPHERE, 48, 96)
    th, ph = g.node_angles()
    f = g.field(np.sin(th) ** 2 * np.cos(ph))
    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(lambda _: laplacian(f).values, range(8)))
    for r in results[1:]:
        assert np.array_equal(r, results[0])


def test_field_csv_roundtrip(tmp_path, small_full_grid):
    th, ph = small_full_grid.node_angles()
    f = small_full_grid.field(np.sin(th) * np.cos(ph) + 0.1)
    path = tmp_path / "field.csv"
    field_to_csv(f, path)
    g = field_from_csv(path, small_full_grid)
    assert np.array_equal(g.values, f.values)


def test_field_csv_wrong_grid(tmp_path, small_full_grid, full_grid):
    f = small_full_grid.constant_field(1.0)
    path = tmp_path / "field.csv"
    field_to_csv(f, path)
    with pytest.raises(GridMismatchError):
        field_from_csv(path, full_grid)


def test_field_rejects_bad_values(small_full_grid):
    with pytest.raises(ConfigurationError):
        small_full_grid.field(np.ones(3))
    bad = np.ones(small_full_grid.n_nodes)
    bad[0] = np.inf
    with pytest.raises(ConfigurationError):
        small_full_grid.field(bad)


def test_field_immutable(small_full_grid):
    f = small_full_grid.constant_field(1.0)
    with pytest.raises(AttributeError):
        f.values = np.zeros(small_full_grid.n_nodes)
    with pytest.raises(ValueError):
        f.values[0] = 2.0
