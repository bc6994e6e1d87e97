"""The Green's function of the sphere Laplacian and the marginal section.

w(theta) = 2 log sin(theta/2) satisfies Δ̊ w = -1 away from the north pole
and, distributionally, Δ̊ w + 1 = 4π δ_N. Its conformal factor e^{-w} is the
stereographic one; the graph f = e^{-w} is the marginally trapped section
cut out of the past cone by the null hyperplane x0 + x3 = -2.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from . import sections, sphere
from .errors import BlowUpError, DomainError
from .minkowski import EventRect


def greens_w(theta):
    """Green's function w(theta) = 2 log sin(theta/2) on (0, pi]."""
    theta = np.asarray(theta, dtype=np.float64)
    if np.any(theta <= 0.0) or np.any(theta > np.pi):
        raise DomainError("greens_w requires theta in (0, pi]")
    out = 2.0 * np.log(np.sin(theta / 2.0))
    return float(out) if out.ndim == 0 else out


def conformal_factor(theta):
    """Stereographic conformal factor e^{-w} = 2/(1 - cos θ).

    Evaluated as 1/sin²(θ/2), which is the same function without the
    1 - cos θ cancellation near the pole.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if np.any(theta <= 0.0) or np.any(theta > np.pi):
        raise DomainError("conformal_factor requires theta in (0, pi]")
    out = 1.0 / np.sin(theta / 2.0) ** 2
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GreensFunction:
    """Green's function with its pole fixed at theta = 0."""

    pole_theta: float = 0.0

    def __call__(self, theta):
        return greens_w(theta)

    def conformal_factor(self, theta):
        return conformal_factor(theta)


def distributional_residual(testfield, grid=None):
    """Weak-form residual of Δ̊ w + 1 = 4π δ_N against a test function.

    Computes |∫ w Δ̊φ dA + ∫ φ dA - 4π φ(N)| on a FullSphere grid. The log
    singularity of w is integrable; the Gauss-Legendre rule in cos theta
    converges (polynomially) on it, so the residual decreases under
    refinement for any fixed bandlimited φ. φ(N) is evaluated spectrally
    (sum of the m = 0 coefficients, P̄_l(1) = sqrt((2l+1)/4π)).
    """
    if grid is None:
        grid = testfield.grid
    if testfield.grid is not grid:
        raise DomainError("test field must live on the supplied grid")
    if grid.mode != sphere.FULL_SPHERE:
        raise DomainError("distributional residual needs a FullSphere grid")
    lap_phi = sphere.laplacian(testfield)
    w_vals = greens_w(np.repeat(grid.theta_nodes, grid.n_phi))
    term_w = float(np.dot(grid.quad_weights, w_vals * lap_phi.values))
    term_phi = sphere.integrate(testfield)
    phi_north = north_pole_value(testfield)
    return abs(term_w + term_phi - 4.0 * np.pi * phi_north)


def north_pole_value(field):
    """Spectral evaluation of a FullSphere field at theta = 0."""
    grid = field.grid
    coeffs = grid.analysis(field.values)
    ls = np.arange(grid.lmax + 1)
    p_at_one = np.sqrt((2.0 * ls + 1.0) / (4.0 * np.pi))
    return float(np.real(np.dot(coeffs[0], p_at_one)))


def log_moment_weighted(fn, n=8192):
    """∫ w(θ) fn(cosθ) dA with a dedicated fine Gauss-Legendre rule.

    Used for closed-form anchor checks such as ∫ w cosθ dA = -2π; the plain
    grid rule converges only like n⁻² against the endpoint log singularity.
    """
    x, wq = roots_legendre(n)
    return 2.0 * np.pi * float(np.sum(wq * np.log((1.0 - x) / 2.0) * fn(x)))


def embed_marginal_section(theta, phi):
    """Rectangular embedding of the marginal section S_{e^{-w}}.

    (θ, φ) ↦ ( -2, 2 sinθ cosφ, 2 sinθ sinφ, 2 cosθ ) / (1 - cosθ);
    lies on the cone and in the null hyperplane x0 + x3 = -2.
    """
    if theta <= 0.0:
        raise BlowUpError(
            "the marginal section escapes to infinity toward theta = 0")
    if theta > np.pi:
        raise DomainError("theta outside (0, pi]")
    s = 1.0 - math.cos(theta)
    return EventRect(-2.0 / s,
                     2.0 * math.sin(theta) * math.cos(phi) / s,
                     2.0 * math.sin(theta) * math.sin(phi) / s,
                     2.0 * math.cos(theta) / s)


def embedded_surface_to_csv(path, thetas, phis):
    """Write the embedded marginal surface as CSV (theta, phi, x0, x1, x2, x3).

    Rows are the (theta, phi) product grid, theta-major; meant for external
    plotting.
    """
    with open(path, "w") as fh:
        fh.write("theta,phi,x0,x1,x2,x3\n")
        for th in np.atleast_1d(thetas):
            for ph in np.atleast_1d(phis):
                p = embed_marginal_section(float(th), float(ph))
                fh.write(f"{th:.17g},{ph:.17g},{p.x0:.17g},{p.x1:.17g},"
                         f"{p.x2:.17g},{p.x3:.17g}\n")


def marginal_section_spec(grid):
    """SectionSpec of the marginal surface f = e^{-w} on an axisym zone grid."""
    if grid.mode != sphere.AXISYM_TRUNCATED or grid.theta_min <= 0.0:
        raise DomainError(
            "the marginal section needs an AxisymTruncated grid with theta_min > 0")
    return sections.spec_from_function(grid, lambda th, ph: conformal_factor(th),
                                       noncompact=True,
                                       description=f"marginal section on "
                                       f"[{grid.theta_min:.6g}, pi]")


def flatness_check(grid):
    """sup |K| of the marginal section on the grid's zone (should be ~0)."""
    spec = marginal_section_spec(grid)
    K = sections.gauss_curvature(spec)
    return float(np.abs(K.values).max())
