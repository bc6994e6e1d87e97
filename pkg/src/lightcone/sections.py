"""Geometry of graph sections of the past lightcone.

A spacelike section is the graph u = -f(theta, phi) over the sphere of
directions, with f > 0. Its induced metric is f² times the round metric, the
ingoing expansion is -2/f pointwise, and the outgoing expansion and Gauss
curvature are controlled by the spherical Laplacian of log f:

    tr χ̃ = (2/f)(1 - Δ̊ log f),      K = f⁻²(1 - Δ̊ log f).

Everything here is exact differential geometry in flat spacetime; the only
numerics is the Laplacian, for which two independent code paths are kept and
cross-checked (the log form above and the raw form
2/f - 2 Δ_{S_f} f + (2/f)|df|², with Δ_{S_f} = f⁻²Δ̊ by 2D conformal
covariance).
"""

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

from . import sphere
from .errors import DomainError, GridMismatchError, ResolutionError
from .minkowski import cone_points, minkowski_dot
from .sphere import ScalarField

#: trailing-coefficient ratio above which a graph function is refused
RESOLUTION_TOL = 1e-10

#: relative disagreement allowed between the two tr-chi code paths
CROSSCHECK_TOL = 1e-9

#: dynamic range of f past which the raw form differentiates 1/f instead of f
RECIPROCAL_RANGE = 4.0


class SurfaceClass(str, Enum):
    TRAPPED = "Trapped"
    MARGINALLY_TRAPPED_OUTGOING = "MarginallyTrappedOutgoing"
    MARGINALLY_TRAPPED_INGOING = "MarginallyTrappedIngoing"
    UNTRAPPED = "Untrapped"
    MIXED = "Mixed"


class SectionSpec:
    """Graph function f > 0 on a sphere grid, plus its domain descriptor."""

    __slots__ = ("f", "noncompact", "description")

    def __init__(self, f, noncompact=None, description=None):
        if f.min() <= 0.0:
            raise DomainError(f"graph function must be positive, min={f.min()}")
        g = f.grid
        truncated = g.theta_min > 0.0 or g.theta_max < np.pi
        self.f = f
        self.noncompact = truncated if noncompact is None else bool(noncompact)
        if description is None:
            if truncated:
                description = f"theta in [{g.theta_min:.6g}, {g.theta_max:.6g}]"
            else:
                description = "full sphere"
        self.description = description

    @property
    def grid(self):
        return self.f.grid

    def check_resolved(self, tol=RESOLUTION_TOL):
        ratio = self.grid.spectral_trailing_ratio(self.f.values)
        if ratio > tol:
            raise ResolutionError(
                f"graph function unresolved: trailing coefficient ratio "
                f"{ratio:.3e} exceeds {tol:.1e}")

    def embedded_points(self):
        """Rectangular coordinates of the section nodes, via the cone chart."""
        th, ph = self.grid.node_angles()
        return cone_points(-self.f.values, th, ph)


def spec_from_function(grid, fn, **kwargs):
    """SectionSpec sampling f = fn(theta, phi) on a grid."""
    return SectionSpec(grid.field_from_function(fn), **kwargs)


def _log_laplacian(spec, check_resolution=True):
    if check_resolution:
        spec.check_resolved()
    logf = spec.grid.field(np.log(spec.f.values))
    return sphere.laplacian(logf)


def null_expansions(spec, check_resolution=True, crosscheck=True):
    """Outgoing and ingoing null expansions (tr χ̃, tr χ̲̃) of a section.

    tr χ̃ is computed both from the Δ̊ log f form and from the raw form; a
    disagreement beyond 1e-9 relative means the grid does not resolve f and
    raises :class:`ResolutionError`.
    """
    f = spec.f.values
    grid = spec.grid
    lap_logf = _log_laplacian(spec, check_resolution).values
    tr_chi = (2.0 / f) * (1.0 - lap_logf)
    if crosscheck:
        tr_chi_raw = tr_chi_raw_form(spec, check_resolution=False).values
        # relative to the expansion scale of the section (tr chi itself can
        # vanish identically, e.g. on the marginal surface)
        scale = max(np.abs(tr_chi).max(), np.abs(2.0 / f).max())
        dev = np.abs(tr_chi - tr_chi_raw).max() / scale
        if dev > CROSSCHECK_TOL:
            raise ResolutionError(
                f"tr chi code paths disagree by {dev:.3e} relative; "
                "grid does not resolve the graph function")
    return grid.field(tr_chi), grid.field(-2.0 / f)


def tr_chi_raw_form(spec, check_resolution=True):
    """tr χ̃ via the raw form 2/f - 2 Δ_{S_f} f + (2/f)|df|²_{f²γ̊}.

    Kept as an independent code path from :func:`null_expansions` (it never
    touches log f); used by the Gauss-equation residual so the residual
    measures genuine cross-path consistency.

    Discretization: for well-scaled f the derivatives act on f itself
    (exact for bandlimited graphs). Where f is edge-dominated (sections
    whose graph blows up at a trimmed domain edge) the same formula is
    evaluated through 1/f, which stays bounded there; with
    Δ_{S_f} f = f⁻²Δ̊f it rearranges exactly to 2/f + 2Δ̊(1/f) - 2f|d̊(1/f)|².
    """
    if check_resolution:
        spec.check_resolved()
    f = spec.f.values
    if spec.f.max() / spec.f.min() <= RECIPROCAL_RANGE:
        lap_f = sphere.laplacian(spec.f).values
        gsq_f = sphere.gradient_sq(spec.f).values
        return spec.grid.field(2.0 / f - 2.0 * lap_f / f ** 2 + 2.0 * gsq_f / f ** 3)
    recip = spec.grid.field(1.0 / f)
    lap_g = sphere.laplacian(recip).values
    gsq_g = sphere.gradient_sq(recip).values
    return spec.grid.field(2.0 / f + 2.0 * lap_g - 2.0 * f * gsq_g)


def gauss_curvature(spec, check_resolution=True):
    """Gauss curvature K = f⁻²(1 - Δ̊ log f) of the section."""
    f = spec.f.values
    lap_logf = _log_laplacian(spec, check_resolution).values
    return spec.grid.field((1.0 - lap_logf) / f ** 2)


def gauss_residual(spec, check_resolution=True):
    """Pointwise Gauss-equation residual K + ¼ tr χ̃ tr χ̲̃.

    On the Minkowski cone the curvature source and both shears vanish, so
    the residual is identically zero in exact arithmetic. K is taken from
    the log-Laplacian form and tr χ̃ from the raw form, so the residual
    measures the consistency of the two differentiation paths.
    """
    K = gauss_curvature(spec, check_resolution).values
    tr_chi = tr_chi_raw_form(spec, check_resolution=False).values
    f = spec.f.values
    return spec.grid.field(K + 0.25 * tr_chi * (-2.0 / f))


@dataclass(frozen=True)
class NullFrameCoeffs:
    """Coefficients of the outgoing null normal L̃ at one node.

    In the double null coordinate basis,
    L̃ = coeff_v ∂v + coeff_u ∂u + coeff_theta ∂θ + coeff_phi ∂φ with
    coeff_v = 1, coeff_theta = -2 f_θ/f², coeff_phi = -2 f_φ/(f² sin²θ).
    The ∂u component |d̊f|²/f² is what makes L̃ null; it vanishes for
    constant f. The ingoing normal is L̲̃ = ∂u.
    """

    theta: float
    phi: float
    coeff_v: float
    coeff_u: float
    coeff_theta: float
    coeff_phi: float


def null_frame(spec, node):
    """Null frame coefficients of L̃ at a node index (flattened order)."""
    grid = spec.grid
    if not 0 <= node < grid.n_nodes:
        raise DomainError(f"node index {node} out of range")
    f = spec.f.values[node]
    f_th = sphere.dtheta(spec.f).values[node]
    f_ph = sphere.dphi(spec.f).values[node]
    th, ph = grid.node_angles()
    sin2 = math.sin(th[node]) ** 2
    grad2 = f_th ** 2 + f_ph ** 2 / sin2
    return NullFrameCoeffs(theta=float(th[node]), phi=float(ph[node]),
                           coeff_v=1.0,
                           coeff_u=grad2 / f ** 2,
                           coeff_theta=-2.0 * f_th / f ** 2,
                           coeff_phi=-2.0 * f_ph / (f ** 2 * sin2))


def frame_invariants(spec, node):
    """Frame inner products at a node, evaluated through the embedding.

    Returns a dict with eta(L,L), eta(L,Lbar), eta(L, tangent_theta),
    eta(L, tangent_phi); the defining equations make these (0, -2, 0, 0).
    """
    frame = null_frame(spec, node)
    f = spec.f.values[node]
    f_th = sphere.dtheta(spec.f).values[node]
    f_ph = sphere.dphi(spec.f).values[node]
    th, ph = frame.theta, frame.phi
    st, ct = math.sin(th), math.cos(th)
    cp, sp = math.cos(ph), math.sin(ph)
    nhat = np.array([0.0, st * cp, st * sp, ct])
    d_th = np.array([0.0, ct * cp, ct * sp, -st])
    d_ph = np.array([0.0, -st * sp, st * cp, 0.0])
    # coordinate pushforwards at a point of the cone (v = 0, r = f)
    e_u = np.array([1.0, 0, 0, 0]) - nhat
    e_v = np.array([1.0, 0, 0, 0]) + nhat
    e_theta = f * d_th
    e_phi = f * d_ph
    L = (frame.coeff_v * e_v + frame.coeff_u * e_u
         + frame.coeff_theta * e_theta + frame.coeff_phi * e_phi)
    Lbar = e_u
    tan_theta = e_theta - f_th * e_u
    tan_phi = e_phi - f_ph * e_u
    return {
        "LL": float(minkowski_dot(L, L)),
        "LLbar": float(minkowski_dot(L, Lbar)),
        "Ltheta": float(minkowski_dot(L, tan_theta)),
        "Lphi": float(minkowski_dot(L, tan_phi)),
    }


@dataclass(frozen=True)
class NullCurvature:
    """Null curvature components of a section of the Minkowski cone.

    Flat spacetime: every component vanishes, so instances can only be the
    zero value.
    """

    alpha: np.ndarray = dc_field(default_factory=lambda: np.zeros((2, 2)))
    alphabar: np.ndarray = dc_field(default_factory=lambda: np.zeros((2, 2)))
    beta: np.ndarray = dc_field(default_factory=lambda: np.zeros(2))
    betabar: np.ndarray = dc_field(default_factory=lambda: np.zeros(2))
    rho: float = 0.0
    sigma: float = 0.0

    @classmethod
    def zero(cls):
        return cls()

    def max_abs(self):
        return max(float(np.abs(self.alpha).max()),
                   float(np.abs(self.alphabar).max()),
                   float(np.abs(self.beta).max()),
                   float(np.abs(self.betabar).max()),
                   abs(self.rho), abs(self.sigma))


def curvature_components(spec):
    """Null curvature of a Minkowski-cone section: identically zero."""
    return NullCurvature.zero()


@dataclass
class SectionGeometry:
    """Computed geometry of a section plus its trapped classification."""

    spec: SectionSpec
    tr_chi: ScalarField
    tr_chibar: ScalarField
    K: ScalarField
    classification: SurfaceClass
    margins: dict
    noncompact: bool

    def report(self):
        """JSON-ready summary dict."""
        return {
            "f_min": self.spec.f.min(),
            "f_max": self.spec.f.max(),
            "tr_chi_min": self.tr_chi.min(),
            "tr_chi_max": self.tr_chi.max(),
            "tr_chibar_min": self.tr_chibar.min(),
            "tr_chibar_max": self.tr_chibar.max(),
            "K_min": self.K.min(),
            "K_max": self.K.max(),
            "classification": self.classification.value,
            "domain": self.spec.description,
            "noncompact": self.noncompact,
        }


def compute_geometry(spec, tol=1e-8, check_resolution=True):
    """Expansions, curvature and classification of a section."""
    tr_chi, tr_chibar = null_expansions(spec, check_resolution)
    K = gauss_curvature(spec, check_resolution=False)
    cls = _classify_values(tr_chi.values, tr_chibar.values, tol)
    margins = {
        "tr_chi_min": tr_chi.min(), "tr_chi_max": tr_chi.max(),
        "tr_chibar_min": tr_chibar.min(), "tr_chibar_max": tr_chibar.max(),
    }
    return SectionGeometry(spec, tr_chi, tr_chibar, K, cls, margins,
                           spec.noncompact)


def _classify_values(chi, chibar, tol):
    chi_max, chi_min = chi.max(), chi.min()
    bar_max, bar_min = chibar.max(), chibar.min()
    chi_zero = max(abs(chi_max), abs(chi_min)) <= tol
    bar_zero = max(abs(bar_max), abs(bar_min)) <= tol
    if chi_max < -tol and bar_max < -tol:
        return SurfaceClass.TRAPPED
    if chi_zero and bar_max < -tol:
        return SurfaceClass.MARGINALLY_TRAPPED_OUTGOING
    if bar_zero and chi_max < -tol:
        return SurfaceClass.MARGINALLY_TRAPPED_INGOING
    if chi_min > tol or bar_min > tol:
        # one expansion strictly positive everywhere: nowhere trapped
        return SurfaceClass.UNTRAPPED
    return SurfaceClass.MIXED


def classify(geometry, tol=1e-8):
    """Sign-based trapped classification of computed geometry.

    Trapped: both expansions below -tol everywhere. Marginally trapped
    (outgoing/ingoing): that expansion within tol of zero everywhere, the
    other below -tol. Untrapped: an expansion above +tol everywhere. Mixed
    otherwise (sign changes).
    """
    return _classify_values(geometry.tr_chi.values, geometry.tr_chibar.values,
                            tol)


class BackgroundFields:
    """User-supplied double-null background data entering the transformation
    formula: lapse Ω > 0, torsion-type 1-form η (coordinate components), the
    background expansions, the ingoing shear χ̲̂ (θθ and θφ components;
    trace-freeness fixes the φφ one) and ω̲.
    """

    def __init__(self, omega, eta_theta, eta_phi, tr_chi_bg, tr_chibar_bg,
                 chibar_hat_tt, chibar_hat_tp, omegabar):
        fields = (omega, eta_theta, eta_phi, tr_chi_bg, tr_chibar_bg,
                  chibar_hat_tt, chibar_hat_tp, omegabar)
        grid = fields[0].grid
        for f in fields[1:]:
            if f.grid is not grid:
                raise GridMismatchError("background fields on different grids")
        if omega.min() <= 0.0:
            raise DomainError(f"lapse must be positive, min={omega.min()}")
        self.grid = grid
        (self.omega, self.eta_theta, self.eta_phi, self.tr_chi_bg,
         self.tr_chibar_bg, self.chibar_hat_tt, self.chibar_hat_tp,
         self.omegabar) = fields

    @classmethod
    def minkowski(cls, f):
        """Flat-cone background for a section at radius f: Ω = 1, η = 0,
        χ̲̂ = 0, ω̲ = 0, tr χ = 2/f, tr χ̲ = -2/f."""
        g = f.grid
        zero = g.constant_field(0.0)
        return cls(g.constant_field(1.0), zero, zero,
                   g.field(2.0 / f.values), g.field(-2.0 / f.values),
                   zero, zero, zero)


@dataclass
class TransformationResult:
    """Outgoing expansion from the transformation formula, with its
    per-term breakdown (all nodal fields)."""

    tr_chi: ScalarField
    terms: dict


def transformation_general(background, f, metric_spec="conformal"):
    """General transformation formula for tr χ̃ of the graph u = -f.

    tr χ̃ = tr χ - 2ΩΔf - 4Ωη·∇f - 4Ω²χ̲̂(∇f,∇f) - Ω²tr χ̲ |∇f|² - 8Ω²ω̲|∇f|²

    ``metric_spec`` selects the 2-metric behind Δ and ∇: ``"conformal"``
    (f²γ̊, the induced section metric; default) or ``"round"`` (unit γ̊).
    With the Minkowski background and the conformal metric this reduces
    exactly to (2/f)(1 - Δ̊ log f).
    """
    if f.grid is not background.grid:
        raise GridMismatchError("graph function and background on different grids")
    if metric_spec not in ("conformal", "round"):
        raise DomainError(f"unknown metric_spec {metric_spec!r}")
    grid = f.grid
    fv = f.values
    om = background.omega.values
    lap_f = sphere.laplacian(f).values
    f_th = sphere.dtheta(f).values
    f_ph = sphere.dphi(f).values
    th, _ = grid.node_angles()
    inv_s2 = 1.0 / np.sin(th) ** 2
    if metric_spec == "conformal":
        conf = 1.0 / fv ** 2
    else:
        conf = np.ones_like(fv)
    lap_g = conf * lap_f
    grad_th = conf * f_th                 # (∇f)^θ
    grad_ph = conf * f_ph * inv_s2        # (∇f)^φ
    gsq = conf * (f_th ** 2 + f_ph ** 2 * inv_s2)
    eta_dot = (background.eta_theta.values * grad_th
               + background.eta_phi.values * grad_ph)
    hat_tt = background.chibar_hat_tt.values
    hat_tp = background.chibar_hat_tp.values
    hat_pp = -hat_tt * np.sin(th) ** 2    # tracefree w.r.t. any conformal metric
    shear_quad = (hat_tt * grad_th ** 2 + 2.0 * hat_tp * grad_th * grad_ph
                  + hat_pp * grad_ph ** 2)
    terms = {
        "tr_chi_bg": grid.field(background.tr_chi_bg.values.copy()),
        "laplacian": grid.field(-2.0 * om * lap_g),
        "eta": grid.field(-4.0 * om * eta_dot),
        "chibar_hat": grid.field(-4.0 * om ** 2 * shear_quad),
        "tr_chibar": grid.field(-om ** 2 * background.tr_chibar_bg.values * gsq),
        "omegabar": grid.field(-8.0 * om ** 2 * background.omegabar.values * gsq),
    }
    total = np.zeros_like(fv)
    for t in terms.values():
        total = total + t.values
    return TransformationResult(grid.field(total), terms)
