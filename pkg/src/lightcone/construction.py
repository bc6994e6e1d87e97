"""Localized trapped-section construction and its energy threshold.

The graph is built from the Green's function: log f_ε = -(1+ε)w outside the
cap θ < 2ε, blended inside the cap to the constant -(1+ε)w(ε) by a smooth
cutoff. Outside the cap Δ̊ log f_ε = 1+ε exactly, so tr χ̃ = -2ε/f_ε there;
inside the cap the surface is trapped only if the incoming energy per solid
angle exceeds

    k_ε = sup_{θ ≤ 2ε} f_ε (1 - Δ̊ log f_ε),

which this module evaluates on high-resolution Chebyshev patches split at
the cutoff seams θ = ε and θ = 2ε (the blend is smooth but not analytic
there, so patching beats one global expansion by orders of magnitude).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import sphere
from .errors import (ConfigurationError, DomainError, GridMismatchError,
                     ResolutionError)
from .greens import greens_w
from .sphere import ScalarField

#: strict-inequality slack: "negative" means below -(margin + STRICT_SLACK)
STRICT_SLACK = 1e-12

#: cap patch resolution used for the k_eps supremum
CAP_PATCH_N = 1024


@dataclass(frozen=True)
class CutoffFunction:
    """Smooth cutoff g: 1 on [0,1], 0 on [2,∞), strictly decreasing between."""

    name: str = "exp-blend"

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.ones_like(x)
        out[x >= 2.0] = 0.0
        mid = (x > 1.0) & (x < 2.0)
        xm = x[mid]
        p = np.exp(-1.0 / (2.0 - xm))
        q = np.exp(-1.0 / (xm - 1.0))
        out[mid] = p / (p + q)
        return float(out) if out.ndim == 0 else out


def smooth_cutoff():
    """The blend g(x) = h(2-x)/(h(2-x)+h(x-1)), h(s) = exp(-1/s) for s > 0.

    Infinitely differentiable, identically 1 below 1 and 0 above 2, with
    g(1.5) = 1/2 by symmetry of the blend.
    """
    return CutoffFunction()


@dataclass
class EnergyProfile:
    """Incoming energy per solid angle k(θ, φ) ≥ 0 as a nodal field.

    Profiles built from a closed form keep their evaluator so they can be
    resampled exactly on the verification patches; tabulated profiles fall
    back to interpolation of the nodal values (clamped at zero).
    """

    k: ScalarField
    evaluator: callable = None

    def __post_init__(self):
        if self.k.min() < 0.0:
            raise DomainError(f"energy profile must be nonnegative, min={self.k.min()}")

    @classmethod
    def constant(cls, grid, value):
        if value < 0.0:
            raise DomainError("energy must be nonnegative")
        return cls(grid.constant_field(value), evaluator=lambda th: np.full_like(th, float(value)))

    @classmethod
    def cap_indicator(cls, grid, value, cap_boundary):
        """k = value on θ <= cap_boundary, zero elsewhere."""
        th, _ = grid.node_angles()
        b = float(cap_boundary)
        v = float(value)
        return cls(grid.field(np.where(th <= b, v, 0.0)),
                   evaluator=lambda th: np.where(np.asarray(th) <= b, v, 0.0))

    def at(self, theta):
        """k resampled at arbitrary theta values."""
        theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        if self.evaluator is not None:
            return np.broadcast_to(np.asarray(self.evaluator(theta), dtype=np.float64),
                                   theta.shape)
        grid = self.k.grid
        if grid.mode == sphere.AXISYM_TRUNCATED:
            vals = grid._interp_axisym(self.k.values, theta)
            return np.maximum(vals, 0.0)
        # nearest theta row of a FullSphere grid (axisymmetric consumers only)
        rows = self.k.values.reshape(grid.n_theta, grid.n_phi).mean(axis=1)
        idx = np.searchsorted(grid.theta_nodes, theta)
        idx = np.clip(idx, 1, grid.n_theta - 1)
        left = theta - grid.theta_nodes[idx - 1] < grid.theta_nodes[idx] - theta
        return rows[np.where(left, idx - 1, idx)]

    def to_csv(self, path):
        th, _ = self.k.grid.node_angles()
        with open(path, "w") as fh:
            fh.write("theta,k\n")
            for t, v in zip(th, self.k.values):
                fh.write(f"{t:.17g},{v:.17g}\n")


@dataclass
class EpsConstruction:
    """The graph f_ε on its grid, with the threshold k_ε once computed."""

    epsilon: float
    cutoff: CutoffFunction
    log_f: ScalarField
    f: ScalarField
    k_eps: float = None
    k_eps_location: float = None
    cap_lap_sup: float = None   # sup |Δ̊ log f_ε| over [ε, 2ε], kept by compute_k_eps

    @property
    def grid(self):
        return self.f.grid

    @property
    def cap_boundary(self):
        return 2.0 * self.epsilon

    @property
    def w_eps(self):
        return 2.0 * math.log(math.sin(self.epsilon / 2.0))

    def log_f_eval(self, theta):
        """Closed-form evaluator of log f_ε (resamplable on any sub-grid)."""
        return _log_f_eps(theta, self.epsilon, self.cutoff)

    def f_limit_at_pole(self):
        """f_ε(0⁺) = (2/(1 - cos ε))^{1+ε} (log f_ε is constant on [0, ε])."""
        return math.exp(-(1.0 + self.epsilon) * self.w_eps)

    def to_section_spec(self):
        from .sections import SectionSpec
        return SectionSpec(self.f, noncompact=False,
                           description=f"f_eps construction, eps={self.epsilon}")


def _log_f_eps(theta, eps, cutoff):
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    w_eps = 2.0 * math.log(math.sin(eps / 2.0))
    out = np.empty_like(theta)
    lo = theta <= eps
    hi = theta >= 2.0 * eps
    mid = ~(lo | hi)
    out[lo] = -(1.0 + eps) * w_eps
    out[hi] = -(1.0 + eps) * greens_w(theta[hi])
    if np.any(mid):
        g = cutoff(theta[mid] / eps)
        out[mid] = -(1.0 + eps) * ((1.0 - g) * greens_w(theta[mid]) + g * w_eps)
    return out


def build_f_eps(epsilon, grid, cutoff=None):
    """Sample the f_ε construction on a grid.

    Parameters
    ----------
    epsilon : float
        Cap scale in (0, 0.3].
    grid : SphereGrid
        Axisymmetric zone grid reaching θ = π; needs at least 32 theta nodes
        below 2ε.
    cutoff : CutoffFunction, optional
        Any cutoff satisfying the type contract; defaults to the exp blend.
    """
    if not 0.0 < epsilon <= 0.3:
        raise ConfigurationError(f"epsilon={epsilon} outside (0, 0.3]")
    if grid.mode != sphere.AXISYM_TRUNCATED:
        raise ConfigurationError("f_eps construction needs an axisymmetric grid")
    if grid.theta_min >= epsilon / 2.0 or grid.theta_max < np.pi:
        raise ConfigurationError("construction grid must cover (~0, pi]")
    in_cap = int(np.count_nonzero(grid.theta_nodes <= 2.0 * epsilon))
    if in_cap < 32:
        raise ResolutionError(
            f"grid places {in_cap} nodes below 2*eps={2 * epsilon:.4g} (need >= 32)")
    cutoff = cutoff or smooth_cutoff()
    log_vals = _log_f_eps(grid.theta_nodes, epsilon, cutoff)
    log_f = grid.field(log_vals)
    return EpsConstruction(float(epsilon), cutoff, log_f,
                           grid.field(np.exp(log_vals)))


def _patch_integrand(construction, theta_lo, theta_hi, n, variable="theta"):
    """f_ε (1 - Δ̊ log f_ε) on a Chebyshev patch, plus sup |Δ̊ log f_ε|.

    Patches are split at the cutoff seams θ = ε, 2ε: the blend is smooth but
    not analytic there, and one global expansion would ring through both the
    flat zone and the outer zone. North-pole cap patches collocate in theta
    (node clustering where the construction lives), the outer zone in
    cos(theta).
    """
    patch = sphere.zone_grid(theta_lo, theta_hi, n, variable=variable)
    u = patch.field(construction.log_f_eval(patch.theta_nodes))
    lap = sphere.laplacian(u)
    integrand = patch.field(np.exp(u.values) * (1.0 - lap.values))
    return patch, integrand, lap


def compute_k_eps(construction, patch_n=CAP_PATCH_N):
    """Threshold k_ε = sup over the cap [0, 2ε] of f_ε (1 - Δ̊ log f_ε).

    Evaluated on two Chebyshev patches split at θ = ε (log f_ε is constant
    below, so the integrand is just f_ε there) with the node supremum
    refined through the collocation interpolant. Stores the value and its
    location on the construction and returns the value.
    """
    eps = construction.epsilon
    # constant zone: differentiate anyway, the Laplacian must come out ~0
    _, integrand_a, _ = _patch_integrand(construction, eps / 50.0, eps, 64)
    sup_a, loc_a = sphere.sup_on_cap(integrand_a, eps, with_location=True)
    # cutoff layer
    _, integrand_b, lap_b = _patch_integrand(construction, eps, 2.0 * eps, patch_n)
    sup_b, loc_b = sphere.sup_on_cap(integrand_b, 2.0 * eps, with_location=True)
    if sup_b >= sup_a:
        k_eps, loc = sup_b, loc_b
    else:
        k_eps, loc = sup_a, loc_a
    construction.k_eps = float(k_eps)
    construction.k_eps_location = float(loc[0])
    construction.cap_lap_sup = float(np.abs(lap_b.values).max())
    return construction.k_eps


def outer_zone_laplacian(construction, n_theta=256):
    """Δ̊ log f_ε on a fresh Chebyshev zone [2ε, π] (identically 1 + ε there)."""
    grid = sphere.zone_grid(2.0 * construction.epsilon, np.pi, n_theta,
                            variable="cos")
    u = grid.field(construction.log_f_eval(grid.theta_nodes))
    return sphere.laplacian(u)


@dataclass
class TrappedReport:
    """Outcome of the elliptic-inequality check for one (f, k) pair."""

    trapped: bool
    margin: float
    tr_chi_bound_max: float          # max over all nodes of the tr χ̃ upper bound
    tr_chi_bound_argmax: float
    tr_chibar_max: float             # max of -2/f (closest to zero)
    tr_chibar_min: float
    cap_boundary: float = None
    cap_bound_max: float = None      # max over θ <= 2ε of (2/f)(1-Δ̊logf) - 2k/f²
    cap_bound_argmax: float = None
    outer_identity_max: float = None  # max over θ >= 2ε of tr χ̃ + 2ε/f
    outer_margin: float = None        # -max over θ >= 2ε of the tr χ̃ bound

    def to_dict(self):
        return {
            "verdict": "trapped" if self.trapped else "not_trapped",
            "margin": self.margin,
            "tr_chi_bound_max": self.tr_chi_bound_max,
            "tr_chi_bound_argmax": self.tr_chi_bound_argmax,
            "tr_chibar_max": self.tr_chibar_max,
            "tr_chibar_min": self.tr_chibar_min,
            "cap_boundary": self.cap_boundary,
            "cap_bound_max": self.cap_bound_max,
            "cap_bound_argmax": self.cap_bound_argmax,
            "outer_identity_max": self.outer_identity_max,
            "outer_margin": self.outer_margin,
        }


def _construction_patches(construction, patch_n, outer_n):
    """(grid, integrand f(1-Δ̊ log f), laplacian) triples covering (0, π]."""
    eps = construction.epsilon
    return [
        _patch_integrand(construction, eps / 50.0, eps, 64),
        _patch_integrand(construction, eps, 2.0 * eps, patch_n),
        _patch_integrand(construction, 2.0 * eps, np.pi, outer_n, variable="cos"),
    ]


def verify_trapped(subject, k, margin=0.0, patch_n=CAP_PATCH_N, outer_n=256):
    """Check the elliptic inequality (2/f)(1 - Δ̊ log f) - 2k/f² < 0.

    Parameters
    ----------
    subject : EpsConstruction or SectionSpec
        The graph under test.
    k : EnergyProfile
        Energy per solid angle (consumed pointwise, never differentiated;
        it may be discontinuous).
    margin : float
        Slack demanded beyond strict negativity.

    For a construction the bound is evaluated on Chebyshev patches split at
    the cutoff seams (a single global expansion of f_ε cannot be
    differentiated reliably) and the report carries the cap/outer zone split
    of the two-region argument. For a generic section the bound is evaluated
    at the grid nodes through the grid Laplacian.

    The verdict is trapped iff the tr χ̃ upper bound is below -margin
    everywhere and tr χ̲̃ = -2/f is as well. Enlarging k pointwise can only
    improve the verdict.
    """
    threshold = -(margin + STRICT_SLACK)
    if isinstance(subject, EpsConstruction):
        if k.k.grid is not subject.grid:
            raise GridMismatchError("energy profile and construction on different grids")
        eps = subject.epsilon
        zone_max = []          # (bound_max, argmax_theta) per patch
        identity_max = None
        for patch, integrand, lap in _construction_patches(subject, patch_n, outer_n):
            th = patch.theta_nodes
            fvals = np.exp(subject.log_f_eval(th))
            bound = 2.0 * (integrand.values - k.at(th)) / fvals ** 2
            j = int(np.argmax(bound))
            zone_max.append((float(bound[j]), float(th[j])))
            if patch.theta_min >= subject.cap_boundary:
                tr_chi = (2.0 / fvals) * (1.0 - lap.values)
                identity_max = float((tr_chi + 2.0 * eps / fvals).max())
        cap_max, cap_arg = max(zone_max[:2])
        outer_max, outer_arg = zone_max[2]
        overall, overall_arg = max(zone_max)
        f_all = subject.f.values
        tr_chibar_max = -2.0 / f_all.max()
        trapped = bool(overall < threshold and tr_chibar_max < threshold)
        return TrappedReport(
            trapped=trapped, margin=margin,
            tr_chi_bound_max=overall, tr_chi_bound_argmax=overall_arg,
            tr_chibar_max=tr_chibar_max, tr_chibar_min=-2.0 / f_all.min(),
            cap_boundary=subject.cap_boundary,
            cap_bound_max=cap_max, cap_bound_argmax=cap_arg,
            outer_identity_max=identity_max,
            outer_margin=-outer_max,
        )
    f_field = subject.f
    grid = f_field.grid
    if k.k.grid is not grid:
        raise GridMismatchError("energy profile and graph on different grids")
    f = f_field.values
    lap_logf = sphere.laplacian(grid.field(np.log(f))).values
    bound = (2.0 / f) * (1.0 - lap_logf) - 2.0 * k.k.values / f ** 2
    tr_chibar = -2.0 / f
    th, _ = grid.node_angles()
    i_max = int(np.argmax(bound))
    trapped = bool(bound[i_max] < threshold and tr_chibar.max() < threshold)
    return TrappedReport(
        trapped=trapped, margin=margin,
        tr_chi_bound_max=float(bound[i_max]),
        tr_chi_bound_argmax=float(th[i_max]),
        tr_chibar_max=float(tr_chibar.max()),
        tr_chibar_min=float(tr_chibar.min()),
    )


def bound_profile(construction, k, patch_n=CAP_PATCH_N, outer_n=256):
    """The tr χ̃ upper bound resampled at the construction grid nodes.

    Stitches the patch interpolants of f(1 - Δ̊ log f); used for the CSV
    profile emitted by the CLI.
    """
    th = construction.grid.theta_nodes
    fvals = construction.f.values
    out = np.empty_like(th)
    patches = _construction_patches(construction, patch_n, outer_n)
    lo_edge = patches[0][0].theta_min
    for i, t in enumerate(th):
        if t <= lo_edge:
            integrand = fvals[i]       # log f_ε constant below the first patch
        else:
            for patch, integrand_field, _ in patches:
                if t <= patch.theta_max:
                    integrand = float(patch._interp_axisym(integrand_field.values,
                                                           np.array([t]))[0])
                    break
        out[i] = 2.0 * (integrand - float(k.at(np.array([t]))[0])) / fvals[i] ** 2
    return construction.grid.field(out)


@dataclass
class ScanRow:
    epsilon: float
    f_at_pole: float
    k_eps: float
    cap_lap_sup: float


@dataclass
class ScanResult:
    """Asymptotics of the construction over a decreasing list of ε."""

    rows: list
    slope_f: float    # least-squares d log f_ε(0) / d log ε
    slope_k: float    # least-squares d log k_ε / d log ε

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("epsilon,f_eps_at_0,k_eps,slope_f,slope_k\n")
            for r in self.rows:
                fh.write(f"{r.epsilon:.17g},{r.f_at_pole:.17g},{r.k_eps:.17g},"
                         f"{self.slope_f:.17g},{self.slope_k:.17g}\n")


def default_construction_grid(n_theta=512):
    """Axisym grid on (0, π], theta-collocated so the pole cap is dense."""
    return sphere.zone_grid(0.0, np.pi, n_theta, variable="theta")


def asymptotic_scan(eps_list, n_theta=512, patch_n=CAP_PATCH_N, threads=1):
    """Scan f_ε(0), k_ε and the cap Laplacian sup over a decreasing ε list.

    The log-log slopes are least-squares fits over the whole list. The
    asymptotic exponents are -2 for f_ε(0) and -4 (up to the logarithmic
    factor) for k_ε; at moderate ε the measured slopes sit visibly above
    those limits, so slope windows should be chosen against the ε range
    actually scanned.

    The ε values are independent; with ``threads > 1`` they are computed on
    a thread pool and the rows are merged back in list order, so the output
    does not depend on the thread count.
    """
    eps_arr = np.asarray(list(eps_list), dtype=np.float64)
    if eps_arr.size < 2:
        raise ConfigurationError("scan needs at least two epsilon values")
    if not np.all(np.diff(eps_arr) < 0.0):
        raise ConfigurationError("epsilon list must be strictly decreasing")
    grid = default_construction_grid(n_theta)

    def one(eps):
        built = build_f_eps(float(eps), grid)
        compute_k_eps(built, patch_n=patch_n)
        return ScanRow(float(eps), built.f_limit_at_pole(), built.k_eps,
                       built.cap_lap_sup)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, eps_arr))
    else:
        rows = [one(eps) for eps in eps_arr]
    log_eps = np.log(eps_arr)
    slope_f = float(np.polyfit(log_eps, np.log([r.f_at_pole for r in rows]), 1)[0])
    slope_k = float(np.polyfit(log_eps, np.log([r.k_eps for r in rows]), 1)[0])
    return ScanResult(rows, slope_f, slope_k)
