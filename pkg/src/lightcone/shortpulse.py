"""Short-pulse characteristic data and the focusing pipeline, at leading
order in the pulse amplitude.

The seed ψ₀(s, θ, φ) is a symmetric tracefree 2x2 matrix function on
s ∈ [0, 1], extended by zero to s ≤ 0. The data on the initial cone is
m = exp ψ with ψ(u̲) = (δ^{1/2}/r0) ψ₀(u̲/δ); the incoming energy density is
e = |∂_u̲ m|²_m / 8 and the energy per solid angle its u̲ integral times
r0²/8π. The second-variation (focusing) equation D tr χ = -(tr χ)²/2 - |χ̂|²
is integrated with classical RK4. All O(δ^{1/2}) corrections from the
existence theory are dropped; every quantity here is the leading-order
model.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .backend import rk4_riccati
from .construction import EnergyProfile
from .errors import ConfigurationError, DomainError, FocusingError

#: input must be tracefree to this tolerance (absolute, on unit-scale input)
TRACE_TOL = 1e-14


def _exp_components(a, b):
    """exp of [[a, b], [b, -a]] via cosh/sinhc of λ = sqrt(a² + b²)."""
    q = a * a + b * b
    lam = np.sqrt(q)
    c = np.cosh(lam)
    s = np.where(q > 1e-16, np.divide(np.sinh(lam), np.where(lam == 0, 1.0, lam)),
                 1.0 + q / 6.0 + q * q / 120.0)
    return c + s * a, s * b, c - s * a


def exp_tracefree(psi):
    """Closed-form exponential of a symmetric tracefree 2x2 matrix.

    exp ψ = cosh(λ) I + (sinh(λ)/λ) ψ with λ = |ψ| the eigenvalue magnitude;
    the result has determinant 1 exactly (up to roundoff).
    """
    psi = np.asarray(psi, dtype=np.float64)
    if psi.shape != (2, 2):
        raise DomainError("expected a 2x2 matrix")
    scale = max(1.0, float(np.abs(psi).max()))
    if abs(psi[0, 1] - psi[1, 0]) > TRACE_TOL * scale:
        raise DomainError("matrix must be symmetric")
    if abs(psi[0, 0] + psi[1, 1]) > TRACE_TOL * scale:
        raise DomainError(f"matrix must be tracefree, trace={psi[0, 0] + psi[1, 1]}")
    m11, m12, m22 = _exp_components(psi[0, 0], psi[0, 1])
    return np.array([[m11, m12], [m12, m22]])


class PulseProfile:
    """Short-pulse seed: two component functions of (s, θ, φ) plus scales.

    ``psi11``/``psi12`` must vanish for s ≤ 0 and accept array θ. Optional
    analytic s-derivatives enable the closed-form energy path; without them
    only the finite-difference path is available.
    """

    def __init__(self, psi11, psi12, delta, r0,
                 dpsi11_ds=None, dpsi12_ds=None, name="custom", smooth=True):
        if r0 <= 1.0:
            raise DomainError(f"r0 must exceed 1, got {r0}")
        if delta <= 0.0:
            raise DomainError(f"delta must be positive, got {delta}")
        self.psi11 = psi11
        self.psi12 = psi12
        self.dpsi11_ds = dpsi11_ds
        self.dpsi12_ds = dpsi12_ds
        self.delta = float(delta)
        self.r0 = float(r0)
        self.name = name
        #: declares that the seed extends smoothly by zero to s <= 0
        #: (metadata; tabulated profiles are only as smooth as their table)
        self.smooth = bool(smooth)

    @classmethod
    def separable(cls, a_of_s, A11, A12, delta, r0, da_ds=None, name="separable"):
        """ψ₀ij(s, θ, φ) = a(s) · Aij(θ, φ), a extended by zero to s <= 0."""
        def wrap(comp):
            def fn(s, theta, phi=0.0):
                s = np.asarray(s, dtype=np.float64)
                amp = np.where(s > 0.0, a_of_s(np.maximum(s, 0.0)), 0.0)
                return amp * comp(theta, phi)
            return fn

        def wrap_ds(comp):
            if da_ds is None:
                return None
            def fn(s, theta, phi=0.0):
                s = np.asarray(s, dtype=np.float64)
                amp = np.where(s > 0.0, da_ds(np.maximum(s, 0.0)), 0.0)
                return amp * comp(theta, phi)
            return fn

        return cls(wrap(A11), wrap(A12), delta, r0,
                   dpsi11_ds=wrap_ds(A11), dpsi12_ds=wrap_ds(A12), name=name)

    @classmethod
    def polynomial_bump(cls, A11, A12, delta, r0, name="poly-bump"):
        """Separable profile with the bump a(s) = 16 s²(1-s)² on [0, 1]."""
        return cls.separable(lambda s: 16.0 * s ** 2 * (1.0 - s) ** 2,
                             A11, A12, delta, r0,
                             da_ds=lambda s: 32.0 * s * (1.0 - s) * (1.0 - 2.0 * s),
                             name=name)

    @classmethod
    def from_csv(cls, path, delta, r0):
        """Tabulated axisymmetric profile: columns s,theta,psi11,psi12,
        rectangular grid row-major in s. Spline interpolation supplies the
        values and s-derivatives."""
        from scipy.interpolate import RectBivariateSpline
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        s_vals = np.unique(data[:, 0])
        th_vals = np.unique(data[:, 1])
        if s_vals.size * th_vals.size != data.shape[0]:
            raise ConfigurationError("pulse CSV is not a rectangular s x theta grid")
        shape = (s_vals.size, th_vals.size)
        t11 = data[:, 2].reshape(shape)
        t12 = data[:, 3].reshape(shape)
        ks = min(3, s_vals.size - 1)
        kt = min(3, th_vals.size - 1)
        sp11 = RectBivariateSpline(s_vals, th_vals, t11, kx=ks, ky=kt)
        sp12 = RectBivariateSpline(s_vals, th_vals, t12, kx=ks, ky=kt)

        def make(spline, ds):
            def fn(s, theta, phi=0.0):
                s = np.asarray(s, dtype=np.float64)
                theta = np.asarray(theta, dtype=np.float64)
                out = spline(np.atleast_1d(s), np.atleast_1d(theta),
                             dx=ds, grid=False)
                return np.where(s > 0.0, out, 0.0)
            return fn

        return cls(make(sp11, 0), make(sp12, 0), delta, r0,
                   dpsi11_ds=make(sp11, 1), dpsi12_ds=make(sp12, 1),
                   name=f"csv:{path}")

    # -- scaled quantities -------------------------------------------------

    def psi_scaled(self, ubar, theta, phi=0.0):
        """(a, b) components of ψ(u̲) = (δ^{1/2}/r0) ψ₀(u̲/δ)."""
        amp = math.sqrt(self.delta) / self.r0
        s = ubar / self.delta
        return (amp * self.psi11(s, theta, phi), amp * self.psi12(s, theta, phi))

    def dpsi_dubar(self, ubar, theta, phi=0.0):
        if self.dpsi11_ds is None or self.dpsi12_ds is None:
            raise ConfigurationError(
                "profile has no analytic s-derivative; use the fd energy path")
        amp = math.sqrt(self.delta) / (self.r0 * self.delta)
        s = ubar / self.delta
        return (amp * self.dpsi11_ds(s, theta, phi),
                amp * self.dpsi12_ds(s, theta, phi))

    def metric_density(self, ubar, theta, phi=0.0):
        """(m11, m12, m22) of m = exp ψ at (u̲, θ, φ)."""
        a, b = self.psi_scaled(ubar, theta, phi)
        return _exp_components(a, b)


def _norm_sq_in_m(m11, m12, m22, A11, A12, A22):
    """|A|²_m = m^{ac} m^{bd} A_ab A_cd for symmetric A, det m = 1."""
    # inverse of m is its adjugate since det m = 1
    i11, i12, i22 = m22, -m12, m11
    # B = m⁻¹ A, |A|²_m = tr(B B)
    b11 = i11 * A11 + i12 * A12
    b12 = i11 * A12 + i12 * A22
    b21 = i12 * A11 + i22 * A12
    b22 = i12 * A12 + i22 * A22
    return b11 * b11 + 2.0 * b12 * b21 + b22 * b22


def energy_density(profile, method="analytic"):
    """Evaluator e(u̲, θ, φ) = |∂_u̲ m|²_m / 8 for a pulse profile.

    ``method="analytic"`` differentiates the closed-form exponential
    (needs the profile's s-derivatives); ``method="fd"`` uses 4th-order
    central differences of m in u̲. Both are exposed so they can be
    cross-checked.
    """
    if method not in ("analytic", "fd"):
        raise ConfigurationError(f"unknown energy method {method!r}")

    def ev(ubar, theta, phi=0.0):
        if not 0.0 <= ubar <= profile.delta:
            raise DomainError(
                f"ubar={ubar} outside the pulse interval [0, {profile.delta}]")
        theta = np.asarray(theta, dtype=np.float64)
        m11, m12, m22 = profile.metric_density(ubar, theta, phi)
        if method == "analytic":
            a, b = profile.psi_scaled(ubar, theta, phi)
            da, db = profile.dpsi_dubar(ubar, theta, phi)
            q = a * a + b * b
            dq = 2.0 * (a * da + b * db)
            lam = np.sqrt(q)
            C = np.cosh(lam)
            S = np.where(q > 1e-16,
                         np.divide(np.sinh(lam), np.where(lam == 0, 1.0, lam)),
                         1.0 + q / 6.0 + q * q / 120.0)
            dC = 0.5 * S * dq
            Sp = np.where(q > 1e-16, (C - S) / np.where(q == 0, 1.0, 2.0 * q),
                          1.0 / 6.0 + q / 60.0 + q * q / 1680.0)
            dS = Sp * dq
            dm11 = dC + dS * a + S * da
            dm12 = dS * b + S * db
            dm22 = dC - dS * a - S * da
        else:
            h = profile.delta * 1e-4
            vals = [profile.metric_density(ubar + k * h, theta, phi)
                    for k in (-2, -1, 1, 2)]
            dm11, dm12, dm22 = [
                (vals[0][i] - 8.0 * vals[1][i] + 8.0 * vals[2][i] - vals[3][i])
                / (12.0 * h) for i in range(3)]
        return _norm_sq_in_m(m11, m12, m22, dm11, dm12, dm22) / 8.0

    return ev


def energy_per_solid_angle(profile, grid, n_quad=64, method="analytic"):
    """k(θ, φ) = (r0²/8π) ∫₀^δ e du̲ as an EnergyProfile on the grid.

    Gauss-Legendre in u̲ with at least 64 nodes (the integrand is smooth
    on the pulse interval).
    """
    if n_quad < 64:
        raise ConfigurationError("use at least 64 quadrature nodes in ubar")
    x, wq = roots_legendre(n_quad)
    ubars = 0.5 * profile.delta * (x + 1.0)
    weights = 0.5 * profile.delta * wq
    ev = energy_density(profile, method)
    th, ph = grid.node_angles()
    total = np.zeros(grid.n_nodes)
    for ub, wgt in zip(ubars, weights):
        total += wgt * ev(ub, th, ph)
    return EnergyProfile(grid.field(total * profile.r0 ** 2 / (8.0 * np.pi)))


@dataclass
class RaychaudhuriResult:
    """Focusing integration output plus the analytic comparison bound."""

    tr_chi_final: float
    trajectory: np.ndarray
    steps: int
    delta: float
    bound: float          # tr χ(0) - ∫₀^δ |χ̂|² du̲ (quadrature, independent)

    @property
    def satisfies_bound(self):
        return self.tr_chi_final <= self.bound + 1e-12


def integrate_raychaudhuri(trchi0, shear_sq, delta, steps=1000):
    """Integrate D tr χ = -(tr χ)²/2 - |χ̂|² over u̲ ∈ [0, δ] with RK4.

    ``shear_sq`` is a callable of u̲ (vectorized), nonnegative. Returns the
    trajectory and the integral bound tr χ(0) - ∫|χ̂|²; focusing (blow-up to
    -∞ inside the interval) raises :class:`FocusingError` with the location.
    """
    if delta <= 0.0:
        raise DomainError("delta must be positive")
    if steps < 1:
        raise ConfigurationError("steps must be >= 1")
    h = delta / steps
    xs = 0.5 * h * np.arange(2 * steps + 1)
    svals = np.asarray(shear_sq(xs), dtype=np.float64)
    if svals.shape != xs.shape:
        svals = np.broadcast_to(svals, xs.shape).astype(np.float64)
    if np.any(svals < -1e-12):
        raise DomainError("shear_sq must be nonnegative")
    traj, blow = rk4_riccati(float(trchi0), svals, h, steps)
    x, wq = roots_legendre(128)
    sq = np.asarray(shear_sq(0.5 * delta * (x + 1.0)), dtype=np.float64)
    bound = float(trchi0) - 0.5 * delta * float(np.dot(wq, np.broadcast_to(sq, x.shape)))
    if blow >= 0:
        raise FocusingError(
            f"tr chi blew up near ubar={blow * h:.6g} (focusing)",
            location=blow * h)
    return RaychaudhuriResult(float(traj[-1]), traj, steps, delta, bound)


def trapped_bound(u, k_value, delta=0.0):
    """Leading-order estimate tr χ ≤ 2/|u| - 2k/|u|² on the far cone."""
    if u >= 0.0:
        raise DomainError("u must be negative (past cone)")
    if k_value < 0.0:
        raise DomainError("k must be nonnegative")
    if delta < 0.0:
        raise DomainError("delta must be nonnegative")
    au = abs(u)
    return 2.0 / au - 2.0 * k_value / au ** 2


def final_check(delta, k_value):
    """The threshold combination (2 + 2δ - 2k)/(1 + δ)²: the trapped-bound
    value at u = -(1 + δ); negative exactly when k > 1 + δ."""
    return (2.0 + 2.0 * delta - 2.0 * k_value) / (1.0 + delta) ** 2


def shear_model_from_energy(energy_of_ubar, u, u0):
    """Leading-order transported shear |χ̂|²(u̲) = 2 u0² e(u̲)/u²."""
    factor = 2.0 * u0 ** 2 / u ** 2
    return lambda ubar: factor * np.asarray(energy_of_ubar(ubar))
