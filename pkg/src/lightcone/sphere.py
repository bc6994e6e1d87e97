"""Discretizations of the unit round sphere and the operators on it.

Two node families cover the needs of the rest of the package:

* ``FullSphere``: Gauss-Legendre nodes in cos(theta) times a uniform phi
  grid, with spherical-harmonic transforms behind the differential
  operators. Suited to fields smooth on the whole sphere.
* ``AxisymTruncated``: Chebyshev collocation on a theta zone (n_phi = 1)
  for axisymmetric fields that are singular at the north pole (the Green's
  function and everything built from it). The collocation variable is
  cos(theta) by default, which makes the south pole a regular interior
  point of the Laplacian (1 - x²)∂x² - 2x ∂x; zone grids concentrated at
  the north-pole cap use theta itself instead (``variable="theta"``).

Poles are never sampled; all nodes are interior. The operators differentiate
only, no PDE is ever solved, so no boundary conditions enter. Collocation
matrices and transform tables are built and applied in extended precision:
second-derivative roundoff in float64 alone would eat the 1e-8 error
budgets of the geometry checks downstream.
"""

import numpy as np
from scipy.special import roots_legendre

from .backend import assoc_legendre_block
from .errors import ConfigurationError, GridMismatchError, ResolutionError

FULL_SPHERE = "FullSphere"
AXISYM_TRUNCATED = "AxisymTruncated"

SPHERE_AREA = 4.0 * np.pi

_LD = np.longdouble

#: largest grid for which Gauss-Legendre nodes are Newton-refined beyond
#: float64 (pure-quadrature grids above this don't need it)
_REFINE_LIMIT = 2048


def _legendre_poly_pair(n, x):
    """(P_n(x), P_n'(x)) by recurrence, in the dtype of x."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def _refined_leggauss(n):
    """Gauss-Legendre nodes/weights in extended precision.

    scipy's float64 nodes limit quadrature exactness to ~1e-14 of the
    integrand's derivative scale, which leaks into spherical-harmonic
    coefficients as l-growing junk; three Newton sweeps push the nodes to
    the longdouble floor.
    """
    x0, w0 = roots_legendre(n)
    x = x0.astype(_LD)
    if n <= _REFINE_LIMIT:
        for _ in range(3):
            p, dp = _legendre_poly_pair(n, x)
            x = x - p / dp
        p, dp = _legendre_poly_pair(n, x)
        w = 2.0 / ((1.0 - x * x) * dp * dp)
    else:
        w = w0.astype(_LD)
    return x, w


def _fejer1_weights(n):
    """Fejer first-rule weights on the n Chebyshev-Gauss points of [-1, 1]."""
    k = np.arange(n)
    phi = (2 * k + 1) * np.pi / (2 * n)
    w = np.ones(n)
    for j in range(1, n // 2 + 1):
        w -= 2.0 * np.cos(2 * j * phi) / (4.0 * j * j - 1.0)
    return 2.0 * w / n


def _barycentric_weights(nodes_ld):
    """Exact barycentric weights for the given (float64-exact) nodes."""
    n = nodes_ld.size
    lam = np.ones(n, dtype=_LD)
    scale = 4.0 / (nodes_ld[-1] - nodes_ld[0])
    for i in range(n):
        d = (nodes_ld[i] - nodes_ld) * scale
        d[i] = 1.0
        lam[i] = 1.0 / np.prod(d)
    return lam


def _diff_pair(nodes_ld, lam):
    """First/second differentiation matrices for arbitrary nodes (Welfert)."""
    dx = np.subtract.outer(nodes_ld, nodes_ld)
    np.fill_diagonal(dx, 1.0)
    D = (lam[None, :] / lam[:, None]) / dx
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    D2 = 2.0 * D * (np.diag(D)[:, None] - 1.0 / dx)
    np.fill_diagonal(D2, 0.0)
    np.fill_diagonal(D2, -D2.sum(axis=1))
    return D, D2


class SphereGrid:
    """Immutable node set on S² (or an axisymmetric theta zone) plus operators.

    Attributes
    ----------
    mode : str
        ``FULL_SPHERE`` or ``AXISYM_TRUNCATED``.
    n_theta, n_phi : int
        Node counts; n_phi == 1 in axisymmetric mode.
    theta_min, theta_max : float
        Zone bounds; (0, pi) for the full sphere.
    theta_nodes, phi_nodes : ndarray
        Strictly increasing theta nodes in the open zone interior; uniform
        phi nodes in [0, 2*pi).
    quad_weights : ndarray
        Per-node area weights (length n_theta * n_phi).
    variable : str
        Collocation variable of an axisym grid: "cos" or "theta".

    Construct through :func:`build_grid` or :func:`zone_grid`. Instances are
    safe to share between threads once built; the lazy operator tables are
    idempotent.
    """

    def __init__(self, mode, n_theta, n_phi, theta_min, theta_max,
                 theta_nodes, phi_nodes, quad_weights, variable=None,
                 x_ld=None, wx_ld=None, coll_ld=None):
        self.mode = mode
        self.n_theta = int(n_theta)
        self.n_phi = int(n_phi)
        self.theta_min = float(theta_min)
        self.theta_max = float(theta_max)
        self.theta_nodes = theta_nodes
        self.phi_nodes = phi_nodes
        self.quad_weights = quad_weights
        self.variable = variable
        self._x_ld = x_ld        # FullSphere: cos(theta) nodes, extended precision
        self._wx_ld = wx_ld      # FullSphere: Gauss-Legendre weights
        self._coll_ld = coll_ld  # axisym: collocation nodes in the native variable
        self._diff = None        # axisym (D, D2) pair
        self._lam = None         # axisym barycentric weights
        self._cheb_cos = None    # axisym DCT matrix for resolution checks
        self._tables = {}        # FullSphere m -> P̄ block
        self._dtables = {}       # FullSphere m -> dP̄/dtheta block
        for arr in (self.theta_nodes, self.phi_nodes, self.quad_weights):
            arr.setflags(write=False)

    # -- basic queries ----------------------------------------------------

    @property
    def n_nodes(self):
        return self.n_theta * self.n_phi

    @property
    def lmax(self):
        return self.n_theta - 1

    @property
    def m_max(self):
        if self.n_phi == 1:
            return 0
        return min(self.lmax, (self.n_phi - 1) // 2)

    def node_angles(self):
        """(theta, phi) arrays for all nodes in storage order (theta-major)."""
        th = np.repeat(self.theta_nodes, self.n_phi)
        ph = np.tile(self.phi_nodes, self.n_theta)
        return th, ph

    def field(self, values):
        return ScalarField(self, np.asarray(values, dtype=np.float64))

    def field_from_function(self, fn):
        """Sample ``fn(theta, phi)`` (vectorized) at the nodes."""
        th, ph = self.node_angles()
        vals = np.broadcast_to(np.asarray(fn(th, ph), dtype=np.float64),
                               th.shape)
        return self.field(vals)

    def constant_field(self, value):
        return self.field(np.full(self.n_nodes, float(value)))

    # -- axisym collocation operators --------------------------------------

    def _diff_matrices(self):
        if self._diff is None:
            lam = _barycentric_weights(self._coll_ld)
            self._lam = lam
            self._diff = _diff_pair(self._coll_ld, lam)
        return self._diff

    def _deriv_theta(self, values):
        """d(values)/d(theta) at the nodes."""
        D, _ = self._diff_matrices()
        u = values.astype(_LD)
        du = D @ (u - u.mean())
        if self.variable == "cos":
            du = -np.sin(self.theta_nodes.astype(_LD)) * du
        return np.asarray(du, dtype=np.float64)

    def _laplacian_axisym(self, values):
        D, D2 = self._diff_matrices()
        u = values.astype(_LD)
        u = u - u.mean()
        if self.variable == "cos":
            xi = self._coll_ld
            lap = (1.0 - xi * xi) * (D2 @ u) - 2.0 * xi * (D @ u)
        else:
            th = self._coll_ld
            lap = D2 @ u + np.cos(th) / np.sin(th) * (D @ u)
        return np.asarray(lap, dtype=np.float64)

    def _gradient_sq_axisym(self, values):
        D, _ = self._diff_matrices()
        u = values.astype(_LD)
        du = D @ (u - u.mean())
        if self.variable == "cos":
            xi = self._coll_ld
            g2 = (1.0 - xi * xi) * du * du
        else:
            g2 = du * du
        return np.asarray(g2, dtype=np.float64)

    def _to_native(self, theta):
        """Map theta values into the grid's collocation variable."""
        if self.variable == "cos":
            return np.cos(theta)
        return theta

    def _interp_axisym(self, values, theta_out):
        """Barycentric evaluation of the collocation interpolant at theta."""
        self._diff_matrices()
        lam = np.asarray(self._lam, dtype=np.float64)
        nodes = np.asarray(self._coll_ld, dtype=np.float64)
        pts = self._to_native(np.atleast_1d(np.asarray(theta_out, dtype=np.float64)))
        out = np.empty(pts.shape)
        for lo in range(0, pts.size, 2048):
            t = pts[lo:lo + 2048, None]
            d = t - nodes[None, :]
            exact = d == 0.0
            d = np.where(exact, 1.0, d)
            wgt = lam[None, :] / d
            vals = (wgt * values).sum(axis=1) / wgt.sum(axis=1)
            hit_row, hit_col = np.nonzero(exact)
            vals[hit_row] = values[hit_col]
            out[lo:lo + 2048] = vals
        return out

    def chebyshev_coefficients(self, values):
        """Chebyshev coefficients of the axisym interpolant (resolution checks)."""
        if self._cheb_cos is None:
            n = self.n_theta
            phi = (2 * np.arange(n) + 1) * np.pi / (2 * n)
            self._cheb_cos = np.cos(np.outer(np.arange(n), phi))
        # storage order (theta ascending) matches the Chebyshev angle order
        # in both collocation variables
        c = (2.0 / self.n_theta) * (self._cheb_cos @ values)
        c[0] *= 0.5
        return c

    # -- spherical-harmonic machinery (FullSphere) -------------------------

    def _legendre(self, m):
        tab = self._tables.get(m)
        if tab is None:
            tab = assoc_legendre_block(m, self.lmax, self._x_ld)
            self._tables[m] = tab
        return tab

    def _legendre_dtheta(self, m):
        tab = self._dtables.get(m)
        if tab is None:
            P = self._legendre(m)
            ls = np.arange(m, self.lmax + 1).astype(_LD)
            e = np.zeros_like(ls)
            if len(ls) > 1:
                e[1:] = np.sqrt((ls[1:] ** 2 - m * m) * (2 * ls[1:] + 1) / (2 * ls[1:] - 1))
            inv_sin = 1.0 / np.sqrt((1.0 - self._x_ld) * (1.0 + self._x_ld))
            tab = (ls[:, None] * self._x_ld[None, :] * P) * inv_sin[None, :]
            tab[1:] -= e[1:, None] * P[:-1] * inv_sin[None, :]
            self._dtables[m] = tab
        return tab

    def analysis(self, values):
        """Spherical-harmonic coefficients a[m, l] of a nodal field.

        Returns a complex (clongdouble) array of shape (m_max + 1, lmax + 1);
        entries with l < m are zero. Exact to roundoff for fields bandlimited
        to l <= lmax, |m| <= m_max.
        """
        v = values.reshape(self.n_theta, self.n_phi)
        R = np.fft.rfft(v, axis=1)[:, : self.m_max + 1] * (2.0 * np.pi / self.n_phi)
        coeffs = np.zeros((self.m_max + 1, self.lmax + 1), dtype=np.clongdouble)
        for m in range(self.m_max + 1):
            P = self._legendre(m)
            wre = self._wx_ld * R[:, m].real
            wim = self._wx_ld * R[:, m].imag
            coeffs[m, m:] = P @ wre + 1j * (P @ wim)
        return coeffs

    def synthesis(self, coeffs):
        """Nodal field from coefficients; inverse of :meth:`analysis`."""
        return self._synthesis_with(coeffs, self._legendre)

    def _synthesis_with(self, coeffs, table_getter):
        G = np.zeros((self.n_theta, self.n_phi // 2 + 1), dtype=np.complex128)
        for m in range(self.m_max + 1):
            P = table_getter(m)
            row = coeffs[m, m:]
            G[:, m] = np.asarray(row.real @ P, dtype=np.float64) \
                + 1j * np.asarray(row.imag @ P, dtype=np.float64)
        return np.fft.irfft(G, n=self.n_phi, axis=1).ravel() * self.n_phi

    def evaluate_harmonics(self, coeffs, theta, phi):
        """Evaluate a coefficient set at arbitrary points (theta, phi)."""
        theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
        x = np.cos(theta)
        out = np.zeros(theta.shape)
        for m in range(self.m_max + 1):
            P = assoc_legendre_block(m, self.lmax, x)
            gm = np.asarray(coeffs[m, m:].real @ P, dtype=np.float64) \
                + 1j * np.asarray(coeffs[m, m:].imag @ P, dtype=np.float64)
            if m == 0:
                out += gm.real
            else:
                out += 2.0 * (gm * np.exp(1j * m * phi)).real
        return out

    def harmonic_field(self, l, m, kind="cos"):
        """Real spherical harmonic sampled at the nodes.

        m = 0: P̄_l(cos θ); m > 0: √2 P̄_l^m(cos θ) cos(mφ) (or sin with
        ``kind="sin"``). Values come from the grid's own extended-precision
        tables, so they are the harmonic's exact samples at the quadrature
        nodes.
        """
        if not 0 <= m <= l <= self.lmax:
            raise ConfigurationError(f"harmonic (l={l}, m={m}) outside grid range")
        if m > self.m_max:
            raise ConfigurationError(f"m={m} exceeds the phi resolution {self.m_max}")
        leg = np.asarray(self._legendre(m)[l - m], dtype=np.float64)
        if m == 0:
            vals = np.repeat(leg, self.n_phi)
        else:
            az = np.cos(m * self.phi_nodes) if kind == "cos" else np.sin(m * self.phi_nodes)
            vals = np.sqrt(2.0) * (leg[:, None] * az[None, :]).ravel()
        return self.field(vals)

    def spectral_trailing_ratio(self, values):
        """Max trailing-coefficient magnitude over max magnitude.

        Trailing means the last four degree bins (FullSphere) or the last
        four Chebyshev modes (axisym); used to decide whether a sampled
        function is resolved on this grid.
        """
        if self.mode == FULL_SPHERE:
            a = np.abs(np.asarray(self.analysis(values), dtype=np.complex128))
            lead = a.max()
            trail = a[:, self.lmax - 3:].max()
        else:
            c = np.abs(self.chebyshev_coefficients(values))
            lead = c.max()
            trail = c[-4:].max()
        if lead == 0.0:
            return 0.0
        return float(trail / lead)


def build_grid(mode, n_theta, n_phi=1, theta_min=0.0):
    """Construct a sphere grid.

    Parameters
    ----------
    mode : str
        ``FULL_SPHERE`` (Gauss-Legendre x uniform phi) or
        ``AXISYM_TRUNCATED`` (Chebyshev zone [theta_min, pi], n_phi must be 1).
    n_theta : int
        Theta node count, at least 4.
    n_phi : int
        Phi node count (1 for axisymmetric field sets).
    theta_min : float
        Zone start in [0, pi/2); must be 0 in FullSphere mode.

    Raises
    ------
    ConfigurationError
        On degenerate sizes or out-of-range theta_min.
    """
    if n_theta < 4:
        raise ConfigurationError(f"n_theta={n_theta} too small (need >= 4)")
    if n_phi < 1:
        raise ConfigurationError(f"n_phi={n_phi} must be >= 1")
    if not 0.0 <= theta_min < np.pi / 2:
        raise ConfigurationError(f"theta_min={theta_min} outside [0, pi/2)")
    if mode == FULL_SPHERE:
        if theta_min != 0.0:
            raise ConfigurationError("FullSphere grid requires theta_min = 0")
        x_ld, wx_ld = _refined_leggauss(n_theta)
        x_ld = x_ld[::-1].copy()      # theta ascending
        wx_ld = wx_ld[::-1].copy()
        theta = np.arccos(np.asarray(x_ld, dtype=np.float64))
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        w_node = np.repeat(np.asarray(wx_ld, dtype=np.float64) * (2.0 * np.pi / n_phi),
                           n_phi)
        return SphereGrid(mode, n_theta, n_phi, 0.0, np.pi, theta, phi,
                          w_node, x_ld=x_ld, wx_ld=wx_ld)
    if mode == AXISYM_TRUNCATED:
        if n_phi != 1:
            raise ConfigurationError("AxisymTruncated grid requires n_phi = 1")
        return zone_grid(theta_min, np.pi, n_theta)
    raise ConfigurationError(f"unknown grid mode {mode!r}")


def zone_grid(theta_lo, theta_hi, n_theta, variable="cos"):
    """Chebyshev collocation grid on an axisymmetric zone [theta_lo, theta_hi].

    ``build_grid`` delegates here for AxisymTruncated grids (theta_hi = pi).
    ``variable`` picks the collocation variable: ``"cos"`` (default; the
    south pole is then a regular point of the Laplacian) or ``"theta"``
    (clusters nodes at the north-pole cap; used for the patches around the
    cutoff layer of the trapped-surface construction).
    """
    if n_theta < 4:
        raise ConfigurationError(f"n_theta={n_theta} too small (need >= 4)")
    if not 0.0 <= theta_lo < theta_hi <= np.pi:
        raise ConfigurationError(f"invalid zone [{theta_lo}, {theta_hi}]")
    if variable not in ("cos", "theta"):
        raise ConfigurationError(f"unknown collocation variable {variable!r}")
    k = np.arange(n_theta)
    cheb = np.cos((2 * k + 1) * np.pi / (2 * n_theta))   # descending in (-1, 1)
    w1 = _fejer1_weights(n_theta)
    if variable == "cos":
        xi_lo, xi_hi = np.cos(theta_hi), np.cos(theta_lo)
        xi = xi_lo + (xi_hi - xi_lo) * (1.0 + cheb) / 2.0   # descending
        theta = np.arccos(np.clip(xi, -1.0, 1.0))           # ascending
        w_node = w1 * (xi_hi - xi_lo) / 2.0 * 2.0 * np.pi
        coll = xi.astype(_LD)
    else:
        theta = theta_lo + (theta_hi - theta_lo) * (1.0 - cheb) / 2.0  # ascending
        w_node = w1 * (theta_hi - theta_lo) / 2.0 * 2.0 * np.pi * np.sin(theta)
        coll = theta.astype(_LD)
    phi = np.zeros(1)
    return SphereGrid(AXISYM_TRUNCATED, n_theta, 1, theta_lo, theta_hi,
                      theta, phi, w_node, variable=variable, coll_ld=coll)


class ScalarField:
    """Real samples of a function at the nodes of a :class:`SphereGrid`."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.n_nodes,):
            raise ConfigurationError(
                f"field has {values.size} values for {grid.n_nodes} nodes")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("field values must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("ScalarField is immutable")

    def as_matrix(self):
        return self.values.reshape(self.grid.n_theta, self.grid.n_phi)

    def min(self):
        return float(self.values.min())

    def max(self):
        return float(self.values.max())


def _same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid is not g:
            raise GridMismatchError("fields live on different grids")
    return g


def _fluctuation(values):
    """Field minus its mean: derivative operators kill constants exactly,
    and the transform roundoff then scales with the varying part only."""
    return values - values.mean()


def laplacian(field):
    """Round-sphere Laplacian of a nodal field (pure differentiation).

    FullSphere grids go through the spherical-harmonic transform (the field
    must be bandlimited to be meaningful); axisymmetric zones use the
    Chebyshev collocation derivative, (1 - x²)u'' - 2x u' in the cos-theta
    variable or u'' + cot(theta) u' in theta.
    """
    g = field.grid
    if g.mode == FULL_SPHERE:
        coeffs = g.analysis(_fluctuation(field.values))
        ls = np.arange(g.lmax + 1, dtype=np.float64)
        return g.field(g.synthesis(coeffs * (-(ls * (ls + 1)))[None, :]))
    return g.field(g._laplacian_axisym(field.values))


def gradient_sq(field):
    """|d field|² in the unit round metric: (∂θ f)² + (∂φ f)²/sin²θ."""
    g = field.grid
    if g.mode == FULL_SPHERE:
        coeffs = g.analysis(_fluctuation(field.values))
        dth = g._synthesis_with(coeffs, g._legendre_dtheta)
        ms = np.arange(g.m_max + 1, dtype=np.float64)
        dph = g._synthesis_with(coeffs * (1j * ms)[:, None], g._legendre)
        sin_t = np.repeat(np.sin(g.theta_nodes), g.n_phi)
        return g.field(dth ** 2 + (dph / sin_t) ** 2)
    return g.field(g._gradient_sq_axisym(field.values))


def dtheta(field):
    """∂θ of a nodal field (same machinery as :func:`gradient_sq`)."""
    g = field.grid
    if g.mode == FULL_SPHERE:
        coeffs = g.analysis(_fluctuation(field.values))
        return g.field(g._synthesis_with(coeffs, g._legendre_dtheta))
    return g.field(g._deriv_theta(field.values))


def dphi(field):
    """∂φ of a nodal field (zero on axisymmetric grids)."""
    g = field.grid
    if g.mode == FULL_SPHERE:
        coeffs = g.analysis(_fluctuation(field.values))
        ms = np.arange(g.m_max + 1, dtype=np.float64)
        return g.field(g._synthesis_with(coeffs * (1j * ms)[:, None], g._legendre))
    return g.constant_field(0.0)


def integrate(field):
    """Quadrature of ∫ field dA over the sphere (or the axisym zone)."""
    return float(np.dot(field.grid.quad_weights, field.values))


def sup_on_cap(field, theta_max, with_location=False):
    """Maximum of a field over the polar cap theta <= theta_max.

    The node maximum is refined by evaluating the collocation/spectral
    interpolant on a fine local patch around the best node (clamped to the
    cap). Requires at least 16 theta nodes inside the cap.

    Returns the value, or ``(value, (theta, phi))`` with ``with_location``.
    """
    g = field.grid
    if not g.theta_min < theta_max <= g.theta_max:
        raise ResolutionError(
            f"cap boundary {theta_max} outside grid range "
            f"({g.theta_min}, {g.theta_max}]")
    rows = np.nonzero(g.theta_nodes <= theta_max)[0]
    if rows.size < 16:
        raise ResolutionError(
            f"cap theta <= {theta_max} holds only {rows.size} theta nodes (need >= 16)")
    vals = field.values.reshape(g.n_theta, g.n_phi)[rows]
    flat = int(np.argmax(vals))
    i_loc, j = divmod(flat, g.n_phi)
    i = rows[i_loc]
    theta_star = g.theta_nodes[i]
    # local window: two node spacings either side, clamped to the cap
    i_lo, i_hi = max(i - 2, 0), min(i + 2, g.n_theta - 1)
    lo = g.theta_nodes[i_lo]
    hi = min(g.theta_nodes[i_hi], theta_max)
    th_fine = np.linspace(lo, hi, 257)
    if g.mode == AXISYM_TRUNCATED:
        fine = g._interp_axisym(field.values, th_fine)
        k = int(np.argmax(fine))
        best = (float(fine[k]), (float(th_fine[k]), 0.0))
    else:
        coeffs = g.analysis(field.values)
        dphi_loc = 2.0 * np.pi / g.n_phi
        ph_fine = (g.phi_nodes[j] + np.linspace(-dphi_loc, dphi_loc, 33)) % (2 * np.pi)
        TH, PH = np.meshgrid(th_fine, ph_fine, indexing="ij")
        fine = g.evaluate_harmonics(coeffs, TH.ravel(), PH.ravel())
        k = int(np.argmax(fine))
        best = (float(fine[k]), (float(TH.ravel()[k]), float(PH.ravel()[k])))
    node_val = float(vals[i_loc, j])
    if node_val > best[0]:
        best = (node_val, (float(theta_star), float(g.phi_nodes[j])))
    return best if with_location else best[0]


def field_to_csv(field, path):
    """Write a field as CSV with columns theta, phi, value (17 sig. digits)."""
    th, ph = field.grid.node_angles()
    with open(path, "w") as fh:
        fh.write("theta,phi,value\n")
        for t, p, v in zip(th, ph, field.values):
            fh.write(f"{t:.17g},{p:.17g},{v:.17g}\n")


def field_from_csv(path, grid):
    """Read a field written by :func:`field_to_csv` onto a matching grid."""
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    if data.ndim == 1:
        data = data[None, :]
    if data.shape[0] != grid.n_nodes:
        raise GridMismatchError(
            f"CSV has {data.shape[0]} rows for {grid.n_nodes} grid nodes")
    th, ph = grid.node_angles()
    if not (np.allclose(data[:, 0], th, atol=1e-12)
            and np.allclose(data[:, 1], ph, atol=1e-12)):
        raise GridMismatchError("CSV node angles do not match the grid")
    return grid.field(data[:, 2])
