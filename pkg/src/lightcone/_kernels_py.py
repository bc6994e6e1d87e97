"""Pure NumPy/Python fallback for the compiled kernels.

Mirrors the API of the Cython module ``lightcone._kernels`` exactly; the
active implementation is chosen in :mod:`lightcone.backend`. Keep the two in
sync: the test suite runs both and compares results.
"""

import numpy as np

BACKEND_NAME = "python"

_PI = np.longdouble("3.14159265358979323846264338327950288420")


def assoc_legendre_block(m, lmax, x):
    """Normalized associated Legendre values P̄_l^m(x) for l = m .. lmax.

    Normalization is the spherical-harmonic one (Condon-Shortley phase
    included): ∫ |P̄_l^m(cos θ) e^{imφ}|² dA = 1 over the unit sphere.
    Computed and returned in extended precision: the downstream transforms
    multiply coefficients by l(l+1), which amplifies any recurrence noise
    past the 1e-10 eigenvalue budget if done in float64.

    Parameters
    ----------
    m : int
        Order, 0 <= m <= lmax.
    lmax : int
        Largest degree.
    x : ndarray
        Evaluation points in [-1, 1].

    Returns
    -------
    ndarray (longdouble) of shape (lmax - m + 1, len(x))
    """
    x = np.asarray(x, dtype=np.longdouble)
    out = np.zeros((lmax - m + 1, x.size), dtype=np.longdouble)
    # seed P̄_m^m, accumulating the normalization product to avoid overflow
    c = np.sqrt(np.longdouble(1.0) / (4.0 * _PI))
    for k in range(1, m + 1):
        c = c * np.sqrt((2.0 * np.longdouble(k) + 1.0) / (2.0 * np.longdouble(k)))
    pmm = c * ((1.0 - x) * (1.0 + x)) ** (np.longdouble(m) / 2.0)
    if m % 2 == 1:
        pmm = -pmm
    out[0] = pmm
    if lmax > m:
        out[1] = np.sqrt(2.0 * np.longdouble(m) + 3.0) * x * pmm
    for l in range(m + 2, lmax + 1):
        ll = np.longdouble(l)
        a = np.sqrt((4.0 * ll * ll - 1.0) / (ll * ll - m * m))
        b = np.sqrt(((ll - 1.0) ** 2 - m * m) / (4.0 * (ll - 1.0) ** 2 - 1.0))
        out[l - m] = a * (x * out[l - m - 1] - b * out[l - m - 2])
    return out


def rk4_riccati(y0, source_half, h, steps):
    """Integrate y' = -y²/2 - S(x) with classical RK4 on a uniform grid.

    Parameters
    ----------
    y0 : float
        Initial value at x = 0.
    source_half : ndarray, shape (2*steps + 1,)
        S sampled at x = k·h/2 (the RK4 stage points).
    h : float
        Step size.
    steps : int
        Number of steps.

    Returns
    -------
    traj : ndarray, shape (steps + 1,)
        y at the step points; NaN past a blow-up.
    blow_index : int
        Index of the first non-finite/overflowing step, or -1 if none.
    """
    traj = np.full(steps + 1, np.nan)
    y = float(y0)
    traj[0] = y
    blow = -1
    for i in range(steps):
        s0 = source_half[2 * i]
        s1 = source_half[2 * i + 1]
        s2 = source_half[2 * i + 2]
        k1 = -0.5 * y * y - s0
        y1 = y + 0.5 * h * k1
        k2 = -0.5 * y1 * y1 - s1
        y2 = y + 0.5 * h * k2
        k3 = -0.5 * y2 * y2 - s1
        y3 = y + h * k3
        k4 = -0.5 * y3 * y3 - s2
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(y) or abs(y) > 1e15:
            blow = i + 1
            break
        traj[i + 1] = y
    return traj, blow
