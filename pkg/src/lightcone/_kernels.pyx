# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: the associated Legendre recurrence (extended
precision) and the RK4 focusing integrator. API mirrors
lightcone._kernels_py; see there for docs."""

import numpy as np

cimport numpy as cnp
from libc.math cimport acosl, fabs, isfinite, powl, sqrtl

cnp.import_array()

BACKEND_NAME = "cython"

cdef long double PI_L = acosl(-1.0)


def assoc_legendre_block(int m, int lmax, x):
    x = np.asarray(x, dtype=np.longdouble)
    cdef long double[::1] xv = x
    cdef Py_ssize_t nx = xv.shape[0]
    out_arr = np.zeros((lmax - m + 1, nx), dtype=np.longdouble)
    cdef long double[:, ::1] out = out_arr
    cdef Py_ssize_t j
    cdef int k, l
    cdef long double c, a, b, xx, lm1, ll, mm

    mm = <long double>m
    c = sqrtl(1.0 / (4.0 * PI_L))
    for k in range(1, m + 1):
        c = c * sqrtl((2.0 * <long double>k + 1.0) / (2.0 * <long double>k))
    if m % 2 == 1:
        c = -c
    for j in range(nx):
        xx = xv[j]
        out[0, j] = c * powl((1.0 - xx) * (1.0 + xx), mm / 2.0)
    if lmax > m:
        a = sqrtl(2.0 * mm + 3.0)
        for j in range(nx):
            out[1, j] = a * xv[j] * out[0, j]
    for l in range(m + 2, lmax + 1):
        ll = <long double>l
        a = sqrtl((4.0 * ll * ll - 1.0) / (ll * ll - mm * mm))
        lm1 = ll - 1.0
        b = sqrtl((lm1 * lm1 - mm * mm) / (4.0 * lm1 * lm1 - 1.0))
        for j in range(nx):
            out[l - m, j] = a * (xv[j] * out[l - m - 1, j] - b * out[l - m - 2, j])
    return out_arr


def rk4_riccati(double y0, source_half, double h, int steps):
    source_half = np.ascontiguousarray(source_half, dtype=np.float64)
    cdef double[::1] s = source_half
    traj_arr = np.full(steps + 1, np.nan)
    cdef double[::1] traj = traj_arr
    cdef double y = y0, k1, k2, k3, k4, y1, y2, y3
    cdef int i, blow = -1

    traj[0] = y
    for i in range(steps):
        k1 = -0.5 * y * y - s[2 * i]
        y1 = y + 0.5 * h * k1
        k2 = -0.5 * y1 * y1 - s[2 * i + 1]
        y2 = y + 0.5 * h * k2
        k3 = -0.5 * y2 * y2 - s[2 * i + 1]
        y3 = y + h * k3
        k4 = -0.5 * y3 * y3 - s[2 * i + 2]
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not isfinite(y) or fabs(y) > 1e15:
            blow = i + 1
            break
        traj[i + 1] = y
    return traj_arr, blow
