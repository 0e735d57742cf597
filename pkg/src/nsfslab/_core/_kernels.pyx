# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython twins of the kernels in ``kernels_py``.

Same call signatures, same semantics; see kernels_py for the math notes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, log, pow

cnp.import_array()

BACKEND = "cython"


def thomas(dl, d, du, rhs):
    """Tridiagonal solve without pivoting (matrices here are diagonally
    dominant for admissible time steps)."""
    cdef double[::1] a = np.ascontiguousarray(dl, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(d, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(du, dtype=np.float64)
    cdef double[::1] r = np.ascontiguousarray(rhs, dtype=np.float64)
    cdef Py_ssize_t n = b.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cp = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dp = np.empty(n)
    cdef double m
    cdef Py_ssize_t i

    cp[0] = c[0] / b[0]
    dp[0] = r[0] / b[0]
    for i in range(1, n):
        m = b[i] - a[i] * cp[i - 1]
        cp[i] = c[i] / m
        dp[i] = (r[i] - a[i] * dp[i - 1]) / m
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def neg_part_smooth(z, n_smooth):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] zz = \
        np.atleast_1d(np.asarray(z, dtype=np.float64)).ravel()
    cdef double n = <double> n_smooth
    cdef Py_ssize_t i, m = zz.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m)
    cdef double zi
    for i in range(m):
        zi = zz[i]
        if zi < -1.0 / n:
            out[i] = zi
        elif zi > 1.0 / n:
            out[i] = 0.0
        else:
            out[i] = -(1.0 - n * zi) * (1.0 - n * zi) / (4.0 * n)
    if np.ndim(z) == 0:
        return float(out[0])
    return out.reshape(np.shape(z))


def powerlaw_pes(rho, theta, double c_lin, double p_inf, double a_rad,
                 double s_off):
    cdef double[::1] rr = np.ascontiguousarray(
        np.atleast_1d(rho), dtype=np.float64)
    cdef double[::1] tt = np.ascontiguousarray(
        np.atleast_1d(theta), dtype=np.float64)
    cdef Py_ssize_t i, n = rr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] e = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.empty(n)
    cdef double ri, ti, cold, t3
    for i in range(n):
        ri = rr[i]
        ti = tt[i]
        cold = p_inf * pow(ri, 5.0 / 3.0)
        t3 = ti * ti * ti
        p[i] = c_lin * ri * ti + cold + (a_rad / 3.0) * t3 * ti
        e[i] = 1.5 * c_lin * ti + 1.5 * cold / ri + a_rad * t3 * ti / ri
        s[i] = c_lin * (1.5 * log(ti) - log(ri)) + s_off \
            + (4.0 * a_rad / 3.0) * t3 / ri
    if np.ndim(rho) == 0 and np.ndim(theta) == 0:
        return float(p[0]), float(e[0]), float(s[0])
    return p, e, s


def powerlaw_de_dtheta(rho, theta, double c_lin, double a_rad):
    cdef double[::1] rr = np.ascontiguousarray(
        np.atleast_1d(rho), dtype=np.float64)
    cdef double[::1] tt = np.ascontiguousarray(
        np.atleast_1d(theta), dtype=np.float64)
    cdef Py_ssize_t i, n = rr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    for i in range(n):
        out[i] = 1.5 * c_lin + 4.0 * a_rad * tt[i] * tt[i] * tt[i] / rr[i]
    if np.ndim(rho) == 0 and np.ndim(theta) == 0:
        return float(out[0])
    return out


def theta_from_heat(rho, w, double delta, double c_lin, double p_inf,
                    double a_rad, double tol=1e-14, int max_iter=80):
    cdef double[::1] rr = np.ascontiguousarray(
        np.atleast_1d(rho), dtype=np.float64)
    cdef double[::1] ww = np.ascontiguousarray(
        np.atleast_1d(w), dtype=np.float64)
    cdef Py_ssize_t i, k, n = rr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double r, b, th, f, df, step, t0
    for i in range(n):
        r = ww[i] - 1.5 * p_inf * pow(rr[i], 5.0 / 3.0)
        b = (1.5 * c_lin + delta) * rr[i]
        if r <= 0.0 or b <= 0.0:
            out[i] = float("nan")
            continue
        if a_rad == 0.0:
            out[i] = r / b
            continue
        th = r / b
        t0 = pow(r / a_rad, 0.25)
        if t0 > th:
            th = t0
        for k in range(max_iter):
            f = a_rad * th * th * th * th + b * th - r
            df = 4.0 * a_rad * th * th * th + b
            step = f / df
            th = th - step
            if fabs(step) < tol * fabs(th):
                break
        out[i] = th
    if np.ndim(rho) == 0 and np.ndim(w) == 0:
        return float(out[0])
    return out
