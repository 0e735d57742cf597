"""Pure-numpy implementations of the hot per-step kernels.

These mirror the Cython kernels in ``_kernels.pyx`` exactly; the backend is
chosen once at import time in ``_core.__init__``.  All routines operate on
contiguous float64 arrays.

The power-law helpers implement the closed forms for the structural pressure
family P(Z) = c*Z + q*Z^(5/3) with Z = rho/theta^(3/2), for which

    p(rho, theta) = c*rho*theta + q*rho^(5/3) + (a/3)*theta^4
    e(rho, theta) = (3/2)*c*theta + (3/2)*q*rho^(2/3) + a*theta^4/rho
    s(rho, theta) = c*((3/2)*ln theta - ln rho) + s_off + (4a/3)*theta^3/rho

i.e. an ideal-gas part, a cold-pressure part, and a radiation part.
"""

import numpy as np
from scipy.linalg import solve_banded

BACKEND = "python"


def thomas(dl, d, du, rhs):
    """Solve a tridiagonal system.

    ``dl`` is the subdiagonal (dl[0] unused), ``d`` the diagonal, ``du`` the
    superdiagonal (du[-1] unused).  Delegates to LAPACK's banded solver.
    """
    n = d.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = du[:-1]
    ab[1, :] = d
    ab[2, :-1] = dl[1:]
    return solve_banded((1, 1), ab, rhs)


def neg_part_smooth(z, n_smooth):
    """C^1 smoothing of min(z, 0): identity below -1/n, zero above 1/n,
    quadratic blend -(1 - n*z)^2 / (4n) in between."""
    z = np.asarray(z, dtype=float)
    n = float(n_smooth)
    out = np.where(z < -1.0 / n, z, 0.0)
    mid = (z >= -1.0 / n) & (z <= 1.0 / n)
    out = np.where(mid, -(1.0 - n * z) ** 2 / (4.0 * n), out)
    return out


def powerlaw_pes(rho, theta, c_lin, p_inf, a_rad, s_off):
    """Fused pressure / internal energy / entropy for the power-law family."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    cold = p_inf * rho ** (5.0 / 3.0)
    p = c_lin * rho * theta + cold + (a_rad / 3.0) * theta**4
    e = 1.5 * c_lin * theta + 1.5 * cold / rho + a_rad * theta**4 / rho
    s = c_lin * (1.5 * np.log(theta) - np.log(rho)) + s_off
    s = s + (4.0 * a_rad / 3.0) * theta**3 / rho
    return p, e, s


def powerlaw_de_dtheta(rho, theta, c_lin, a_rad):
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return 1.5 * c_lin + 4.0 * a_rad * theta**3 / rho


def theta_from_heat(rho, w, delta, c_lin, p_inf, a_rad, tol=1e-14, max_iter=80):
    """Invert w = rho*(e(rho, theta) + delta*theta) for theta, power-law family.

    Reduces to a*theta^4 + b*theta = r with b = (1.5*c + delta)*rho > 0 and
    r = w - 1.5*q*rho^(5/3); the left side is convex and increasing, so Newton
    started from a point with nonnegative residual descends monotonically.
    Entries with r <= 0 (no positive root) are returned as NaN.
    """
    rho = np.asarray(rho, dtype=float)
    w = np.asarray(w, dtype=float)
    r = w - 1.5 * p_inf * rho ** (5.0 / 3.0)
    b = (1.5 * c_lin + delta) * rho
    bad = (r <= 0.0) | (b <= 0.0)
    if a_rad == 0.0:
        theta = np.where(bad, np.nan, r / np.where(b > 0.0, b, 1.0))
        return theta
    safe_r = np.where(bad, 1.0, r)
    theta = np.maximum(safe_r / np.where(b > 0.0, b, 1.0),
                       (safe_r / a_rad) ** 0.25)
    for _ in range(max_iter):
        f = a_rad * theta**4 + b * theta - safe_r
        df = 4.0 * a_rad * theta**3 + b
        step = f / df
        theta = theta - step
        if np.max(np.abs(step) / np.maximum(theta, 1e-300)) < tol:
            break
    return np.where(bad, np.nan, theta)
