"""Spatial machinery for the slab: uniform node grid, second-order stencils,
the sine Galerkin basis for velocities vanishing at the endpoints, and
time-dependent boundary data with their interior extensions.

The slab is Omega = (0, L) with nodes x_i = i*h, h = L/n_cells; fields live
on the nodes (n_cells + 1 values).  The outward normals are n(0) = -1 and
n(L) = +1; an endpoint is inflow when u_B * n < 0 there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._core import kernels

__all__ = [
    "Grid1D",
    "GalerkinBasis",
    "TimePoly",
    "CallableTrace",
    "BoundaryData",
    "constant_boundary",
    "FieldState",
    "make_state",
    "smoothed_negative_part",
    "smoothed_negative_part_inf",
    "build_basis",
    "gradient",
    "divergence",
    "laplacian",
    "inflow_indicator",
    "trapezoid_weights",
]

NORMALS = (-1.0, 1.0)


@dataclass(frozen=True)
class Grid1D:
    """Uniform node grid on (0, L): n_cells intervals, n_cells + 1 nodes."""

    n_cells: int
    L: float = 1.0

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError("need at least 2 cells")
        if not self.L > 0:
            raise ValueError("domain length must be positive")

    @property
    def h(self) -> float:
        return self.L / self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.n_nodes)


def trapezoid_weights(grid: Grid1D) -> np.ndarray:
    w = np.full(grid.n_nodes, grid.h)
    w[0] = w[-1] = 0.5 * grid.h
    return w


# ---------------------------------------------------------------------------
# smoothed negative part
# ---------------------------------------------------------------------------

def smoothed_negative_part(z, n_smooth: int):
    """C^1 approximation of min(z, 0).

    Equals z below -1/n and 0 above 1/n; on [-1/n, 1/n] the quadratic blend
    -(1 - n z)^2 / (4n), which is nondecreasing and stays <= min(z, 0).
    """
    if n_smooth < 1:
        raise ValueError("n_smooth must be >= 1")
    out = kernels.neg_part_smooth(np.asarray(z, dtype=float), n_smooth)
    return out if np.ndim(z) else float(out)


class _SmoothBlendTable:
    """Cached C^infinity blend B on [-1, 1] with B(z) = int phi, where phi is
    the symmetric bump partition; rescales as [z]_n = B(n z)/n."""

    _table = None

    @classmethod
    def blend(cls):
        if cls._table is None:
            s = np.linspace(-1.0, 1.0, 4001)

            def psi(v):
                with np.errstate(over="ignore", under="ignore"):
                    return np.where(v > 0, np.exp(-1.0 / np.maximum(v, 1e-300)), 0.0)

            phi = psi(1.0 - s) / (psi(1.0 - s) + psi(1.0 + s))
            # cumulative trapezoid of phi from -1, anchored at value -1
            integral = np.concatenate(
                ([0.0], np.cumsum(0.5 * (phi[1:] + phi[:-1]) * np.diff(s))))
            cls._table = (s, -1.0 + integral)
        return cls._table


def smoothed_negative_part_inf(z, n_smooth: int):
    """C^infinity variant of ``smoothed_negative_part`` (config option)."""
    if n_smooth < 1:
        raise ValueError("n_smooth must be >= 1")
    s, B = _SmoothBlendTable.blend()
    zz = np.asarray(z, dtype=float)
    scaled = np.clip(zz * n_smooth, -1.0, 1.0)
    mid = np.interp(scaled, s, B) / n_smooth
    out = np.where(zz < -1.0 / n_smooth, zz,
                   np.where(zz > 1.0 / n_smooth, 0.0, mid))
    # guard the defining bound against interpolation-table roundoff
    out = np.minimum(out, np.minimum(zz, 0.0))
    return out if np.ndim(z) else float(out)


# ---------------------------------------------------------------------------
# Galerkin basis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GalerkinBasis:
    """L^2-orthonormal sine modes w_j(x) = sqrt(2/L) sin(j pi x / L).

    ``values[j - 1, i]`` and ``derivs[j - 1, i]`` hold w_j and w_j' at node i.
    Modes vanish at both endpoints exactly; on the uniform node grid the
    trapezoid products <w_i, w_j> are discretely orthonormal.
    """

    grid: Grid1D
    n_modes: int
    values: np.ndarray
    derivs: np.ndarray

    def eval_at(self, x: np.ndarray) -> np.ndarray:
        L = self.grid.L
        j = np.arange(1, self.n_modes + 1)[:, None]
        return math.sqrt(2.0 / L) * np.sin(j * np.pi * np.asarray(x)[None, :] / L)

    def reconstruct(self, coeffs: np.ndarray) -> np.ndarray:
        return coeffs @ self.values

    def reconstruct_deriv(self, coeffs: np.ndarray) -> np.ndarray:
        return coeffs @ self.derivs

    def project(self, f: np.ndarray) -> np.ndarray:
        """L^2 projection coefficients by trapezoid quadrature."""
        w = trapezoid_weights(self.grid)
        return self.values @ (w * f)


def build_basis(grid: Grid1D, n_modes: int) -> GalerkinBasis:
    if n_modes < 1:
        raise ValueError("need at least one mode")
    if n_modes > grid.n_cells // 4:
        raise ValueError(
            f"n_modes={n_modes} not resolvable on {grid.n_cells} cells "
            f"(limit n_cells/4 = {grid.n_cells // 4})")
    L = grid.L
    x = grid.x
    j = np.arange(1, n_modes + 1)[:, None]
    values = math.sqrt(2.0 / L) * np.sin(j * np.pi * x[None, :] / L)
    derivs = math.sqrt(2.0 / L) * (j * np.pi / L) * np.cos(j * np.pi * x[None, :] / L)
    values[:, 0] = 0.0
    values[:, -1] = 0.0
    return GalerkinBasis(grid=grid, n_modes=n_modes, values=values, derivs=derivs)


# ---------------------------------------------------------------------------
# stencils
# ---------------------------------------------------------------------------

def gradient(f: np.ndarray, h: float) -> np.ndarray:
    """Second-order first derivative: central interior, one-sided ends."""
    f = np.asarray(f, dtype=float)
    if f.shape[0] < 3:
        raise ValueError("need at least 3 nodes")
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return out


def divergence(f: np.ndarray, h: float) -> np.ndarray:
    """Alias of ``gradient`` in one dimension."""
    return gradient(f, h)


def laplacian(f: np.ndarray, h: float, bc: str = "dirichlet",
              bc_values=None) -> np.ndarray:
    """Central second derivative.

    Boundary closures:
      - ``"dirichlet"``: endpoint values replaced by ``bc_values = (vL, vR)``
        when given; endpoint rows copy the adjacent interior value.
      - ``"robin"``: ``bc_values = ((rL, vL), (rR, vR))`` prescribing the
        outward derivative df/dx . n = r (f - v) at each end; the endpoint
        rows use the second-order ghost-node elimination.
      - ``"none"``: endpoint rows copy the adjacent interior value.
    """
    f = np.asarray(f, dtype=float).copy()
    if f.shape[0] < 3:
        raise ValueError("need at least 3 nodes")
    if bc == "dirichlet" and bc_values is not None:
        f[0], f[-1] = bc_values
    elif bc not in ("dirichlet", "robin", "none"):
        raise ValueError(f"unknown boundary closure {bc!r}")
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2
    if bc == "robin":
        (rL, vL), (rR, vR) = bc_values
        # df/dx at x=0 is -rL (f0 - vL) (n = -1), at x=L it is rR (fN - vR)
        dfL = -rL * (f[0] - vL)
        dfR = rR * (f[-1] - vR)
        out[0] = 2.0 * (f[1] - f[0] - h * dfL) / h**2
        out[-1] = 2.0 * (f[-2] - f[-1] + h * dfR) / h**2
    else:
        out[0] = out[1]
        out[-1] = out[-2]
    return out


# ---------------------------------------------------------------------------
# boundary data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimePoly:
    """Polynomial-in-time trace value sum_k c_k t^k."""

    coeffs: tuple[float, ...]

    def __call__(self, t: float) -> float:
        return float(np.polynomial.polynomial.polyval(t, self.coeffs))

    def deriv(self, t: float) -> float:
        c = self.coeffs
        if len(c) < 2:
            return 0.0
        dc = [k * c[k] for k in range(1, len(c))]
        return float(np.polynomial.polynomial.polyval(t, dc))


@dataclass(frozen=True)
class CallableTrace:
    """Arbitrary trace with an explicit time derivative (manufactured cases)."""

    fn: Callable[[float], float]
    dfn: Callable[[float], float]

    def __call__(self, t: float) -> float:
        return float(self.fn(t))

    def deriv(self, t: float) -> float:
        return float(self.dfn(t))


@dataclass(frozen=True)
class BoundaryData:
    """Time-dependent traces at the two endpoints and their interior
    extensions.

    The velocity extension is the linear-in-x interpolant of the endpoint
    traces (any smooth extension gives the same ballistic balance); the
    temperature extension is the 1D harmonic one, i.e. also linear.
    """

    rho: tuple  # (left trace, right trace)
    theta: tuple
    u: tuple

    def validate(self, t_grid: Sequence[float]) -> None:
        for t in t_grid:
            if min(self.theta[0](t), self.theta[1](t)) <= 0.0:
                raise ValueError(f"boundary temperature not positive at t={t}")
            if min(self.rho[0](t), self.rho[1](t)) <= 0.0:
                raise ValueError(f"boundary density not positive at t={t}")

    # velocity extension --------------------------------------------------

    def u_values(self, t: float) -> tuple[float, float]:
        return self.u[0](t), self.u[1](t)

    def u_ext(self, t: float, x: np.ndarray, L: float):
        uL, uR = self.u_values(t)
        return uL + (uR - uL) * np.asarray(x) / L

    def du_ext_dx(self, t: float, L: float) -> float:
        uL, uR = self.u_values(t)
        return (uR - uL) / L

    def du_ext_dt(self, t: float, x: np.ndarray, L: float):
        dL, dR = self.u[0].deriv(t), self.u[1].deriv(t)
        return dL + (dR - dL) * np.asarray(x) / L

    # temperature extension ------------------------------------------------

    def theta_values(self, t: float) -> tuple[float, float]:
        return self.theta[0](t), self.theta[1](t)

    def theta_harmonic(self, t: float, x: np.ndarray, L: float):
        thL, thR = self.theta_values(t)
        out = thL + (thR - thL) * np.asarray(x) / L
        # clamp <= 1 ulp rounding spill so the discrete maximum principle
        # holds exactly
        out = np.clip(out, min(thL, thR), max(thL, thR))
        if np.ndim(x):
            out[0], out[-1] = thL, thR
        return out

    def dtheta_harmonic_dt(self, t: float, x: np.ndarray, L: float):
        dL, dR = self.theta[0].deriv(t), self.theta[1].deriv(t)
        return dL + (dR - dL) * np.asarray(x) / L

    def rho_values(self, t: float) -> tuple[float, float]:
        return self.rho[0](t), self.rho[1](t)


def inflow_indicator(bd: BoundaryData, t: float) -> tuple[bool, bool]:
    """True where u_B * n < 0 (boundary data flows into the slab)."""
    uL, uR = bd.u_values(t)
    return (uL * NORMALS[0] < 0.0, uR * NORMALS[1] < 0.0)


def constant_boundary(rho=1.0, theta=1.0, u=0.0) -> BoundaryData:
    """Convenience: identical constant traces at both endpoints."""
    def tp(v):
        return TimePoly((float(v),))
    return BoundaryData(rho=(tp(rho), tp(rho)),
                        theta=(tp(theta), tp(theta)),
                        u=(tp(u), tp(u)))


# ---------------------------------------------------------------------------
# field state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldState:
    """Discrete state at one time: nodal (rho, theta), Galerkin coefficients
    of v = u - u_B, and the reconstructed nodal velocity."""

    t: float
    rho: np.ndarray
    theta: np.ndarray
    v_coeffs: np.ndarray
    u: np.ndarray

    def min_rho(self) -> float:
        return float(self.rho.min())

    def min_theta(self) -> float:
        return float(self.theta.min())


def make_state(t: float, rho: np.ndarray, theta: np.ndarray,
               v_coeffs: np.ndarray, basis: GalerkinBasis,
               bd: BoundaryData) -> FieldState:
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    v_coeffs = np.asarray(v_coeffs, dtype=float)
    u = bd.u_ext(t, basis.grid.x, basis.grid.L) + basis.reconstruct(v_coeffs)
    return FieldState(t=t, rho=rho, theta=theta, v_coeffs=v_coeffs, u=u)
