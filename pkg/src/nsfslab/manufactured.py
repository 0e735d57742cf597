"""Manufactured solutions for verification runs.

Each case is a closed-form trio (rho~, theta~, u~)(t, x) with boundary-
compatible traces.  The body force g and the auxiliary sources f_rho, f_e
are obtained by substituting the trio into the unregularized equations
(the eps/delta terms are dropped from the substitution, so verification
runs should use negligible regularization):

    f_rho = dt(rho) + dx(rho u)
    g     = [ dt(rho u) + dx(rho u^2) + dx(p) - dx(nu du/dx) ] / rho
    f_e   = dt(rho e) + dx(rho e u) + dx(q) - nu (du/dx)^2 + p du/dx

The algebra is done symbolically and lambdified; only the power-law
equation-of-state family and power-law transport are supported here.

Shipped cases:
  steady          constant equilibrium; all forcings vanish
  traveling_bump  a smooth density wave advected at constant velocity
                  (satisfies continuity exactly, f_rho = 0)
  heated_wall     a quiescent slab with one wall heating up in time
  shear_pulse     an oscillating first-mode shear flow over a drifting
                  density wave; exercises every term incl. f_rho
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import sympy as sp

from .discretization import (BoundaryData, CallableTrace, FieldState,
                             GalerkinBasis, Grid1D, make_state)
from .thermo import EquationOfState, TransportModel

__all__ = ["ManufacturedCase", "make_manufactured", "CASE_IDS",
           "residuals_at"]

CASE_IDS = ("steady", "traveling_bump", "heated_wall", "shear_pulse")

_T, _X = sp.symbols("t x", real=True)


def _zero_fn(t, x):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ManufacturedCase:
    """Closed-form trio plus derived forcings, all numpy-callable (t, x)."""

    name: str
    rho: Callable
    theta: Callable
    u: Callable
    g: Callable
    f_rho: Callable
    f_e: Callable
    bd: BoundaryData
    trivial: bool  # True when all forcings vanish identically

    def initial_state(self, basis: GalerkinBasis, t0: float = 0.0) -> FieldState:
        grid = basis.grid
        x = grid.x
        rho0 = np.asarray(self.rho(t0, x), dtype=float)
        th0 = np.asarray(self.theta(t0, x), dtype=float)
        v = np.asarray(self.u(t0, x), dtype=float) \
            - self.bd.u_ext(t0, x, grid.L)
        coeffs = basis.project(v)
        return make_state(t0, rho0, th0, coeffs, basis, self.bd)

    def error_at(self, state: FieldState, grid: Grid1D) -> dict:
        """Max-norm errors of a computed state against the closed forms."""
        x = grid.x
        return {
            "rho": float(np.max(np.abs(state.rho - self.rho(state.t, x)))),
            "theta": float(np.max(np.abs(state.theta - self.theta(state.t, x)))),
            "u": float(np.max(np.abs(state.u - self.u(state.t, x)))),
        }


def _symbols_for_case(name: str, L: float):
    t, x = _T, _X
    if name == "steady":
        return sp.Float(1.0), sp.Float(1.0), sp.Float(0.0)
    if name == "traveling_bump":
        u0 = sp.Float(0.4)
        rho = 1 + sp.Rational(1, 5) * sp.sin(2 * sp.pi * (x - u0 * t) / L)
        theta = 1 + sp.Rational(1, 10) * sp.sin(sp.pi * x / L)
        return rho, theta, u0 * sp.S.One
    if name == "heated_wall":
        rho = sp.Float(1.0)
        theta = 1 + sp.Rational(3, 10) * (1 - sp.cos(2 * sp.pi * t)) * (x / L) ** 2
        return rho, theta, sp.Float(0.0)
    if name == "shear_pulse":
        u0 = sp.Float(0.3)
        rho = 1 + sp.Rational(3, 20) * sp.sin(2 * sp.pi * x / L - 2 * t)
        theta = 1 + sp.Rational(1, 5) * (x / L) * (1 - x / L) * sp.sin(3 * t)
        u = u0 + sp.Rational(1, 4) * sp.sin(sp.pi * x / L) * sp.sin(2 * t)
        return rho, theta, u
    raise ValueError(f"unknown manufactured case {name!r}; "
                     f"available: {', '.join(CASE_IDS)}")


def make_manufactured(name: str, eos: EquationOfState,
                      transport: TransportModel, L: float = 1.0,
                      d_eff: float = 3.0) -> ManufacturedCase:
    if eos.family != "power-law":
        raise ValueError("manufactured cases need the power-law family")
    if transport.mu_fn or transport.eta_fn or transport.kappa_fn:
        raise ValueError("manufactured cases need power-law transport")
    t, x = _T, _X
    rho, theta, u = _symbols_for_case(name, L)

    c, q, a = eos.c_lin, eos.p_infty, eos.a_rad
    p = c * rho * theta + q * rho ** sp.Rational(5, 3) + sp.Rational(1, 3) * a * theta**4
    e = sp.Rational(3, 2) * c * theta + sp.Rational(3, 2) * q * rho ** sp.Rational(2, 3) \
        + a * theta**4 / rho
    nu = 2 * transport.mu0 * (1 + theta**transport.visc_exp) * (1 - 1 / sp.S(d_eff)) \
        + transport.eta0 * (1 + theta**transport.visc_exp)
    kappa = transport.kappa0 * (1 + theta**transport.cond_exp)

    f_rho = sp.expand(sp.diff(rho, t) + sp.diff(rho * u, x))
    mom_res = sp.expand(sp.diff(rho * u, t) + sp.diff(rho * u * u, x)
                        + sp.diff(p, x) - sp.diff(nu * sp.diff(u, x), x))
    g = mom_res / rho
    heat_flux = -kappa * sp.diff(theta, x)
    f_e = sp.expand(sp.diff(rho * e, t) + sp.diff(rho * e * u, x)
                    + sp.diff(heat_flux, x)
                    - nu * sp.diff(u, x) ** 2 + p * sp.diff(u, x))
    trivial = (f_rho == 0) and (mom_res == 0) and (f_e == 0)

    def lamb(expr):
        fn = sp.lambdify((t, x), expr, modules="numpy")

        def wrapped(tv, xv):
            out = fn(float(tv), np.asarray(xv, dtype=float))
            return np.broadcast_to(np.asarray(out, dtype=float),
                                   np.shape(xv)).copy()
        return wrapped

    def trace(expr, x0):
        sub = expr.subs(x, x0)
        fn = sp.lambdify(t, sub, modules="numpy")
        dfn = sp.lambdify(t, sp.diff(sub, t), modules="numpy")
        return CallableTrace(fn=lambda tv: float(fn(tv)),
                             dfn=lambda tv: float(dfn(tv)))

    bd = BoundaryData(rho=(trace(rho, 0), trace(rho, L)),
                      theta=(trace(theta, 0), trace(theta, L)),
                      u=(trace(u, 0), trace(u, L)))

    return ManufacturedCase(
        name=name, rho=lamb(rho), theta=lamb(theta), u=lamb(u),
        g=lamb(g) if mom_res != 0 else _zero_fn,
        f_rho=lamb(f_rho) if f_rho != 0 else _zero_fn,
        f_e=lamb(f_e) if f_e != 0 else _zero_fn,
        bd=bd, trivial=trivial)


def residuals_at(case: ManufacturedCase, eos: EquationOfState,
                 transport: TransportModel, t: float, x: np.ndarray,
                 d_eff: float = 3.0, h: float = 1e-5,
                 richardson: bool = False) -> dict:
    """Independent check of the forcing algebra: evaluate the three forced
    equations on the closed forms with central finite differences in (t, x)
    and the package's own thermo/transport functions; all three residuals
    must vanish to the differencing accuracy O(h^2) (O(h^4) with the
    Richardson-combined evaluation)."""
    if richardson:
        coarse = _raw_residuals(case, eos, transport, t, x, d_eff, h)
        fine = _raw_residuals(case, eos, transport, t, x, d_eff, h / 2)
        return {k: float(np.max(np.abs((4.0 * fine[k] - coarse[k]) / 3.0)))
                for k in coarse}
    raw = _raw_residuals(case, eos, transport, t, x, d_eff, h)
    return {k: float(np.max(np.abs(v))) for k, v in raw.items()}


def _raw_residuals(case: ManufacturedCase, eos: EquationOfState,
                   transport: TransportModel, t: float, x: np.ndarray,
                   d_eff: float, h: float) -> dict:
    x = np.asarray(x, dtype=float)

    def ddt(f):
        return (f(t + h, x) - f(t - h, x)) / (2 * h)

    def ddx(f, tv=t):
        return (f(tv, x + h) - f(tv, x - h)) / (2 * h)

    rho, theta, u = case.rho(t, x), case.theta(t, x), case.u(t, x)

    res_mass = ddt(case.rho) + ddx(lambda tv, xv: case.rho(tv, xv) * case.u(tv, xv)) \
        - case.f_rho(t, x)

    def mom_flux(tv, xv):
        r = case.rho(tv, xv)
        th = case.theta(tv, xv)
        uu = case.u(tv, xv)
        return r * uu * uu + eos.pressure(r, th)

    def stress(tv, xv):
        th = case.theta(tv, xv)
        du = (case.u(tv, xv + h) - case.u(tv, xv - h)) / (2 * h)
        return transport.shear_coefficient(th, d_eff) * du

    res_mom = (ddt(lambda tv, xv: case.rho(tv, xv) * case.u(tv, xv))
               + ddx(mom_flux) - ddx(stress) - rho * case.g(t, x))

    def heat(tv, xv):
        r = case.rho(tv, xv)
        return r * eos.internal_energy(r, case.theta(tv, xv))

    def heat_conv(tv, xv):
        return heat(tv, xv) * case.u(tv, xv)

    def fourier(tv, xv):
        th = case.theta(tv, xv)
        dth = (case.theta(tv, xv + h) - case.theta(tv, xv - h)) / (2 * h)
        return -transport.kappa(th) * dth

    du = ddx(case.u)
    res_energy = (ddt(heat) + ddx(heat_conv) + ddx(fourier)
                  - transport.shear_coefficient(theta, d_eff) * du**2
                  + eos.pressure(rho, theta) * du - case.f_e(t, x))

    return {"mass": res_mass, "momentum": res_mom, "energy": res_energy}
