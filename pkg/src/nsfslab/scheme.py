"""Regularized approximation scheme for the slab, as a time stepper.

One outer step applies three backward-Euler substeps (Lie splitting), each
seeing the freshest fields:

1. continuity with vanishing-viscosity regularization,

       d(rho)/dt + d(rho u)/dx = eps * d2(rho)/dx2 + f_rho,

   closed at the endpoints by the Robin condition
   eps * drho/dx . n = (rho - rho_B) * [u_B . n]_n^-, where [.]_n^- is the
   smoothed negative part; discretized in flux form on dual cells so the
   mass telescope Sum w_i (rho+ - rho) = dt * (boundary fluxes) is exact;

2. Galerkin momentum for v = u - u_B in span{w_j}: for every mode,

       d/dt int rho u w_j = int [ rho u^2 w_j' + (p + delta(rho^G + rho^2)) w_j'
                                  - nu_delta u_x w_j' + rho g w_j ],

   with the delta-augmented shear viscosity mu_delta = mu + delta*theta;
   the nonlinear system in the coefficients is solved by Newton;

3. internal energy for the heat content w = rho (e + delta*theta):

       dw/dt + d(w u)/dx - d/dx[ (delta(theta^G + 1/theta) + kappa) dtheta/dx ]
           = S_delta : Du - p du/dx
             + eps*delta*(G rho^(G-2) + 2) (drho/dx)^2 + delta/theta^2
             - eps*theta^5 + f_e,

   with Dirichlet temperature at the endpoints; solved fully implicitly by
   Newton on theta (well posed because theta -> w is strictly increasing:
   thermodynamic stability plus delta > 0), so the updated heat content
   determines theta by monotone inversion.

Positivity losses or solver failures reject the step; ``advance`` then
bisects the time interval (up to 10 halvings) before giving up.  The
verification sources f_rho, f_e exist only for manufactured runs and are
refused in physical mode by the harness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._core import kernels
from .discretization import (BoundaryData, FieldState, GalerkinBasis, Grid1D,
                             gradient, make_state, smoothed_negative_part,
                             smoothed_negative_part_inf, trapezoid_weights)
from .thermo import EquationOfState, TransportModel

__all__ = [
    "SchemeParams",
    "StepReport",
    "StepRejection",
    "Trajectory",
    "Stepper",
]


@dataclass(frozen=True)
class SchemeParams:
    """Regularization and resolution knobs of the scheme."""

    eps: float = 1e-4
    delta: float = 1e-4
    gamma_reg: float = 4.0
    n_modes: int = 4
    n_smooth: int = 64
    dt: float = 1e-3
    t_end: float = 0.1
    d_eff: float = 3.0
    advection: str = "central"  # "upwind" is the fallback for small eps
    smoothing: str = "quadratic"  # inflow blend: "quadratic" (C^1) | "smooth"
    newton_tol: float = 1e-10
    newton_max_iter: int = 40
    max_halvings: int = 10

    def __post_init__(self):
        if self.eps < 0 or self.delta < 0:
            raise ValueError("eps and delta must be nonnegative")
        if self.gamma_reg < 2.0:
            raise ValueError("pressure regularization exponent must be >= 2")
        if self.dt <= 0 or self.t_end <= 0 or self.n_smooth < 1:
            raise ValueError("dt, t_end, n_smooth must be positive")
        if self.advection not in ("central", "upwind"):
            raise ValueError("advection must be 'central' or 'upwind'")
        if self.smoothing not in ("quadratic", "smooth"):
            raise ValueError("smoothing must be 'quadratic' or 'smooth'")


class StepRejection(RuntimeError):
    """A substep lost positivity or failed to converge."""

    def __init__(self, message: str, suggested_dt: float):
        super().__init__(f"{message}; suggested dt = {suggested_dt:g}")
        self.suggested_dt = suggested_dt


@dataclass
class StepReport:
    """Solver bookkeeping for one accepted outer step."""

    t: float
    dt: float
    newton_iters_momentum: int = 0
    newton_iters_energy: int = 0
    residual_momentum: float = 0.0
    residual_energy: float = 0.0
    min_rho: float = float("inf")
    min_theta: float = float("inf")
    mass_flux_in: float = 0.0   # time-integrated boundary influx of mass
    mass_flux_out: float = 0.0
    rejections: int = 0


@dataclass
class Trajectory:
    """Scheme output sampled at the probe stride (step 0 always included).

    The accumulators cover *every* step, sampled or not: total boundary mass
    fluxes (time-integrated) and the global positivity minima.
    """

    times: list[float] = field(default_factory=list)
    states: list[FieldState] = field(default_factory=list)
    reports: list[StepReport] = field(default_factory=list)
    mass_in_total: float = 0.0
    mass_out_total: float = 0.0
    min_rho_global: float = float("inf")
    min_theta_global: float = float("inf")
    rejections_total: int = 0


class Stepper:
    """Backward-Euler/Lie-splitting integrator of the regularized system."""

    def __init__(self, grid: Grid1D, basis: GalerkinBasis, bd: BoundaryData,
                 eos: EquationOfState, transport: TransportModel,
                 params: SchemeParams,
                 g: Optional[Callable] = None,
                 f_rho: Optional[Callable] = None,
                 f_e: Optional[Callable] = None):
        self.grid = grid
        self.basis = basis
        self.bd = bd
        self.eos = eos
        self.transport = transport
        self.params = params
        self.g = g
        self.f_rho = f_rho
        self.f_e = f_e
        self.wt = trapezoid_weights(grid)

    # -- helpers -----------------------------------------------------------

    def _heat_content(self, rho, theta):
        return rho * (self.eos.internal_energy(rho, theta)
                      + self.params.delta * theta)

    def _shear_delta(self, theta):
        """Effective 1D stress coefficient with the delta-augmented shear."""
        d = self.params.d_eff
        mu_d = self.transport.mu(theta) + self.params.delta * theta
        return 2.0 * mu_d * (1.0 - 1.0 / d) + self.transport.eta(theta)

    def _boundary_closure(self, t_new):
        """Smoothed inflow weights [u_B . n]_n^- at both endpoints."""
        uL, uR = self.bd.u_values(t_new)
        n = self.params.n_smooth
        blend = (smoothed_negative_part_inf
                 if self.params.smoothing == "smooth"
                 else smoothed_negative_part)
        return (blend(-uL, n), blend(uR, n))

    def _face_coeffs(self, u):
        """Per-face convective weights: flux = a * f_left + b * f_right.

        Central averaging by default; donor-cell upwinding as the fallback
        for runs with very small eps."""
        if self.params.advection == "upwind":
            ubar = 0.5 * (u[:-1] + u[1:])
            return np.maximum(ubar, 0.0), np.minimum(ubar, 0.0)
        return 0.5 * u[:-1], 0.5 * u[1:]

    # -- substeps ------------------------------------------------------------

    def step_continuity(self, state: FieldState, dt: float):
        """Advance the density; returns (rho_new, boundary fluxes (F0, FL))."""
        p = self.params
        h = self.grid.h
        n = self.grid.n_nodes
        t_new = state.t + dt
        u = state.u
        rho_old = state.rho
        rhoB_L, rhoB_R = self.bd.rho_values(t_new)
        uB_L, uB_R = self.bd.u_values(t_new)
        gL, gR = self._boundary_closure(t_new)
        eps = p.eps

        lo = np.zeros(n)
        di = np.zeros(n)
        up = np.zeros(n)
        rhs = np.zeros(n)
        a, b = self._face_coeffs(u)  # F_{i+1/2} = a_i rho_i + b_i rho_{i+1}

        # interior dual cells
        di[1:-1] = h / dt + a[1:] - b[:-1] + 2.0 * eps / h
        lo[1:-1] = -a[:-1] - eps / h
        up[1:-1] = b[1:] - eps / h
        rhs[1:-1] = (h / dt) * rho_old[1:-1]

        # left half cell with Robin-closure flux
        di[0] = (0.5 * h) / dt + a[0] + eps / h - uB_L - gL
        up[0] = b[0] - eps / h
        rhs[0] = (0.5 * h) / dt * rho_old[0] - rhoB_L * gL

        # right half cell
        di[-1] = (0.5 * h) / dt + uB_R - gR - b[-1] + eps / h
        lo[-1] = -a[-1] - eps / h
        rhs[-1] = (0.5 * h) / dt * rho_old[-1] - rhoB_R * gR

        if self.f_rho is not None:
            src = self.f_rho(t_new, self.grid.x)
            rhs[1:-1] += h * src[1:-1]
            rhs[0] += 0.5 * h * src[0]
            rhs[-1] += 0.5 * h * src[-1]

        rho_new = kernels.thomas(lo, di, up, rhs)
        if not np.all(np.isfinite(rho_new)) or rho_new.min() <= 0.0:
            raise StepRejection("density positivity lost", dt / 2)

        flux_left = rho_new[0] * uB_L + (rho_new[0] - rhoB_L) * gL
        flux_right = rho_new[-1] * uB_R - (rho_new[-1] - rhoB_R) * gR
        return rho_new, (flux_left, flux_right)

    def step_momentum(self, state: FieldState, rho_new: np.ndarray, dt: float):
        """Advance the Galerkin coefficients of v = u - u_B; returns
        (coeffs, iterations, final residual)."""
        p = self.params
        x = self.grid.x
        L = self.grid.L
        wt = self.wt
        W = self.basis.values
        dW = self.basis.derivs
        t_new = state.t + dt
        theta = state.theta

        U_new = self.bd.u_ext(t_new, x, L)
        dU_new = self.bd.du_ext_dx(t_new, L)
        nu = self._shear_delta(theta)
        pres = self.eos.pressure(rho_new, theta)
        Pi = pres + p.delta * (rho_new**p.gamma_reg + rho_new**2)
        g_arr = self.g(t_new, x) if self.g is not None else np.zeros_like(x)

        mom_old = W @ (wt * (state.rho * state.u))
        # constant-in-c pieces of the residual
        base = -dt * (dW @ (wt * Pi) + W @ (wt * rho_new * g_arr))

        c = state.v_coeffs.copy()
        scale = max(1.0, float(np.max(np.abs(mom_old))))
        iters = 0
        res_norm = np.inf
        for iters in range(1, p.newton_max_iter + 1):
            u = U_new + c @ W
            ux = dU_new + c @ dW
            R = (W @ (wt * rho_new * u) - mom_old + base
                 - dt * (dW @ (wt * rho_new * u * u)
                         - dW @ (wt * nu * ux)))
            res_norm = float(np.max(np.abs(R)))
            if res_norm <= p.newton_tol * scale:
                break
            M = (W * (wt * rho_new)) @ W.T
            Conv = (dW * (wt * 2.0 * rho_new * u)) @ W.T
            Visc = (dW * (wt * nu)) @ dW.T
            J = M - dt * (Conv - Visc)
            try:
                c = c - np.linalg.solve(J, R)
            except np.linalg.LinAlgError:
                raise StepRejection("momentum Newton matrix singular", dt / 2)
        else:
            raise StepRejection(
                f"momentum Newton stalled at |R| = {res_norm:.2e}", dt / 2)
        return c, iters, res_norm

    def step_energy(self, state: FieldState, rho_new: np.ndarray,
                    u_new: np.ndarray, ux_new: np.ndarray, dt: float):
        """Advance the temperature; returns (theta, iterations, residual)."""
        p = self.params
        h = self.grid.h
        n = self.grid.n_nodes
        t_new = state.t + dt
        thB_L, thB_R = self.bd.theta_values(t_new)
        w_old = self._heat_content(state.rho, state.theta)
        rho_x = gradient(rho_new, h)
        f_e = self.f_e(t_new, self.grid.x) if self.f_e is not None else 0.0
        cell = np.full(n, h)
        cell[0] = cell[-1] = 0.5 * h

        def k_eff(th):
            out = self.transport.kappa(th)
            if p.delta > 0.0:
                out = out + p.delta * (th**p.gamma_reg + 1.0 / th)
            return out

        a_f, b_f = self._face_coeffs(u_new)

        def residual(th):
            w_new = self._heat_content(rho_new, th)
            G = np.zeros(n)
            H = a_f * w_new[:-1] + b_f * w_new[1:]
            kbar = 0.5 * (k_eff(th[:-1]) + k_eff(th[1:]))
            Q = kbar * (th[1:] - th[:-1]) / h
            src = self._shear_delta(th) * ux_new**2 \
                - self.eos.pressure(rho_new, th) * ux_new + f_e
            if p.eps > 0.0 and p.delta > 0.0:
                src = src + p.eps * p.delta \
                    * (p.gamma_reg * rho_new**(p.gamma_reg - 2.0) + 2.0) * rho_x**2
            if p.delta > 0.0:
                src = src + p.delta / th**2
            if p.eps > 0.0:
                src = src - p.eps * th**5
            G[1:-1] = (cell[1:-1] * (w_new[1:-1] - w_old[1:-1]) / dt
                       + (H[1:] - H[:-1]) - (Q[1:] - Q[:-1])
                       - cell[1:-1] * src[1:-1])
            G[0] = th[0] - thB_L
            G[-1] = th[-1] - thB_R
            return G

        theta = state.theta.copy()
        theta[0], theta[-1] = thB_L, thB_R
        scale = max(1.0, float(np.max(np.abs(cell * w_old / dt))))
        res_norm = np.inf
        iters = 0
        for iters in range(1, p.newton_max_iter + 1):
            G = residual(theta)
            res_norm = float(np.max(np.abs(G)))
            if res_norm <= 1e-11 * scale:
                break
            J_lo, J_di, J_up = self._banded_jacobian(residual, theta, G)
            step = kernels.thomas(J_lo, J_di, J_up, G)
            # damp to preserve positivity
            lam = 1.0
            for _ in range(40):
                trial = theta - lam * step
                if trial.min() > 0.0:
                    break
                lam *= 0.5
            else:
                raise StepRejection("temperature positivity lost", dt / 2)
            theta = theta - lam * step
        else:
            raise StepRejection(
                f"energy Newton stalled at |G| = {res_norm:.2e}", dt / 2)
        if theta.min() <= 0.0:
            raise StepRejection("temperature positivity lost", dt / 2)
        return theta, iters, res_norm

    @staticmethod
    def _banded_jacobian(residual, theta, G0):
        """Tridiagonal Jacobian by three colored finite-difference sweeps
        (the residual stencil has width one, so columns 3 apart never share
        a row)."""
        n = theta.shape[0]
        J_lo = np.zeros(n)
        J_di = np.zeros(n)
        J_up = np.zeros(n)
        for color in range(3):
            idx = np.arange(color, n, 3)
            eta = 1e-7 * np.maximum(np.abs(theta[idx]), 1e-3)
            pert = np.zeros(n)
            pert[idx] = eta
            dG = residual(theta + pert) - G0
            for j, e in zip(idx, eta):
                J_di[j] = dG[j] / e
                if j > 0:
                    J_up[j - 1] = dG[j - 1] / e
                if j < n - 1:
                    J_lo[j + 1] = dG[j + 1] / e
        return J_lo, J_di, J_up

    # -- outer stepping ------------------------------------------------------

    def _single_step(self, state: FieldState, dt: float) -> tuple[FieldState, StepReport]:
        rho_new, (fL, fR) = self.step_continuity(state, dt)
        c_new, it_m, res_m = self.step_momentum(state, rho_new, dt)
        t_new = state.t + dt
        U_new = self.bd.u_ext(t_new, self.grid.x, self.grid.L)
        u_new = U_new + c_new @ self.basis.values
        ux_new = self.bd.du_ext_dx(t_new, self.grid.L) + c_new @ self.basis.derivs
        theta_new, it_e, res_e = self.step_energy(state, rho_new, u_new,
                                                  ux_new, dt)
        new_state = make_state(t_new, rho_new, theta_new, c_new, self.basis,
                               self.bd)
        report = StepReport(
            t=t_new, dt=dt,
            newton_iters_momentum=it_m, newton_iters_energy=it_e,
            residual_momentum=res_m, residual_energy=res_e,
            min_rho=new_state.min_rho(), min_theta=new_state.min_theta(),
            mass_flux_in=dt * fL, mass_flux_out=dt * fR)
        return new_state, report

    def advance(self, state: FieldState, dt: float,
                _depth: int = 0) -> tuple[FieldState, StepReport]:
        """One outer step of length dt; bisects on rejection (Lie splitting:
        continuity, then momentum, then energy)."""
        try:
            return self._single_step(state, dt)
        except StepRejection:
            if _depth >= self.params.max_halvings:
                raise
            s1, r1 = self.advance(state, dt / 2, _depth + 1)
            s2, r2 = self.advance(s1, dt / 2, _depth + 1)
            merged = StepReport(
                t=r2.t, dt=dt,
                newton_iters_momentum=max(r1.newton_iters_momentum,
                                          r2.newton_iters_momentum),
                newton_iters_energy=max(r1.newton_iters_energy,
                                        r2.newton_iters_energy),
                residual_momentum=max(r1.residual_momentum, r2.residual_momentum),
                residual_energy=max(r1.residual_energy, r2.residual_energy),
                min_rho=min(r1.min_rho, r2.min_rho),
                min_theta=min(r1.min_theta, r2.min_theta),
                mass_flux_in=r1.mass_flux_in + r2.mass_flux_in,
                mass_flux_out=r1.mass_flux_out + r2.mass_flux_out,
                rejections=r1.rejections + r2.rejections + 1)
            return s2, merged

    def run(self, initial: FieldState, stride: int = 1,
            probe: Optional[Callable] = None) -> Trajectory:
        """Iterate to t_end, sampling every ``stride``-th step (plus the
        initial and final states); ``probe(state, report)`` is invoked on
        each sample.  A final fractional step lands exactly on t_end when
        dt does not divide the interval."""
        p = self.params
        traj = Trajectory()
        traj.times.append(initial.t)
        traj.states.append(initial)
        state = initial
        span = p.t_end - initial.t
        n_steps = max(int(np.floor(span / p.dt + 1e-9)), 0)
        steps = [p.dt] * n_steps
        remainder = span - n_steps * p.dt
        if remainder > 1e-9 * p.dt:
            steps.append(remainder)
        n_steps = len(steps)
        for k, dt_k in enumerate(steps, start=1):
            state, report = self.advance(state, dt_k)
            traj.mass_in_total += report.mass_flux_in
            traj.mass_out_total += report.mass_flux_out
            traj.min_rho_global = min(traj.min_rho_global, report.min_rho)
            traj.min_theta_global = min(traj.min_theta_global, report.min_theta)
            traj.rejections_total += report.rejections
            if k % stride == 0 or k == n_steps:
                traj.times.append(state.t)
                traj.states.append(state)
                traj.reports.append(report)
                if probe is not None:
                    probe(state, report)
        return traj
