"""Constitutive theory for a compressible, heat-conducting gas.

The equation of state is built from a single structural function P on
[0, inf) plus a radiation constant a:

    p(rho, theta) = theta^(5/2) * P(Z) + (a/3) * theta^4,   Z = rho / theta^(3/2)
    e(rho, theta) = (3/2) * (theta^(5/2) / rho) * P(Z) + a * theta^4 / rho
    s(rho, theta) = S(Z) + (4a/3) * theta^3 / rho

where the entropy structure S is the antiderivative of

    S'(Z) = -(3/2) * ((5/3) P(Z) - P'(Z) Z) / Z^2

normalized by S(1) = s_offset.  Admissible P must satisfy P(0) = 0, P' > 0,
0 < ((5/3) P - P' Z)/Z <= c, and P(Z)/Z^(5/3) decreasing to a positive
limit; the validators at the bottom of this module check those hypotheses
on sample grids.  This construction satisfies Gibbs' relation

    theta * ds = de + p * d(1/rho)

identically, and thermodynamic stability (dp/drho > 0, de/dtheta > 0),
which makes rho*e convex in the conservative variables (rho, S=rho*s) and
the relative energy below a true Bregman distance.

The default family P(Z) = c_lin*Z + p_infty*Z^(5/3) has closed forms for
everything (ideal gas + cold pressure + radiation) and is dispatched to the
compiled kernels; a generic P falls back to quadrature with a cached
Chebyshev interpolant of S on log Z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from ._core import kernels

__all__ = [
    "ThermoDomainError",
    "InversionError",
    "ThermoPoint",
    "ConservativeState",
    "EquationOfState",
    "TransportModel",
    "power_law_eos",
    "power_law_transport",
    "pressure",
    "internal_energy",
    "entropy",
    "structural_entropy_derivative",
    "gibbs_residuals",
    "thermodynamic_stability",
    "to_conservative",
    "from_conservative",
    "energy_functional",
    "relative_energy",
    "bregman_decomposition",
    "viscous_stress",
    "viscous_stress_tensor",
    "heat_flux",
    "conductivity_primitive",
    "RuleCheck",
    "validate_pressure_structure",
    "validate_transport",
]

THETA_MIN = 1e-8
THETA_MAX = 1e8


class ThermoDomainError(ValueError):
    """Raised when a state leaves the admissible domain (rho, theta > 0)."""


class InversionError(RuntimeError):
    """Raised when a monotone inversion target is outside the attainable range."""


@dataclass(frozen=True)
class ThermoPoint:
    """A single admissible thermodynamic state."""

    rho: float
    theta: float

    def __post_init__(self):
        if not (self.rho > 0.0 and math.isfinite(self.rho)):
            raise ThermoDomainError(f"density must be positive, got {self.rho}")
        if not (self.theta > 0.0 and math.isfinite(self.theta)):
            raise ThermoDomainError(f"temperature must be positive, got {self.theta}")


@dataclass(frozen=True)
class ConservativeState:
    """State in conservative variables: density, total entropy rho*s, momentum."""

    rho: np.ndarray | float
    S_tot: np.ndarray | float
    m: np.ndarray | float


def _chebyshev_nodes(n: int) -> np.ndarray:
    # Chebyshev extrema on [-1, 1], ascending.
    return -np.cos(np.pi * np.arange(n + 1) / n)


def _chebyshev_coeffs(values: np.ndarray) -> np.ndarray:
    # Interpolation coefficients at Chebyshev extrema (type-I DCT formula).
    n = len(values) - 1
    k = np.arange(n + 1)
    theta = np.pi * np.outer(k, k) / n
    weights = np.ones(n + 1)
    weights[0] = weights[-1] = 0.5
    coeffs = (2.0 / n) * (np.cos(theta) * (weights * values)).sum(axis=1)
    coeffs[0] *= 0.5
    coeffs[-1] *= 0.5
    return coeffs


class _EntropyStructureTable:
    """Cached Chebyshev interpolant of the entropy structure S on log Z.

    Built once per equation of state (build-once / read-many); outside the
    tabulated range the value is completed by direct adaptive quadrature
    from the nearest anchor.
    """

    Z_LO = 1e-8
    Z_HI = 1e8

    def __init__(self, sprime: Callable[[float], float], s_offset: float,
                 n_nodes: int = 256):
        t_lo, t_hi = math.log(self.Z_LO), math.log(self.Z_HI)
        t = 0.5 * (t_lo + t_hi) + 0.5 * (t_hi - t_lo) * _chebyshev_nodes(n_nodes)
        anchors = np.exp(t)
        vals = np.empty_like(anchors)
        # cumulative segment quadrature (ascending), then shift so S(1) = s_offset
        vals_sorted = np.empty_like(anchors)
        idx = np.argsort(anchors)
        z_sorted = anchors[idx]
        acc = 0.0
        vals_sorted[0] = 0.0
        for i in range(1, len(z_sorted)):
            seg, _ = quad(sprime, z_sorted[i - 1], z_sorted[i],
                          epsabs=1e-13, epsrel=1e-12, limit=200)
            acc += seg
            vals_sorted[i] = acc
        shift, _ = quad(sprime, z_sorted[0], 1.0,
                        epsabs=1e-13, epsrel=1e-12, limit=200)
        vals_sorted = vals_sorted - (vals_sorted[0] + shift) + s_offset
        vals[idx] = vals_sorted
        self._t_lo, self._t_hi = t_lo, t_hi
        # DCT-I coefficients expect values at the extrema cos(pi*j/n), which
        # run from +1 down to -1: reverse the ascending-in-t samples
        self._coeffs = _chebyshev_coeffs(vals[::-1])
        self._sprime = sprime
        self._s_offset = s_offset

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z <= 0.0):
            raise ThermoDomainError("entropy structure needs Z > 0")
        t = np.log(z)
        x = (2.0 * t - (self._t_lo + self._t_hi)) / (self._t_hi - self._t_lo)
        inside = (x >= -1.0) & (x <= 1.0)
        out = np.polynomial.chebyshev.chebval(np.clip(x, -1.0, 1.0), self._coeffs)
        if not np.all(inside):
            flat = out.ravel()
            zf = z.ravel()
            for i in np.nonzero(~inside.ravel())[0]:
                anchor = self.Z_LO if zf[i] < self.Z_LO else self.Z_HI
                seg, _ = quad(self._sprime, anchor, zf[i],
                              epsabs=1e-13, epsrel=1e-12, limit=200)
                base = self(anchor)
                flat[i] = base + seg
            out = flat.reshape(z.shape)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class EquationOfState:
    """Equation of state generated by a structural pressure function.

    ``p_struct`` / ``dp_struct`` are P and P'; ``a_rad`` the radiation
    constant; ``s_offset`` fixes the entropy normalization S(1) = s_offset;
    ``p_infty`` the limit of P(Z)/Z^(5/3).  When ``family == "power-law"``
    the closed forms for P(Z) = c_lin*Z + p_infty*Z^(5/3) are used and the
    hot paths run in the compiled kernels.
    """

    p_struct: Callable
    dp_struct: Callable
    a_rad: float = 0.0
    s_offset: float = 0.0
    p_infty: float = 1.0
    family: str = "generic"
    c_lin: float = float("nan")

    @cached_property
    def _entropy_table(self) -> _EntropyStructureTable:
        return _EntropyStructureTable(
            lambda z: structural_entropy_derivative(z, self), self.s_offset)

    def _is_powerlaw(self) -> bool:
        return self.family == "power-law"

    # -- primary fields ----------------------------------------------------

    def pressure(self, rho, theta):
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if self._is_powerlaw():
            p, _, _ = kernels.powerlaw_pes(rho, theta, self.c_lin,
                                           self.p_infty, self.a_rad,
                                           self.s_offset)
            return p
        z = rho / theta**1.5
        p = theta**2.5 * self.p_struct(z) + (self.a_rad / 3.0) * theta**4
        if not np.all(np.isfinite(p)):
            raise ThermoDomainError("pressure overflow for extreme state")
        return p if np.ndim(p) else float(p)

    def internal_energy(self, rho, theta):
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if np.any(rho <= 0.0):
            raise ThermoDomainError("internal energy needs rho > 0")
        if self._is_powerlaw():
            _, e, _ = kernels.powerlaw_pes(rho, theta, self.c_lin,
                                           self.p_infty, self.a_rad,
                                           self.s_offset)
            return e
        z = rho / theta**1.5
        e = 1.5 * (theta**2.5 / rho) * self.p_struct(z) \
            + self.a_rad * theta**4 / rho
        return e if np.ndim(e) else float(e)

    def entropy(self, rho, theta):
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if np.any(rho <= 0.0) or np.any(theta <= 0.0):
            raise ThermoDomainError("entropy needs rho, theta > 0")
        if self._is_powerlaw():
            _, _, s = kernels.powerlaw_pes(rho, theta, self.c_lin,
                                           self.p_infty, self.a_rad,
                                           self.s_offset)
            return s
        z = rho / theta**1.5
        s = self.entropy_structure(z) + (4.0 * self.a_rad / 3.0) * theta**3 / rho
        return s if np.ndim(s) else float(s)

    def entropy_structure(self, z):
        """S(Z), the molecular part of the entropy."""
        if self._is_powerlaw():
            z = np.asarray(z, dtype=float)
            out = -self.c_lin * np.log(z) + self.s_offset
            return out if np.ndim(out) else float(out)
        return self._entropy_table(z)

    # -- analytic partial derivatives --------------------------------------

    def dp_drho(self, rho, theta):
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        z = rho / theta**1.5
        out = theta * self.dp_struct(z)
        return out if np.ndim(out) else float(out)

    def dp_dtheta(self, rho, theta):
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        z = rho / theta**1.5
        out = 2.5 * theta**1.5 * self.p_struct(z) - 1.5 * rho * self.dp_struct(z) \
            + (4.0 * self.a_rad / 3.0) * theta**3
        return out if np.ndim(out) else float(out)

    def de_dtheta(self, rho, theta):
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if self._is_powerlaw():
            return kernels.powerlaw_de_dtheta(rho, theta, self.c_lin, self.a_rad)
        z = rho / theta**1.5
        out = 1.5 * (2.5 * theta**1.5 * self.p_struct(z)
                     - 1.5 * rho * self.dp_struct(z)) / rho \
            + 4.0 * self.a_rad * theta**3 / rho
        return out if np.ndim(out) else float(out)

    def de_drho(self, rho, theta):
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        z = rho / theta**1.5
        out = 1.5 * (theta * self.dp_struct(z) / rho
                     - theta**2.5 * self.p_struct(z) / rho**2) \
            - self.a_rad * theta**4 / rho**2
        return out if np.ndim(out) else float(out)

    def ds_dtheta(self, rho, theta):
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        z = rho / theta**1.5
        out = -1.5 * rho * theta**-2.5 * structural_entropy_derivative(z, self) \
            + 4.0 * self.a_rad * theta**2 / rho
        return out if np.ndim(out) else float(out)

    def ds_drho(self, rho, theta):
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        z = rho / theta**1.5
        out = structural_entropy_derivative(z, self) / theta**1.5 \
            - (4.0 * self.a_rad / 3.0) * theta**3 / rho**2
        return out if np.ndim(out) else float(out)

    # -- monotone inversions ------------------------------------------------

    def theta_from_entropy(self, rho, S_tot, tol=1e-12):
        """Solve rho*s(rho, theta) = S_tot for theta (increasing in theta)."""
        rho_arr = np.atleast_1d(np.asarray(rho, dtype=float))
        S_arr = np.atleast_1d(np.asarray(S_tot, dtype=float))
        out = np.empty_like(S_arr)
        for i, (r, S) in enumerate(zip(rho_arr.ravel(), S_arr.ravel())):
            fn = lambda th: r * self.entropy(r, th) - S
            lo, hi = THETA_MIN, THETA_MAX
            flo, fhi = fn(lo), fn(hi)
            if not (flo < 0.0 < fhi):
                raise InversionError(
                    f"total entropy {S} not attainable for rho={r}")
            th = brentq(fn, lo, hi, xtol=1e-300, rtol=1e-14, maxiter=200)
            # Newton polish
            for _ in range(3):
                d = r * self.ds_dtheta(r, th)
                step = fn(th) / d
                th_new = th - step
                if th_new > 0:
                    th = th_new
                if abs(step) <= tol * th:
                    break
            out.ravel()[i] = th
        if np.ndim(rho) == 0 and np.ndim(S_tot) == 0:
            return float(out[0])
        return out.reshape(np.shape(S_tot))

    def theta_from_heat(self, rho, w, delta=0.0, tol=1e-12):
        """Solve rho*(e(rho, theta) + delta*theta) = w for theta."""
        if self._is_powerlaw():
            out = kernels.theta_from_heat(rho, w, delta, self.c_lin,
                                          self.p_infty, self.a_rad)
            if np.any(np.isnan(np.atleast_1d(out))):
                raise InversionError("heat content below attainable range")
            return out
        rho_arr = np.atleast_1d(np.asarray(rho, dtype=float))
        w_arr = np.atleast_1d(np.asarray(w, dtype=float))
        out = np.empty_like(w_arr, dtype=float)
        for i, (r, wi) in enumerate(zip(rho_arr.ravel(), w_arr.ravel())):
            fn = lambda th: r * (self.internal_energy(r, th) + delta * th) - wi
            lo, hi = THETA_MIN, THETA_MAX
            if not (fn(lo) < 0.0 < fn(hi)):
                raise InversionError(f"heat content {wi} not attainable")
            out.ravel()[i] = brentq(fn, lo, hi, xtol=1e-300, rtol=1e-14,
                                    maxiter=200)
        if np.ndim(rho) == 0 and np.ndim(w) == 0:
            return float(out[0])
        return out.reshape(np.shape(w))


def power_law_eos(c_lin: float = 1.0, p_infty: float = 1.0,
                  a_rad: float = 0.0, s_offset: float = 0.0) -> EquationOfState:
    """Default admissible family P(Z) = c_lin*Z + p_infty*Z^(5/3).

    Satisfies all structural hypotheses with ((5/3)P - P'Z)/Z = (2/3)*c_lin
    and entropy structure S(Z) = -c_lin*ln Z + s_offset.
    """
    def p_struct(z):
        return c_lin * z + p_infty * np.asarray(z, dtype=float) ** (5.0 / 3.0)

    def dp_struct(z):
        return c_lin + (5.0 / 3.0) * p_infty * np.asarray(z, dtype=float) ** (2.0 / 3.0)

    return EquationOfState(p_struct=p_struct, dp_struct=dp_struct,
                           a_rad=a_rad, s_offset=s_offset, p_infty=p_infty,
                           family="power-law", c_lin=c_lin)


# ---------------------------------------------------------------------------
# transport coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransportModel:
    """Temperature-dependent transport coefficients with growth envelopes.

    Defaults are the power-law forms mu = mu0*(1 + theta^visc_exp),
    eta = eta0*(1 + theta^visc_exp), kappa = kappa0*(1 + theta^cond_exp);
    custom callables may replace them, in which case the envelope constants
    (mu_lo .. kappa_hi) must still bracket the custom growth for the
    validators to pass.
    """

    mu0: float = 1e-2
    eta0: float = 0.0
    kappa0: float = 1e-2
    visc_exp: float = 1.0
    cond_exp: float = 3.0
    mu_lo: float = field(default=float("nan"))
    mu_hi: float = field(default=float("nan"))
    eta_hi: float = field(default=float("nan"))
    kappa_lo: float = field(default=float("nan"))
    kappa_hi: float = field(default=float("nan"))
    mu_fn: Optional[Callable] = None
    eta_fn: Optional[Callable] = None
    kappa_fn: Optional[Callable] = None

    def __post_init__(self):
        for name, default in (("mu_lo", self.mu0), ("mu_hi", self.mu0),
                              ("eta_hi", self.eta0),
                              ("kappa_lo", self.kappa0),
                              ("kappa_hi", self.kappa0)):
            if math.isnan(getattr(self, name)):
                object.__setattr__(self, name, default)

    def mu(self, theta):
        if self.mu_fn is not None:
            return self.mu_fn(theta)
        return self.mu0 * (1.0 + np.asarray(theta, dtype=float) ** self.visc_exp)

    def dmu(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.mu_fn is not None:
            h = 1e-6 * np.maximum(theta, 1.0)
            return (self.mu_fn(theta + h) - self.mu_fn(theta - h)) / (2 * h)
        return self.mu0 * self.visc_exp * theta ** (self.visc_exp - 1.0)

    def eta(self, theta):
        if self.eta_fn is not None:
            return self.eta_fn(theta)
        return self.eta0 * (1.0 + np.asarray(theta, dtype=float) ** self.visc_exp)

    def kappa(self, theta):
        if self.kappa_fn is not None:
            return self.kappa_fn(theta)
        return self.kappa0 * (1.0 + np.asarray(theta, dtype=float) ** self.cond_exp)

    def shear_coefficient(self, theta, d_eff: float = 3.0):
        """Effective 1D stress coefficient 2*mu*(1 - 1/d) + eta."""
        return 2.0 * self.mu(theta) * (1.0 - 1.0 / d_eff) + self.eta(theta)


def power_law_transport(mu0=1e-2, eta0=0.0, kappa0=1e-2, visc_exp=1.0,
                        cond_exp=3.0) -> TransportModel:
    return TransportModel(mu0=mu0, eta0=eta0, kappa0=kappa0,
                          visc_exp=visc_exp, cond_exp=cond_exp)


# ---------------------------------------------------------------------------
# operations on states
# ---------------------------------------------------------------------------

def pressure(pt: ThermoPoint, eos: EquationOfState) -> float:
    """Molecular + radiation pressure at a point (rho = 0 allowed)."""
    if pt.rho < 0 or pt.theta <= 0:
        raise ThermoDomainError("pressure needs rho >= 0, theta > 0")
    if pt.rho == 0.0:
        # structural part vanishes through P(0) = 0
        return float((eos.a_rad / 3.0) * pt.theta**4)
    out = eos.pressure(pt.rho, pt.theta)
    if not np.isfinite(out):
        raise ThermoDomainError("pressure overflow")
    return float(out)


def internal_energy(pt: ThermoPoint, eos: EquationOfState) -> float:
    return float(eos.internal_energy(pt.rho, pt.theta))


def entropy(pt: ThermoPoint, eos: EquationOfState) -> float:
    return float(eos.entropy(pt.rho, pt.theta))


def structural_entropy_derivative(z, eos: EquationOfState):
    """S'(Z) = -(3/2) ((5/3) P(Z) - P'(Z) Z) / Z^2; negative for admissible P."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0.0):
        raise ThermoDomainError("entropy structure derivative needs Z > 0")
    out = -1.5 * ((5.0 / 3.0) * eos.p_struct(z) - eos.dp_struct(z) * z) / z**2
    return out if np.ndim(out) else float(out)


def gibbs_residuals(pt: ThermoPoint, eos: EquationOfState,
                    h: float | None = None) -> tuple[float, float]:
    """Defects of the two components of Gibbs' relation, by central
    differences of step h:

        r_theta = theta * ds/dtheta - de/dtheta
        r_rho   = theta * ds/drho - de/drho + p/rho^2

    Both vanish (to O(h^2)) for any equation of state built here.
    """
    rho, theta = pt.rho, pt.theta
    if h is None:
        h = 1e-6
    h_t = h * max(theta, 1.0)
    h_r = h * max(rho, 1.0)
    ds_dt = (eos.entropy(rho, theta + h_t) - eos.entropy(rho, theta - h_t)) / (2 * h_t)
    de_dt = (eos.internal_energy(rho, theta + h_t)
             - eos.internal_energy(rho, theta - h_t)) / (2 * h_t)
    ds_dr = (eos.entropy(rho + h_r, theta) - eos.entropy(rho - h_r, theta)) / (2 * h_r)
    de_dr = (eos.internal_energy(rho + h_r, theta)
             - eos.internal_energy(rho - h_r, theta)) / (2 * h_r)
    p = eos.pressure(rho, theta)
    return (float(theta * ds_dt - de_dt),
            float(theta * ds_dr - de_dr + p / rho**2))


def thermodynamic_stability(pt: ThermoPoint, eos: EquationOfState,
                            h: float | None = None) -> tuple[float, float]:
    """(dp/drho, de/dtheta) by central differences; both must be positive."""
    rho, theta = pt.rho, pt.theta
    if h is None:
        h = 1e-6
    h_t = h * max(theta, 1.0)
    h_r = h * max(rho, 1.0)
    dp_dr = (eos.pressure(rho + h_r, theta) - eos.pressure(rho - h_r, theta)) / (2 * h_r)
    de_dt = (eos.internal_energy(rho, theta + h_t)
             - eos.internal_energy(rho, theta - h_t)) / (2 * h_t)
    return float(dp_dr), float(de_dt)


def to_conservative(rho, theta, u, eos: EquationOfState) -> ConservativeState:
    return ConservativeState(rho=rho, S_tot=rho * eos.entropy(rho, theta),
                             m=rho * u)


def from_conservative(cs: ConservativeState, eos: EquationOfState):
    theta = eos.theta_from_entropy(cs.rho, cs.S_tot)
    return cs.rho, theta, cs.m / cs.rho


def energy_functional(cs: ConservativeState, eos: EquationOfState):
    """Total energy (1/2)|m|^2/rho + rho*e in conservative variables.

    Recovers theta by monotone inversion of S = rho*s(rho, theta).
    """
    theta = eos.theta_from_entropy(cs.rho, cs.S_tot)
    e = eos.internal_energy(cs.rho, theta)
    out = 0.5 * np.asarray(cs.m) ** 2 / cs.rho + cs.rho * e
    return out if np.ndim(out) else float(out)


def relative_energy(rho, theta, u, ref_rho, ref_theta, ref_u,
                    eos: EquationOfState):
    """Pointwise relative energy of (rho, theta, u) against a reference trio:

        (1/2) rho |u - u~|^2 + rho e - theta~ rho s
        - (e~ - theta~ s~ + p~/rho~) rho + p~

    with tilded quantities at the reference.  Nonnegative for any admissible
    pair; zero iff the states coincide.
    """
    e = eos.internal_energy(rho, theta)
    s = eos.entropy(rho, theta)
    e_ref = eos.internal_energy(ref_rho, ref_theta)
    s_ref = eos.entropy(ref_rho, ref_theta)
    p_ref = eos.pressure(ref_rho, ref_theta)
    out = (0.5 * rho * (np.asarray(u) - ref_u) ** 2
           + rho * e - ref_theta * rho * s
           - (e_ref - ref_theta * s_ref + p_ref / ref_rho) * rho + p_ref)
    return out if np.ndim(out) else float(out)


def bregman_decomposition(cs: ConservativeState, ref_cs: ConservativeState,
                          eos: EquationOfState):
    """E(cs) - E(ref) - <dE(ref), cs - ref> with the closed-form gradient

        dE/drho = e - theta s + p/rho - (1/2)|u|^2,  dE/dS = theta,  dE/dm = u

    evaluated at the reference.  Equals ``relative_energy`` of the same pair
    up to roundoff.
    """
    E = energy_functional(cs, eos)
    E_ref = energy_functional(ref_cs, eos)
    theta_ref = eos.theta_from_entropy(ref_cs.rho, ref_cs.S_tot)
    e_ref = eos.internal_energy(ref_cs.rho, theta_ref)
    s_ref = eos.entropy(ref_cs.rho, theta_ref)
    p_ref = eos.pressure(ref_cs.rho, theta_ref)
    u_ref = np.asarray(ref_cs.m) / ref_cs.rho
    dE_drho = e_ref - theta_ref * s_ref + p_ref / ref_cs.rho - 0.5 * u_ref**2
    grad_dot = (dE_drho * (np.asarray(cs.rho) - ref_cs.rho)
                + theta_ref * (np.asarray(cs.S_tot) - ref_cs.S_tot)
                + u_ref * (np.asarray(cs.m) - ref_cs.m))
    out = E - E_ref - grad_dot
    return out if np.ndim(out) else float(out)


def viscous_stress(theta, grad_u, d_eff, transport: TransportModel):
    """1D slab reduction of the Newtonian stress: (2 mu (1 - 1/d) + eta) du/dx."""
    return transport.shear_coefficient(theta, d_eff) * grad_u


def viscous_stress_tensor(theta, grad_u: np.ndarray, d_eff,
                          transport: TransportModel) -> np.ndarray:
    """Full tensor form, for validation: mu (G + G^T - (2/d) tr(G) I) + eta tr(G) I."""
    grad_u = np.asarray(grad_u, dtype=float)
    div_u = np.trace(grad_u)
    dim = grad_u.shape[0]
    eye = np.eye(dim)
    dev = grad_u + grad_u.T - (2.0 / d_eff) * div_u * eye
    return transport.mu(theta) * dev + transport.eta(theta) * div_u * eye


def heat_flux(theta, grad_theta, transport: TransportModel):
    """Fourier flux q = -kappa(theta) * grad(theta)."""
    return -transport.kappa(theta) * grad_theta


def conductivity_primitive(theta, transport: TransportModel) -> float:
    """K(theta) = int_1^theta kappa(tau)/tau dtau by adaptive quadrature."""
    val, _ = quad(lambda tau: transport.kappa(tau) / tau, 1.0, float(theta),
                  epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


# ---------------------------------------------------------------------------
# structural hypothesis validators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RuleCheck:
    """Outcome of one structural-hypothesis check."""

    rule: str
    passed: bool
    detail: str
    fitted: float = float("nan")


def validate_pressure_structure(eos: EquationOfState, z_max: float = 1e4,
                                n_sample: int = 400) -> list[RuleCheck]:
    """Check the structural pressure hypotheses on a log-spaced sample grid.

    Rules:
      P-ZERO        P(0) = 0
      P-MONOTONE    P'(Z) > 0 on samples
      P-GAP         0 < ((5/3)P - P'Z)/Z <= c on samples (c is reported)
      P-RATIO-DEC   Z -> P(Z)/Z^(5/3) non-increasing on samples
      P-ASYMPTOTE   P(Z)/Z^(5/3) approaches the declared positive limit
    """
    z = np.logspace(-6, math.log10(z_max), n_sample)
    P = np.asarray(eos.p_struct(z), dtype=float)
    dP = np.asarray(eos.dp_struct(z), dtype=float)
    checks = []

    p0 = float(eos.p_struct(0.0))
    checks.append(RuleCheck("P-ZERO", abs(p0) < 1e-14,
                            f"P(0) = {p0}"))

    mono = bool(np.all(dP > 0.0)) and float(eos.dp_struct(0.0)) >= 0.0
    checks.append(RuleCheck("P-MONOTONE", mono,
                            f"min P' on samples = {dP.min():.3e}"))

    gap = ((5.0 / 3.0) * P - dP * z) / z
    gap_ok = bool(np.all(gap > 0.0)) and bool(np.all(np.isfinite(gap)))
    checks.append(RuleCheck("P-GAP", gap_ok,
                            f"gap range [{gap.min():.3e}, {gap.max():.3e}]",
                            fitted=float(gap.max())))

    ratio = P / z ** (5.0 / 3.0)
    dec_ok = bool(np.all(np.diff(ratio) <= 1e-12 * np.abs(ratio[:-1])))
    checks.append(RuleCheck("P-RATIO-DEC", dec_ok,
                            f"max ratio increase = {np.diff(ratio).max():.3e}"))

    lim_ok = ratio[-1] > 0.0 and abs(ratio[-1] - eos.p_infty) <= 0.1 * abs(eos.p_infty)
    checks.append(RuleCheck("P-ASYMPTOTE", bool(lim_ok),
                            f"P/Z^(5/3) at Z={z[-1]:.1e} is {ratio[-1]:.6f}, "
                            f"declared limit {eos.p_infty}",
                            fitted=float(ratio[-1])))
    return checks


def validate_transport(transport: TransportModel, theta_max: float = 1e3,
                       n_sample: int = 200) -> list[RuleCheck]:
    """Check the growth envelopes of mu, eta, kappa on a sample grid.

    Rules:
      MU-ENVELOPE     mu_lo (1+theta^L) <= mu <= mu_hi (1+theta^L)
      MU-DERIV        |mu'| finite on samples (reported)
      ETA-ENVELOPE    0 <= eta <= eta_hi (1+theta^L)
      KAPPA-ENVELOPE  kappa_lo (1+theta^B) <= kappa <= kappa_hi (1+theta^B)
      VISC-EXP-RANGE  1/2 <= visc_exp <= 1
    """
    th = np.logspace(-3, math.log10(theta_max), n_sample)
    mu = np.asarray(transport.mu(th), dtype=float)
    eta = np.asarray(transport.eta(th), dtype=float)
    kap = np.asarray(transport.kappa(th), dtype=float)
    env_v = 1.0 + th**transport.visc_exp
    env_k = 1.0 + th**transport.cond_exp
    tol = 1e-12
    checks = [
        RuleCheck("MU-ENVELOPE",
                  bool(np.all(mu >= transport.mu_lo * env_v * (1 - tol))
                       and np.all(mu <= transport.mu_hi * env_v * (1 + tol))
                       and transport.mu_lo > 0.0),
                  f"mu/envelope in [{(mu / env_v).min():.3e}, "
                  f"{(mu / env_v).max():.3e}]"),
        RuleCheck("MU-DERIV",
                  bool(np.all(np.isfinite(transport.dmu(th)))),
                  f"max |mu'| on samples = {np.max(np.abs(transport.dmu(th))):.3e}",
                  fitted=float(np.max(np.abs(transport.dmu(th))))),
        RuleCheck("ETA-ENVELOPE",
                  bool(np.all(eta >= -tol)
                       and np.all(eta <= transport.eta_hi * env_v * (1 + tol) + tol)),
                  f"eta/envelope max = "
                  f"{(eta / env_v).max():.3e}"),
        RuleCheck("KAPPA-ENVELOPE",
                  bool(np.all(kap >= transport.kappa_lo * env_k * (1 - tol))
                       and np.all(kap <= transport.kappa_hi * env_k * (1 + tol))
                       and transport.kappa_lo > 0.0),
                  f"kappa/envelope in [{(kap / env_k).min():.3e}, "
                  f"{(kap / env_k).max():.3e}]"),
        RuleCheck("VISC-EXP-RANGE",
                  0.5 <= transport.visc_exp <= 1.0,
                  f"visc_exp = {transport.visc_exp}"),
    ]
    return checks
