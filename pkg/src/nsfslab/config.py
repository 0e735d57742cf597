"""Run configuration: a single TOML file with nested tables.

The exact schema (version 1) is documented in the README.  Loading a
config builds the equation of state, the transport model and the boundary
data, and runs every structural-hypothesis validator before anything else;
violations are collected and reported by rule name.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .discretization import BoundaryData, Grid1D, TimePoly
from .scheme import SchemeParams
from .thermo import (EquationOfState, TransportModel, power_law_eos,
                     validate_pressure_structure, validate_transport)

__all__ = ["RunConfig", "ConfigError", "load_config", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed or inadmissible configuration; lists every violated rule."""


@dataclass
class RunConfig:
    grid: Grid1D
    scheme: SchemeParams
    eos: EquationOfState
    transport: TransportModel
    boundary: BoundaryData
    initial: dict
    forcing_poly: tuple[float, ...]
    probe_stride: int
    out_dir: str
    seed: int
    mode: str               # "physical" | "manufactured"
    case: str               # manufactured case id (verification only)
    K_cut: float
    warnings: list[str] = field(default_factory=list)
    raw: dict = field(default_factory=dict)

    def g(self, t, x):
        val = float(np.polynomial.polynomial.polyval(t, self.forcing_poly))
        return np.full_like(np.asarray(x, dtype=float), val)

    def has_forcing(self) -> bool:
        return any(c != 0.0 for c in self.forcing_poly)


def _get(table: dict, key: str, default):
    return table.get(key, default)


def _make_eos(tab: dict) -> EquationOfState:
    family = _get(tab, "family", "power-law")
    a_rad = float(_get(tab, "a_rad", 0.0))
    s_off = float(_get(tab, "s_offset", 0.0))
    if family == "power-law":
        return power_law_eos(c_lin=float(_get(tab, "c_lin", 1.0)),
                             p_infty=float(_get(tab, "p_infty", 1.0)),
                             a_rad=a_rad, s_offset=s_off)
    if family == "monomial":
        # P(Z) = Z^r; admissible only for r = 5/3, useful for probing the
        # validators with broken structural functions (e.g. r = 2)
        r = float(_get(tab, "exponent", 2.0))

        def p_struct(z):
            return np.asarray(z, dtype=float) ** r

        def dp_struct(z):
            return r * np.asarray(z, dtype=float) ** (r - 1.0)

        return EquationOfState(p_struct=p_struct, dp_struct=dp_struct,
                               a_rad=a_rad, s_offset=s_off,
                               p_infty=float(_get(tab, "p_infty", 1.0)),
                               family="generic")
    raise ConfigError(f"unknown equation-of-state family {family!r}")


def _scheme_params(stab: dict) -> SchemeParams:
    return SchemeParams(
        eps=float(_get(stab, "eps", 1e-4)),
        delta=float(_get(stab, "delta", 1e-4)),
        gamma_reg=float(_get(stab, "gamma_reg", 4.0)),
        n_modes=int(_get(stab, "n_modes", 4)),
        n_smooth=int(_get(stab, "n_smooth", 64)),
        dt=float(_get(stab, "dt", 1e-3)),
        t_end=float(_get(stab, "t_end", 0.1)),
        d_eff=float(_get(stab, "d_eff", 3.0)),
        advection=str(_get(stab, "advection", "central")),
        smoothing=str(_get(stab, "smoothing", "quadratic")))


def _traces(tab: dict, name: str) -> tuple[TimePoly, TimePoly]:
    left = tab.get(f"{name}_left", [0.0 if name == "u" else 1.0])
    right = tab.get(f"{name}_right", left)
    return (TimePoly(tuple(float(c) for c in left)),
            TimePoly(tuple(float(c) for c in right)))


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    if raw.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema version {raw.get('schema')}")

    gtab = raw.get("grid", {})
    grid = Grid1D(n_cells=int(_get(gtab, "n_cells", 64)),
                  L=float(_get(gtab, "length", 1.0)))

    stab = raw.get("scheme", {})
    try:
        params = _scheme_params(stab)
    except ValueError as exc:
        raise ConfigError(f"scheme table: {exc}") from exc

    eos = _make_eos(raw.get("eos", {}))

    ttab = raw.get("transport", {})
    transport = TransportModel(
        mu0=float(_get(ttab, "mu0", 5e-2)),
        eta0=float(_get(ttab, "eta0", 0.0)),
        kappa0=float(_get(ttab, "kappa0", 5e-2)),
        visc_exp=float(_get(ttab, "visc_exp", 1.0)),
        cond_exp=float(_get(ttab, "cond_exp", 3.0)))

    btab = raw.get("boundary", {})
    bd = BoundaryData(rho=_traces(btab, "rho"),
                      theta=_traces(btab, "theta"),
                      u=_traces(btab, "u"))

    vtab = raw.get("verification", {})
    mode = _get(vtab, "mode", "physical")
    if mode not in ("physical", "manufactured"):
        raise ConfigError(f"unknown mode {mode!r}")

    cfg = RunConfig(
        grid=grid, scheme=params, eos=eos, transport=transport, boundary=bd,
        initial=dict(raw.get("initial", {})),
        forcing_poly=tuple(float(c)
                           for c in raw.get("forcing", {}).get("g", [0.0])),
        probe_stride=int(raw.get("probes", {}).get("stride", 10)),
        out_dir=str(raw.get("output", {}).get("dir", "out")),
        seed=int(raw.get("seed", 0)),
        mode=mode,
        case=str(_get(vtab, "case", "traveling_bump")),
        K_cut=float(raw.get("diagnostics", {}).get("k_cut", 2.0)),
        raw=raw)

    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    failures = []
    for chk in validate_pressure_structure(cfg.eos):
        if not chk.passed:
            failures.append(f"{chk.rule}: {chk.detail}")
    for chk in validate_transport(cfg.transport):
        if not chk.passed:
            failures.append(f"{chk.rule}: {chk.detail}")

    t_grid = np.linspace(0.0, cfg.scheme.t_end, 33)
    try:
        cfg.boundary.validate(t_grid)
    except ValueError as exc:
        failures.append(f"BOUNDARY-POSITIVE: {exc}")

    if failures:
        raise ConfigError("inadmissible configuration:\n  "
                          + "\n  ".join(failures))

    # conductivity growth: a spatially varying boundary temperature needs
    # cond_exp > 6 (with a positive constant trace the weaker default is fine)
    thL, thR = cfg.boundary.theta
    varies = any(abs(thL(t) - thR(t)) > 1e-14 for t in t_grid)
    if varies and cfg.transport.cond_exp <= 6.0:
        cfg.warnings.append(
            "COND-GROWTH-DIRICHLET: spatially varying boundary temperature "
            f"with cond_exp = {cfg.transport.cond_exp}; the a priori "
            "estimates need cond_exp > 6 in this regime")
