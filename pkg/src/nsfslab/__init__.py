"""nsfslab: 1D slab simulator for a compressible, viscous, heat-conducting
gas with Dirichlet velocity/temperature data and inflow density data, plus
an entropy / ballistic-energy diagnostics engine."""

from ._core import backend

__version__ = "0.1.0"
__all__ = ["backend", "__version__"]
