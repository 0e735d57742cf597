"""nsfplot: read-only figure generation from nsfslab output files."""

from .figures import plot_convergence, plot_energies, plot_weakstrong_ladder
from .reader import SchemaError, SeriesBundle, read_diagnostics

__version__ = "0.1.0"
__all__ = ["plot_energies", "plot_weakstrong_ladder", "plot_convergence",
           "read_diagnostics", "SeriesBundle", "SchemaError", "__version__"]
