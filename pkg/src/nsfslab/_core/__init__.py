"""Numerical kernel backend selection.

The compiled Cython kernels are preferred when available; the pure-numpy
fallback in ``kernels_py`` is used otherwise, or when the environment
variable ``NSFSLAB_BACKEND=python`` forces it (useful for benchmarking the
two implementations against each other).
"""

import os

from . import kernels_py

if os.environ.get("NSFSLAB_BACKEND", "").lower() == "python":
    kernels = kernels_py
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = kernels_py


def backend() -> str:
    """Name of the active kernel backend ("cython" or "python")."""
    return kernels.BACKEND


thomas = kernels.thomas
neg_part_smooth = kernels.neg_part_smooth
powerlaw_pes = kernels.powerlaw_pes
powerlaw_de_dtheta = kernels.powerlaw_de_dtheta
theta_from_heat = kernels.theta_from_heat
