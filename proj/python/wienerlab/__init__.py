"""Wiener randomization and cubic NLS experiments."""

from ._core import (
    NumericalFault,
    ValidationError,
    __version__,
    coordinates,
    gaussian,
    grid_info,
    lp_norm,
    modulation_norm,
    picard_solve,
    propagate,
    randomize,
    rough_data,
    run_cli,
    sobolev_norm,
    tail_experiment,
)

__all__ = [
    "NumericalFault",
    "ValidationError",
    "__version__",
    "coordinates",
    "gaussian",
    "grid_info",
    "lp_norm",
    "modulation_norm",
    "picard_solve",
    "propagate",
    "randomize",
    "rough_data",
    "run_cli",
    "sobolev_norm",
    "tail_experiment",
]
