"""Pseudo-spectral laboratory for critical fractal Burgers and SQG."""

__version__ = "0.1.0"

from .evolution import BlowupHalt, SolverConfig
from .spectral import Field, Grid

__all__ = ["BlowupHalt", "Field", "Grid", "SolverConfig", "__version__"]
