"""Epidemic spread on configuration-model networks with multiple mask types."""
from . import analytic, degree, masks, netgen, sim
from .analytic import AnalyticSummary, reproduction_number, summarize
from .degree import Empirical, Poisson
from .kernels import BACKEND
from .masks import MaskEnsemble
from .sim import monte_carlo, run_outbreak

__version__ = "0.1.0"

__all__ = [
    "AnalyticSummary",
    "BACKEND",
    "Empirical",
    "MaskEnsemble",
    "Poisson",
    "analytic",
    "degree",
    "masks",
    "monte_carlo",
    "netgen",
    "reproduction_number",
    "run_outbreak",
    "sim",
    "summarize",
]
