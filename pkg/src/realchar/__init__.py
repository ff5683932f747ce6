"""Smoothed mean squares of real quadratic character sums.

Exact Gauss-type sums, sieved character-sum kernels (compiled with a numpy
fallback), smooth windows with their transforms, and the Euler products
that give the predicted main terms.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .arith import SieveTables, build_sieves, factorize, jacobi, kronecker
from .charsum import (
    MeanSquareResult,
    PoissonCheckReport,
    inner_sum,
    mean_square,
    mean_square_oracle,
    poisson_check,
)
from .euler import (
    EulerProductValue,
    Prediction,
    RegionError,
    c2_a_sum,
    constants,
    predict,
    z2_at_half,
    z2_local_factor,
    z3_at_zero,
    z3_local_factor_limit,
)
from .gauss import RadicalValue, gauss_exact, gauss_naive
from .smoothfn import SmoothWindow, h1_tilde_half, make_window, mellin, tilde_transform

__all__ = [
    "BACKEND",
    "EulerProductValue",
    "MeanSquareResult",
    "PoissonCheckReport",
    "Prediction",
    "RadicalValue",
    "RegionError",
    "SieveTables",
    "SmoothWindow",
    "build_sieves",
    "c2_a_sum",
    "constants",
    "factorize",
    "gauss_exact",
    "gauss_naive",
    "h1_tilde_half",
    "inner_sum",
    "jacobi",
    "kronecker",
    "make_window",
    "mean_square",
    "mean_square_oracle",
    "mellin",
    "poisson_check",
    "predict",
    "tilde_transform",
    "z2_at_half",
    "z2_local_factor",
    "z3_at_zero",
    "z3_local_factor_limit",
]
