"""Numerical laboratory for Gaussian behavior of short sums of L-function
coefficients: exact remainder oracles, truncated dual sums, variance
prediction, exact diagonal moments, and Monte-Carlo / quadrature statistics.
"""

__version__ = "0.1.0"

from .descriptors import LFunctionDescriptor, builtin_descriptor  # noqa: F401
from .laurent import LaurentSeries, laurent_mul, laurent_pow, main_term_polynomial, zeta_laurent  # noqa: F401
