"""Spectral analysis of non-definite Sturm-Liouville problems.

    -(p y')' + q y = lambda r y  on [a, b],  r of either sign,

with separated boundary conditions.  Eigenvalues are zeros of the entire
characteristic function F(lambda), found by shooting: real ones by
bracketing, non-real ones by the argument principle.
"""
from .coeffmodel import SLProblem, load_problem, simple_problem, validate_problem
from .complexspec import ContourBox, complex_spectrum
from .controls import Controls
from .errors import NumericalError, PreconditionError, ProblemError
from .realspec import real_spectrum

__version__ = "0.1.0"

__all__ = ["SLProblem", "load_problem", "simple_problem", "validate_problem", "ContourBox",
           "complex_spectrum", "Controls", "NumericalError", "PreconditionError", "ProblemError",
           "real_spectrum"]
