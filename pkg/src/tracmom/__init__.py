"""Solver for the singular bivariate quartic tracial moment problem.

Decides whether a degree-4 tracial moment sequence admits a representing
measure of pairs of symmetric matrices, constructs minimal atomic measures in
the solved singular cases, and analyzes flat extensions of the moment matrix.
"""

from .linalg import ToleranceConfig, DEFAULT_TOL
from .moments import (
    Atom,
    Measure,
    MomentSequence,
    MomentError,
    build_moment_matrix,
    classify_sequence,
    moments_from_measure,
    reconstruction_error,
)

__all__ = [
    "Atom",
    "Measure",
    "MomentSequence",
    "MomentError",
    "ToleranceConfig",
    "DEFAULT_TOL",
    "build_moment_matrix",
    "classify_sequence",
    "moments_from_measure",
    "reconstruction_error",
    "SolveReport",
    "solve_pipeline",
    "gen_random",
    "verify_measure",
]

__version__ = "0.1.0"

from .pipeline import SolveReport, gen_random, solve_pipeline, verify_measure  # noqa: E402
