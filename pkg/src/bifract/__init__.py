"""Bilinear fractal interpolation, plane IFS rendering, and box dimension."""

from .core import (
    AddressPoint,
    InterpolationProblem,
    SampledFunction,
    is_collinear,
    load_problem_csv,
    sup_distance,
    validate,
    validation_errors,
)
from .operator import (
    FixedPointResult,
    OperatorContext,
    apply_operator,
    eval_at_address,
    fixed_point,
    graph_samples,
    operator_norm_bound,
    refinement_lattice,
)

__version__ = "0.1.0"
