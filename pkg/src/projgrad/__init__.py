"""Projected gradient methods for constrained convex optimization."""

from .core import IterateRecord, SolverConfig, Vec, as_vector, axpby, dot, norm
from .objectives import LogSumExp, Objective, PNorm, Quadratic, check_gradient
from .sets import (
    Ball,
    Box,
    DykstraError,
    FeasibleSet,
    Halfcut,
    Halfspace,
    Hyperplane,
    InfeasibleCutError,
    Simplex,
    WholeSpace,
    project_intersection,
)
from .solver import (
    AnchoredState,
    MonitorResult,
    ProblemInstance,
    RunReport,
    SolveStatus,
    anchored_solve,
    anchored_step,
    armijo_solve,
    armijo_step,
    classic_solve,
    natural_residual,
    quasi_fejer_epsilon,
)
from .stepsize import (
    ConstantStep,
    LineSearchError,
    LineSearchResult,
    armijo_boundary,
    armijo_feasible_direction,
    constant_step,
    exogenous_step,
)
from .registry import get_instance, list_instances

__version__ = "0.1.0"
