"""Stepsize strategies: constant, two Armijo backtracking searches, exogenous.

The feasible-direction search backtracks along the segment from the current
iterate to the projected gradient point and needs a single projection per
outer iteration (done by the caller).  The boundary search backtracks the
pre-projection stepsize instead and pays one projection per inner trial.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Vec, dot, norm
from .objectives import Objective
from .sets import FeasibleSet

__all__ = [
    "LineSearchResult",
    "LineSearchError",
    "armijo_feasible_direction",
    "armijo_boundary",
    "ConstantStep",
    "constant_step",
    "exogenous_step",
]


class LineSearchError(RuntimeError):
    """Backtracking exhausted its trial budget.

    For convex objectives with a correct gradient oracle the search accepts
    after finitely many trials, so hitting the budget signals a broken oracle
    or violated convexity rather than a slow search.
    """

    def __init__(self, message: str, trials: int):
        super().__init__(message)
        self.trials = trials


@dataclass
class LineSearchResult:
    """Accepted trial of a backtracking search.

    alpha is the accepted convex-combination weight (feasible-direction
    search), beta the accepted pre-projection stepsize (boundary search);
    whichever the strategy does not control is left at its fixed value.
    """

    alpha: float
    beta: Optional[float]
    trials: int
    trial_point: Vec
    f_trial: float


def armijo_feasible_direction(
    obj: Objective,
    xk: Vec,
    wk: Vec,
    theta: float,
    delta: float,
    max_inner: int,
    f_k: Optional[float] = None,
    grad_k: Optional[Vec] = None,
) -> LineSearchResult:
    """Backtrack along the segment from xk to the projected point wk.

    Accepts the smallest j with

        f(theta^j * wk + (1 - theta^j) * xk) <= f(xk) - delta * theta^j * d,

    where d = <grad f(xk), xk - wk> must be positive (it is whenever wk is
    the projection of a gradient step from a non-stationary xk).  The
    comparison is an exact float <=; no slack is added.
    """
    fk = obj.value(xk) if f_k is None else f_k
    gk = obj.gradient(xk) if grad_k is None else grad_k
    d = dot(gk, xk - wk)
    if d <= 0.0:
        raise ValueError(f"feasible-direction search needs a descent gap, got <g, x-w> = {d}")
    step = 1.0
    for j in range(max_inner + 1):
        trial = step * wk + (1.0 - step) * xk
        f_trial = obj.value(trial)
        if f_trial <= fk - delta * step * d:
            return LineSearchResult(alpha=step, beta=None, trials=j, trial_point=trial, f_trial=f_trial)
        step *= theta
    raise LineSearchError(
        f"feasible-direction search found no acceptable step within {max_inner} trials", trials=max_inner
    )


def armijo_boundary(
    obj: Objective,
    set_: FeasibleSet,
    xk: Vec,
    beta_bar: float,
    theta: float,
    delta: float,
    max_inner: int,
) -> LineSearchResult:
    """Backtrack the pre-projection stepsize, projecting every trial.

    Accepts the smallest l with

        f(P_C(xk - beta_bar * theta^l * g)) <= f(xk) - delta * <g, xk - P_C(...)>,

    performing exactly l+1 projections.  At a stationary feasible point the
    first trial projects back to xk and is accepted with equality.
    """
    fk = obj.value(xk)
    gk = obj.gradient(xk)
    beta = beta_bar
    for ell in range(max_inner + 1):
        w = set_.project(xk - beta * gk)
        f_w = obj.value(w)
        if f_w <= fk - delta * dot(gk, xk - w):
            return LineSearchResult(alpha=1.0, beta=beta, trials=ell, trial_point=w, f_trial=f_w)
        beta *= theta
    raise LineSearchError(
        f"boundary search found no acceptable step within {max_inner} trials", trials=max_inner
    )


@dataclass(frozen=True)
class ConstantStep:
    """Constant stepsize rule: beta at every iteration, full steps (alpha = 1).

    Convergence of the constant-stepsize method requires beta < 2/L where L
    is a Lipschitz constant of the gradient; the rule itself does not check
    this since L is typically unknown.
    """

    beta: float
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.beta <= 0.0:
            raise ValueError(f"constant stepsize must be positive, got {self.beta}")

    def __call__(self, k: int) -> float:
        return self.beta


def constant_step(beta: float) -> ConstantStep:
    """Build the constant-stepsize rule."""
    return ConstantStep(beta)


def exogenous_step(grad_norm: float, k: int, c: float) -> float:
    """Exogenous stepsize (c/(k+1)) / grad_norm.

    The schedule c/(k+1) is divergent in sum and square-summable, and the
    induced step satisfies ||x_{k+1} - x_k|| <= c/(k+1).  A zero gradient
    norm is rejected: the caller must treat that iterate as stationary.
    """
    if grad_norm <= 0.0:
        raise ValueError("exogenous stepsize needs a positive gradient norm; stop at stationary points")
    if c <= 0.0:
        raise ValueError("exogenous constant must be positive")
    return (c / (k + 1)) / grad_norm
