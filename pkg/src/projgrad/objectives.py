"""Convex differentiable objectives with gradient oracles.

All objectives are total on the whole space, so line-search trial points that
fall outside the feasible set are always evaluable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import Vec, as_vector, norm

__all__ = ["PNorm", "Quadratic", "LogSumExp", "Objective", "check_gradient"]


@dataclass(frozen=True, eq=False)
class PNorm:
    """f(x) = (1/p) ||x - shift||^p with p > 1.

    The gradient ||x - shift||^(p-2) (x - shift) is uniformly continuous but
    globally Lipschitz only for p = 2; at x = shift it is defined as zero,
    the continuous extension.
    """

    p: float
    shift: Vec

    def __post_init__(self) -> None:
        if self.p <= 1.0:
            raise ValueError(f"p must exceed 1, got {self.p}")
        object.__setattr__(self, "shift", as_vector(self.shift))

    @property
    def dim(self) -> int:
        return self.shift.shape[0]

    def value(self, x: Vec) -> float:
        self._check(x)
        return float(norm(x - self.shift) ** self.p / self.p)

    def gradient(self, x: Vec) -> Vec:
        self._check(x)
        r = x - self.shift
        dist = norm(r)
        if dist == 0.0:
            return np.zeros_like(x)
        return dist ** (self.p - 2.0) * r

    def _check(self, x: Vec) -> None:
        if x.shape != self.shift.shape:
            raise ValueError(f"point of shape {x.shape} does not match objective dimension {self.dim}")


@dataclass(frozen=True, eq=False)
class Quadratic:
    """f(x) = 0.5 <x, Qx> + <b, x> + c with Q symmetric positive semidefinite."""

    Q: np.ndarray
    b: Vec
    c: float = 0.0

    def __post_init__(self) -> None:
        Q = np.asarray(self.Q, dtype=np.float64)
        b = as_vector(self.b)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] != b.shape[0]:
            raise ValueError(f"Q must be square and match b, got Q {Q.shape}, b {b.shape}")
        if not np.allclose(Q, Q.T, atol=1e-12):
            raise ValueError("Q must be symmetric")
        eigs = np.linalg.eigvalsh(Q)
        if eigs.min() < -1e-10 * max(1.0, abs(eigs.max())):
            raise ValueError(f"Q must be positive semidefinite, smallest eigenvalue {eigs.min()}")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.b.shape[0]

    def value(self, x: Vec) -> float:
        self._check(x)
        return float(0.5 * x @ self.Q @ x + self.b @ x + self.c)

    def gradient(self, x: Vec) -> Vec:
        self._check(x)
        return self.Q @ x + self.b

    def _check(self, x: Vec) -> None:
        if x.shape != self.b.shape:
            raise ValueError(f"point of shape {x.shape} does not match objective dimension {self.dim}")


@dataclass(frozen=True, eq=False)
class LogSumExp:
    """f(x) = log sum_i exp(<a_i, x> + t_i) over the rows a_i of a matrix."""

    rows: np.ndarray
    offsets: Vec

    def __post_init__(self) -> None:
        A = np.asarray(self.rows, dtype=np.float64)
        t = as_vector(self.offsets)
        if A.ndim != 2 or A.shape[0] != t.shape[0]:
            raise ValueError(f"rows {A.shape} must have one offset per row, got {t.shape}")
        object.__setattr__(self, "rows", A)
        object.__setattr__(self, "offsets", t)

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def _scores(self, x: Vec) -> Vec:
        if x.shape != (self.dim,):
            raise ValueError(f"point of shape {x.shape} does not match objective dimension {self.dim}")
        return self.rows @ x + self.offsets

    def value(self, x: Vec) -> float:
        s = self._scores(x)
        m = float(np.max(s))
        return m + float(np.log(np.sum(np.exp(s - m))))

    def gradient(self, x: Vec) -> Vec:
        s = self._scores(x)
        w = np.exp(s - np.max(s))
        w /= np.sum(w)
        return self.rows.T @ w


Objective = Union[PNorm, Quadratic, LogSumExp]


def check_gradient(obj: Objective, x: Vec, h: float) -> float:
    """Max absolute error between the gradient oracle and central differences.

    The central difference along each coordinate has O(h^2) truncation error
    for smooth objectives, so the returned error should shrink quadratically
    with h away from any gradient singularity.
    """
    if h <= 0.0:
        raise ValueError("step h must be positive")
    g = obj.gradient(x)
    worst = 0.0
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        fd = (obj.value(x + e) - obj.value(x - e)) / (2.0 * h)
        worst = max(worst, abs(fd - float(g[i])))
    return worst
