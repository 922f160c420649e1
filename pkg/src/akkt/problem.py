"""Problem instances min f(x) s.t. G(x) in K, x in C over weighted spaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .linalg import weighted_adjoint
from .sets import ConvexSet, WeightedSpace


@dataclass(frozen=True)
class Problem:
    """Smooth problem data.

    ``gradient`` returns the Riesz representative of f'(x) in the weighted
    space X, ``jvp(x, d)`` is G'(x) d and ``vjp(x, lam)`` is the adjoint
    G'(x)* lam with respect to the weighted inner products.
    """

    name: str
    space_x: WeightedSpace
    space_y: WeightedSpace
    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    constraint: Callable[[np.ndarray], np.ndarray]
    jvp: Callable[[np.ndarray, np.ndarray], np.ndarray]
    vjp: Callable[[np.ndarray, np.ndarray], np.ndarray]
    set_c: ConvexSet
    set_k: ConvexSet
    spec: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.set_c.dim != self.space_x.dim:
            raise ValueError("C does not match the dimension of X")
        if self.set_k.dim != self.space_y.dim:
            raise ValueError("K does not match the dimension of Y")

    @property
    def n(self) -> int:
        return self.space_x.dim

    @property
    def m(self) -> int:
        return self.space_y.dim

    def jacobian(self, x) -> np.ndarray:
        """Dense G'(x), one column per jvp with a unit vector."""
        x = np.asarray(x, dtype=float)
        eye = np.eye(self.n)
        cols = [self.jvp(x, eye[:, i]) for i in range(self.n)]
        return np.column_stack(cols) if cols else np.zeros((self.m, 0))

    def feasibility(self, x) -> float:
        return self.set_k.dist(self.constraint(x), self.space_y)

    @classmethod
    def from_dense(cls, name, space_x, space_y, objective, gradient, constraint,
                   jacobian, set_c, set_k, spec=None) -> "Problem":
        """Build from a callable returning the dense Jacobian matrix."""
        wx, wy = space_x.weights, space_y.weights

        def jvp(x, d):
            return jacobian(x) @ d

        def vjp(x, lam):
            return weighted_adjoint(jacobian(x), wx, wy) @ lam

        return cls(name, space_x, space_y, objective, gradient, constraint,
                   jvp, vjp, set_c, set_k, spec)


@dataclass(frozen=True)
class FdReport:
    gradient_error: float
    jacobian_error: float
    adjoint_error: float

    @property
    def max_error(self) -> float:
        return max(self.gradient_error, self.jacobian_error, self.adjoint_error)


def _rel(a, b) -> float:
    a = np.atleast_1d(a)
    b = np.atleast_1d(b)
    if a.size == 0:
        return 0.0
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale


def fd_check(problem: Problem, x, h: float = 1e-5, directions=None, rng=None) -> FdReport:
    """Central-difference check of gradient, Jacobian and adjoint.

    Uses coordinate directions for n <= 64 and 16 random unit directions
    otherwise, unless ``directions`` (columns) is given.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=float)
    n = problem.n
    if directions is None:
        if n <= 64:
            directions = np.eye(n)
        else:
            rng = np.random.default_rng(0) if rng is None else rng
            directions = rng.standard_normal((n, 16))
            directions /= np.linalg.norm(directions, axis=0)
    directions = np.asarray(directions, dtype=float)
    g = problem.gradient(x)
    grad_err = jac_err = 0.0
    for d in directions.T:
        fd = (problem.objective(x + h * d) - problem.objective(x - h * d)) / (2 * h)
        grad_err = max(grad_err, _rel(fd, problem.space_x.inner(g, d)))
        if problem.m:
            fdg = (problem.constraint(x + h * d) - problem.constraint(x - h * d)) / (2 * h)
            jac_err = max(jac_err, _rel(fdg, problem.jvp(x, d)))
    adj_err = 0.0
    if problem.m:
        rng = np.random.default_rng(1) if rng is None else rng
        for _ in range(3):
            d = rng.standard_normal(n)
            lam = rng.standard_normal(problem.m)
            lhs = problem.space_y.inner(problem.jvp(x, d), lam)
            rhs = problem.space_x.inner(d, problem.vjp(x, lam))
            adj_err = max(adj_err, _rel(lhs, rhs))
    return FdReport(grad_err, jac_err, adj_err)


@dataclass(frozen=True)
class GridDiscretization:
    edges: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.nodes.size

    def space(self) -> WeightedSpace:
        return WeightedSpace(self.weights)


def discretize_interval(n: int, grading: float = 1.0) -> GridDiscretization:
    """Midpoint grid on (0,1) with cell boundaries (i/n)**grading.

    grading = 1 is uniform; larger values cluster cells toward t = 0.
    """
    if n < 2 or grading < 1:
        raise ValueError("need n >= 2 and grading >= 1")
    edges = (np.arange(n + 1) / n) ** grading
    edges[-1] = 1.0
    return GridDiscretization(edges, 0.5 * (edges[:-1] + edges[1:]), np.diff(edges))
