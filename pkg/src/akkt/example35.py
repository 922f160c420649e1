"""Minimizer without KKT multipliers on R x L^2(0,1).

Data: K = {0}, C = R x {-1 <= u <= 1}, G(alpha, u) = alpha q - u with
q(t) = t^(-1/4), f = (-1, 0).  The only feasible point is (0, 0), which is
not KKT; the pairs

    alpha_k = 1/k,  u_k = clip(alpha_k q, -1, 1),  lam_k = 3/4 k^3 chi_[0, k^-4]

nevertheless drive both AKKT residuals to zero while |lam_k| = 3k/4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import PiecewiseAnalytic, Segment, exact_inner, exact_norm
from .certificates import AkktRecord, akkt_residuals
from .families import build, example35_data
from .problem import Problem

Q = PiecewiseAnalytic.power(1.0, -0.25)


@dataclass(frozen=True)
class Example35Pair:
    k: int
    alpha: float
    u: PiecewiseAnalytic
    lam: PiecewiseAnalytic
    exact_norm: float
    exact_gap: float
    q_pairing: float
    stationarity_alpha: float
    stationarity_u: float


def build_example35(k: int) -> Example35Pair:
    """Analytic k-th pair with norms and gaps from exact antiderivatives.

    ``exact_gap`` is <lam_k, 0 - G(alpha_k, u_k)>; the stationarity entries
    are the two components of f' + G'* lam_k + mu_k with mu_k = (0, lam_k).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    alpha = 1.0 / k
    cut = float(k) ** -4
    if k == 1:
        u = PiecewiseAnalytic.constant(1.0)
    else:
        u = PiecewiseAnalytic((Segment(0.0, cut, ((1.0, 0.0),)),
                               Segment(cut, 1.0, ((alpha, -0.25),))))
    lam = PiecewiseAnalytic.constant(0.75 * k**3, 0.0, cut)
    minus_g = u - Q.scaled(alpha)
    q_pair = exact_inner(Q, lam)
    mu_u = lam
    # components of f' + G'* lam + mu = (-1 + <q, lam>, -lam + mu_u)
    return Example35Pair(k, alpha, u, lam, exact_norm(lam), exact_inner(lam, minus_g), q_pair,
                         -1.0 + q_pair, exact_norm(mu_u - lam))


def discrete_problem(n: int = 4096, grading: float = 4.0) -> Problem:
    return build({"name": f"example35-n{n}", "family": "example35",
                  "params": {"n": n, "grading": grading}}, check=False)


def discrete_pair(problem: Problem, k: int):
    """Grid version of the k-th pair.

    lam is supported on the cells inside [0, k^-4] and scaled so that the
    discrete pairing <q, lam> equals 1; when k^4 divides the grid this is
    exactly 3/4 k^3 on those cells.
    """
    params = problem.spec["params"]
    n = params["n"]
    grid, q = example35_data(n, params["grading"])
    w = grid.weights
    alpha = 1.0 / k
    u = np.clip(alpha * q, -1.0, 1.0)
    cut = float(k) ** -4
    inside = grid.edges[1:] <= cut * (1.0 + 1e-12)
    if not np.any(inside):
        raise ValueError(f"grid too coarse to resolve [0, {cut:g}]")
    lam = np.where(inside, 1.0, 0.0)
    lam /= float(np.dot(w * q, lam))
    x = np.concatenate([[alpha], u])
    return x, lam


def discrete_record(problem: Problem, k: int) -> AkktRecord:
    x, lam = discrete_pair(problem, k)
    return akkt_residuals(problem, x, lam)
