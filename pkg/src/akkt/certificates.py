"""AKKT residuals, KKT tests, M(x, r) membership and multiplier diagnostics.

For a primal-dual pair (x, lam) the two AKKT residuals are

* ``eps_residual``: the smallest |eps| with eps - L'_x(x, lam) in N_C(x),
  i.e. the distance of -L'_x(x, lam) to the normal cone of C at x;
* ``r_residual``: sup_{y in K} <lam, y - G(x)>, clamped below at zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .linalg import reduced_min_modulus, weighted_operator_norm
from .pgm import projected_gradient
from .problem import Problem
from .sets import (FEAS_TOL, INF, Ball, ConvexSet, Product, WholeSpace, Zero, dykstra,
                   halfspace_projector, normal_cone_dist)

log = logging.getLogger(__name__)

MEMBERSHIP_TOL = 1e-7
DYKSTRA_CAP = 10_000


@dataclass(frozen=True)
class AkktRecord:
    x: np.ndarray
    lam: np.ndarray
    eps_residual: float
    r_residual: float
    signed_gap: float
    feasibility: float
    multiplier_norm: float

    def summary(self) -> dict:
        return {"eps_residual": self.eps_residual, "r_residual": self.r_residual,
                "signed_gap": self.signed_gap, "feasibility": self.feasibility,
                "multiplier_norm": self.multiplier_norm}


def lagrangian_grad_x(problem: Problem, x, lam) -> np.ndarray:
    """f'(x) + G'(x)* lam (Riesz representative in X)."""
    x = np.asarray(x, dtype=float)
    g = problem.gradient(x)
    if problem.m:
        g = g + problem.vjp(x, np.asarray(lam, dtype=float))
    return g


def akkt_residuals(problem: Problem, x, lam, feas_tol: float = FEAS_TOL) -> AkktRecord:
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    gx = problem.constraint(x)
    wy = problem.space_y.weights
    eps = normal_cone_dist(problem.set_c, x, lagrangian_grad_x(problem, x, lam),
                           problem.space_x, feas_tol)
    if eps == INF:
        log.warning("%s: iterate is not in C; eps residual set to inf", problem.name)
    gap = problem.set_k.support_gap(lam, gx, wy)
    return AkktRecord(x, lam, eps, max(0.0, gap), gap, problem.set_k.dist(gx, wy),
                      problem.space_y.norm(lam))


def is_kkt(problem: Problem, x, lam, tol: float = 1e-8) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    rec = akkt_residuals(problem, x, lam)
    return rec.eps_residual <= tol and rec.r_residual <= tol and rec.feasibility <= tol


# -- M(x, r) membership ------------------------------------------------------


@dataclass(frozen=True)
class MembershipWitness:
    member: bool
    lam: np.ndarray
    mu: np.ndarray
    residual: float
    converged: bool = True
    iterations: int = 0

    @property
    def inconclusive(self) -> bool:
        return not self.member and not self.converged


def _split_constraints(set_k: ConvexSet, z: np.ndarray):
    """Sign pattern and halfspace normal for lam = lam_a - lam_b.

    With lam_a <= 0 (zero where the lower bound is -inf) and lam_b <= 0
    (zero where the upper bound is +inf), sup_{y in K} <lam, y - z> is at most
    <lam_a, lo - z> - <lam_b, up - z>, with equality for the minimal split.
    """
    if isinstance(set_k, Ball) or (isinstance(set_k, Product)
                                   and any(isinstance(s, Ball) for s in set_k.sets)):
        raise NotImplementedError("M-set membership needs K built from boxes and cones")
    lo, up = set_k.bounds()
    free_a = np.isfinite(lo)
    free_b = np.isfinite(up)
    c_a = np.where(free_a, np.where(free_a, lo, 0.0) - z, 0.0)
    c_b = np.where(free_b, z - np.where(free_b, up, 0.0), 0.0)
    return free_a, free_b, c_a, c_b


def m_membership(problem: Problem, x, r: float, v, tol: float = MEMBERSHIP_TOL,
                 max_iter: int = 20_000) -> MembershipWitness:
    """Decide v in M(x, r) = {G'(x)* lam + mu : mu in N_C(x), sup_K <lam, y - G(x)> <= r}.

    Minimizes 1/2 |G'(x)* lam + mu - v|^2 by accelerated projected gradient
    over the split variables (lam_a, lam_b, mu); the projection onto the
    sign constraints intersected with the gap halfspace is computed by
    cyclic Dykstra.  ``member`` is ``sqrt(2 phi) <= tol``.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    wx = problem.space_x.weights
    wy = problem.space_y.weights
    n, m = problem.n, problem.m
    if problem.set_c.dist(x, wx) > FEAS_TOL:
        # M(x, r) is empty outside C
        return MembershipWitness(False, np.zeros(m), np.zeros(n), INF, True, 0)
    x = problem.set_c.project(x, wx)
    z = problem.constraint(x)
    free_a, free_b, c_a, c_b = _split_constraints(problem.set_k, z)
    wp = np.concatenate([wy, wy])
    sign_lo = np.full(2 * m, -INF)
    sign_hi = np.zeros(2 * m)
    sign_lo[np.concatenate([~free_a, ~free_b])] = 0.0
    half = halfspace_projector(np.concatenate([c_a, c_b]), float(r), wp)

    def proj_p(p):
        if m == 0:
            return p
        out, _, _ = dykstra([lambda q: np.clip(q, sign_lo, sign_hi), half], p,
                            max_iter=DYKSTRA_CAP)
        # Dykstra stops at a tolerance; finish on the sign set so lam_a, lam_b <= 0 hold exactly
        return np.clip(out, sign_lo, sign_hi)

    def proj_mu(mu):
        return problem.set_c.normal_cone_project(x, mu, wx)

    def adj(lam):
        return problem.vjp(x, lam) if m else np.zeros(n)

    def fwd(d):
        return problem.jvp(x, d) if m else np.zeros(0)

    if m:
        jnorm = weighted_operator_norm(problem.jacobian(x), wx, wy)
    else:
        jnorm = 0.0
    step = 1.0 / (2.0 * jnorm**2 + 1.0)

    def residual_vec(p, mu):
        return adj(p[:m] - p[m:]) + mu - v

    def phi(p, mu):
        res = residual_vec(p, mu)
        return 0.5 * float(np.dot(wx * res, res))

    p = np.zeros(2 * m)
    mu = proj_mu(v)
    yp, ymu = p.copy(), mu.copy()
    t = 1.0
    f_cur = phi(p, mu)
    target = 0.5 * (1e-3 * tol) ** 2
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        res = residual_vec(yp, ymu)
        glam = fwd(res)
        p_new = proj_p(yp - step * np.concatenate([glam, -glam]))
        mu_new = proj_mu(ymu - step * res)
        f_new = phi(p_new, mu_new)
        if f_new > f_cur and t > 1.0:
            # adaptive restart
            yp, ymu, t = p.copy(), mu.copy(), 1.0
            continue
        delta = max(float(np.max(np.abs(p_new - p), initial=0.0)),
                    float(np.max(np.abs(mu_new - mu), initial=0.0)))
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        mom = (t - 1.0) / t_new
        yp = p_new + mom * (p_new - p)
        ymu = mu_new + mom * (mu_new - mu)
        p, mu, t, f_cur = p_new, mu_new, t_new, f_new
        scale = 1.0 + max(float(np.max(np.abs(p), initial=0.0)),
                          float(np.max(np.abs(mu), initial=0.0)))
        if f_cur <= target or delta <= 1e-15 * scale:
            converged = True
            break
    lam = p[:m] - p[m:]
    resid = float(np.sqrt(2.0 * phi(p, mu)))
    member = resid <= tol
    return MembershipWitness(member, lam, mu, resid, converged or member, it)


# -- AKKT sequence from the quadratic penalty --------------------------------


@dataclass(frozen=True)
class PenaltyRecord:
    k: int
    record: AkktRecord
    inner_residual: float
    inner_iterations: int
    inner_converged: bool


def quadratic_penalty_generator(problem: Problem, xbar, k_max: int,
                                inner_tol_schedule: Callable[[int], float] | None = None,
                                radius: float = 1.0, inner_tol: float = 1e-10,
                                max_inner: int = 20_000) -> list[PenaltyRecord]:
    """Minimize f(x) + |x - xbar|^2 + k d_K(G(x))^2 over B_radius(xbar) & C
    for k = 1..k_max and attach lam^k = 2k (G(x^k) - P_K(G(x^k))).

    ``inner_tol_schedule`` (default 1/k) is only checked against, never
    enforced: the resulting eps residuals should fall below it.  The
    sequence is truncated at the first inner failure.
    """
    xbar = np.asarray(xbar, dtype=float)
    wx = problem.space_x.weights
    wy = problem.space_y.weights
    sx = problem.space_x
    if problem.feasibility(xbar) > FEAS_TOL or problem.set_c.dist(xbar, wx) > FEAS_TOL:
        raise ValueError("xbar must be feasible")
    schedule = inner_tol_schedule or (lambda k: 1.0 / k)
    ball = Ball(xbar, radius)

    def project(y):
        if problem.set_c.contains(y, wx, 0.0) and ball.contains(y, wx, 0.0):
            return y
        out, _, _ = dykstra([lambda q: problem.set_c.project(q, wx),
                             lambda q: ball.project(q, wx)], y, max_iter=DYKSTRA_CAP)
        return problem.set_c.project(out, wx)

    records: list[PenaltyRecord] = []
    x = xbar.copy()
    for k in range(1, k_max + 1):
        def fun(y, k=k):
            gy = problem.constraint(y)
            d = problem.set_k.dist(gy, wy)
            return problem.objective(y) + sx.norm(y - xbar) ** 2 + k * d * d

        def grad(y, k=k):
            gy = problem.constraint(y)
            out = problem.gradient(y) + 2.0 * (y - xbar)
            if problem.m:
                out = out + problem.vjp(y, 2.0 * k * (gy - problem.set_k.project(gy, wy)))
            return out

        def stat(y, g):
            return sx.norm(y - project(y - g))

        res = projected_gradient(fun, grad, project, stat, x, inner_tol, max_inner, wx)
        x = res.x
        gx = problem.constraint(x)
        d = problem.set_k.dist(gx, wy)
        lam = 2.0 * k * (gx - problem.set_k.project(gx, wy)) if d > 0 else np.zeros(problem.m)
        rec = akkt_residuals(problem, x, lam)
        records.append(PenaltyRecord(k, rec, res.residual, res.iterations, res.converged))
        if not res.converged:
            log.warning("penalty subproblem %d did not converge (%s)", k, res.message)
            break
        if rec.eps_residual > schedule(k):
            log.info("k=%d: eps residual %.3g above schedule %.3g", k, rec.eps_residual,
                     schedule(k))
    return records


# -- box multipliers -----------------------------------------------------------


def box_split(lam):
    """Minimal nonpositive splitting lam = lam_a - lam_b with lam_a, lam_b <= 0."""
    lam = np.asarray(lam, dtype=float)
    return np.minimum(lam, 0.0), -np.maximum(lam, 0.0)


@dataclass(frozen=True)
class SplitBoundReport:
    given: float
    minimal: float
    r: float

    @property
    def slack(self) -> float:
        return self.r - self.minimal

    @property
    def holds(self) -> bool:
        return self.minimal <= self.r + 1e-10


def split_bound_check(u, u_a, u_b, lam_a, lam_b, r: float, weights=None,
                      tol: float = 1e-10) -> SplitBoundReport:
    """Check that the minimal split of lam_a - lam_b keeps the bound
    -<lam_b, u_b - u> - <lam_a, u - u_a> <= r."""
    u, u_a, u_b, lam_a, lam_b = (np.asarray(a, dtype=float) for a in (u, u_a, u_b, lam_a, lam_b))
    w = np.ones_like(u) if weights is None else np.asarray(weights, dtype=float)
    if np.any(u_a > u_b) or np.any(lam_a > 0) or np.any(lam_b > 0):
        raise ValueError("need u_a <= u_b and lam_a, lam_b <= 0")

    def lhs(la, lb):
        return -float(np.dot(w * lb, u_b - u)) - float(np.dot(w * la, u - u_a))

    given = lhs(lam_a, lam_b)
    if given > r + tol:
        raise ValueError(f"input violates the bound ({given} > {r})")
    ta, tb = box_split(lam_a - lam_b)
    return SplitBoundReport(given, lhs(ta, tb), float(r))


# -- diagnostics -------------------------------------------------------------


@dataclass(frozen=True)
class MultiplierDiagnostic:
    sup_norm: float
    growth_exponent: float
    bounded_trend: bool
    bound_ratios: list[float] = field(default_factory=list)


def growth_exponent(ks, norms) -> float:
    """Least-squares slope of log|lam^k| against log k (zero norms skipped)."""
    ks = np.asarray(ks, dtype=float)
    norms = np.asarray(norms, dtype=float)
    keep = (norms > 0) & (ks > 0)
    if np.count_nonzero(keep) < 2:
        return 0.0
    lk = np.log(ks[keep])
    if np.ptp(lk) == 0:
        return 0.0
    return float(np.polyfit(lk, np.log(norms[keep]), 1)[0])


def bounded_multiplier_diagnostic(records: Sequence[AkktRecord], ks=None, problem=None,
                                  xbar=None) -> MultiplierDiagnostic:
    """Sup of |lam^k|, growth exponent against k, and for K = {0}, C = X the
    monitoring ratio |lam^k| gamma(G'(xbar)) / (|v^k| (1 + |xbar - x^k|) + r^k)
    with v^k = G'(x^k)* lam^k."""
    if len(records) < 3:
        raise ValueError("need at least 3 records")
    ks = np.arange(1, len(records) + 1) if ks is None else np.asarray(ks)
    norms = [rec.multiplier_norm for rec in records]
    expo = growth_exponent(ks, norms)
    ratios = []
    if problem is not None and xbar is not None:
        if isinstance(problem.set_k, Zero) and isinstance(problem.set_c, WholeSpace):
            wx, wy = problem.space_x.weights, problem.space_y.weights
            jac = problem.jacobian(xbar)
            scaled = np.sqrt(wy)[:, None] * jac / np.sqrt(wx)[None, :]
            gamma = reduced_min_modulus(scaled)
            for rec in records:
                vk = problem.vjp(rec.x, rec.lam)
                denom = (problem.space_x.norm(vk) * (1 + problem.space_x.norm(xbar - rec.x))
                         + rec.r_residual)
                ratios.append(rec.multiplier_norm * gamma / denom if denom > 0 else INF)
    return MultiplierDiagnostic(float(max(norms)), expo, expo <= 0.1, ratios)


@dataclass(frozen=True)
class Certificate:
    verdict: str
    final_record: AkktRecord
    history_summary: dict

    KKT = "KKT"
    AKKT = "AKKT-trending"
    INFEASIBLE = "infeasible-stationary"
    INCONCLUSIVE = "inconclusive"


def infeasibility_stationarity(problem: Problem, x) -> float:
    """Stationarity of 1/2 d_K(G(.))^2 over C at x."""
    gx = problem.constraint(x)
    wy = problem.space_y.weights
    g = problem.vjp(x, gx - problem.set_k.project(gx, wy)) if problem.m else np.zeros(problem.n)
    return normal_cone_dist(problem.set_c, x, g, problem.space_x)
