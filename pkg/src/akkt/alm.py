"""Safeguarded augmented Lagrangian method.

Outer loop per iteration k:

1. stop if (x^k, lam^k) passes the three-clause KKT test;
2. w^k = projection of lam^k onto the safeguard ball, then approximately
   minimize L_rho(., w^k) over C by projected gradient;
3. lam^{k+1} = rho [G(x) + w/rho - P_K(G(x) + w/rho)];
4. V^{k+1} = |G(x) - P_K(G(x) + w/rho)|; keep rho if k = 0 or
   V^{k+1} <= tau V^k, else multiply it by gamma.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .certificates import (AkktRecord, Certificate, akkt_residuals, bounded_multiplier_diagnostic,
                           infeasibility_stationarity, lagrangian_grad_x)
from .pgm import projected_gradient
from .problem import Problem
from .sets import normal_cone_dist

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlmConfig:
    rho0: float = 10.0
    gamma: float = 10.0
    tau: float = 0.5
    safeguard_bound: float = 1e6
    inner_tol_floor: float = 1e-8
    inner_tol_rate: float = 0.5
    outer_tol_kkt: float = 1e-6
    outer_tol_feas: float = 1e-8
    max_outer: int = 100
    max_inner: int = 20_000
    armijo_sigma: float = 1e-4
    armijo_beta: float = 0.5
    step0: float | None = None
    rho_max: float = 1e12

    def __post_init__(self):
        if self.rho0 <= 0 or self.gamma <= 1 or not 0 < self.tau < 1:
            raise ValueError("need rho0 > 0, gamma > 1, 0 < tau < 1")
        if self.safeguard_bound <= 0:
            raise ValueError("safeguard_bound must be positive")
        if not 0 < self.armijo_sigma < 1 or not 0 < self.armijo_beta < 1:
            raise ValueError("Armijo parameters must lie in (0, 1)")
        if self.inner_tol_floor <= 0 or not 0 < self.inner_tol_rate <= 1:
            raise ValueError("inner tolerance schedule must be positive and nonincreasing")

    def inner_tol(self, k: int) -> float:
        """max(floor, rate**k): positive, nonincreasing, tends to the floor."""
        return max(self.inner_tol_floor, self.inner_tol_rate ** k)

    @classmethod
    def from_dict(cls, d: dict) -> "AlmConfig":
        return cls(**d)


@dataclass
class AlmState:
    k: int
    x: np.ndarray
    lam: np.ndarray
    w: np.ndarray
    rho: float
    v_value: float


@dataclass(frozen=True)
class TraceRow:
    k: int
    record: AkktRecord
    rho: float
    rho_next: float
    w: np.ndarray
    v: float
    inner_tol: float
    inner_iters: int
    inner_residual: float
    inner_converged: bool
    safeguard_active: bool

    def flat(self) -> dict:
        rec = self.record
        return {"k": self.k, "rho": self.rho, "v": self.v,
                "eps_residual": rec.eps_residual, "r_residual": rec.r_residual,
                "feasibility": rec.feasibility, "multiplier_norm": rec.multiplier_norm,
                "inner_iters": self.inner_iters, "safeguard_active": self.safeguard_active}


@dataclass
class AlmTrace:
    rows: list[TraceRow] = field(default_factory=list)
    initial: AkktRecord | None = None
    stop_reason: str = ""
    elapsed: float = 0.0

    @property
    def records(self) -> list[AkktRecord]:
        return [row.record for row in self.rows]


def _shifted(problem: Problem, x, w, rho):
    """G(x) + w/rho and its projection onto K."""
    s = problem.constraint(x) + w / rho
    return s, problem.set_k.project(s, problem.space_y)


def aug_lagrangian_value(problem: Problem, x, w, rho: float) -> float:
    """f(x) + rho/2 d_K(G(x) + w/rho)^2 - |w|^2 / (2 rho)."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    s, ps = _shifted(problem, x, w, rho)
    sy = problem.space_y
    return problem.objective(x) + 0.5 * rho * sy.norm(s - ps) ** 2 - sy.norm(w) ** 2 / (2 * rho)


def aug_lagrangian_grad(problem: Problem, x, w, rho: float) -> np.ndarray:
    if rho <= 0:
        raise ValueError("rho must be positive")
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    g = problem.gradient(x)
    if problem.m:
        s, ps = _shifted(problem, x, w, rho)
        g = g + rho * problem.vjp(x, s - ps)
    return g


def v_measure(problem: Problem, x, lam, rho: float) -> float:
    """|G(x) - P_K(G(x) + lam/rho)|."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    x = np.asarray(x, dtype=float)
    _, ps = _shifted(problem, x, np.asarray(lam, dtype=float), rho)
    return problem.space_y.norm(problem.constraint(x) - ps)


def multiplier_update(problem: Problem, x_new, w, rho: float) -> np.ndarray:
    if rho <= 0:
        raise ValueError("rho must be positive")
    s, ps = _shifted(problem, np.asarray(x_new, dtype=float), np.asarray(w, dtype=float), rho)
    return rho * (s - ps)


def penalty_update(v_new: float, v_old: float | None, rho: float, gamma: float,
                   tau: float, k: int) -> float:
    """Keep rho at k = 0 or when V^{k+1} <= tau V^k; otherwise multiply by gamma."""
    if k == 0 or (v_old is not None and v_new <= tau * v_old):
        return rho
    return gamma * rho


def safeguard(lam, bound: float, space=None) -> np.ndarray:
    """Radial projection of lam onto the (weighted) ball of radius ``bound``."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    lam = np.asarray(lam, dtype=float)
    w = np.ones_like(lam) if space is None else space.weights
    n = float(np.sqrt(np.dot(w * lam, lam)))
    if n <= bound:
        return lam.copy()
    return lam * (bound / n)


def inner_solve(problem: Problem, w, rho: float, x_start, tol_inner: float, max_inner: int,
                config: AlmConfig | None = None):
    """Projected gradient on L_rho(., w) over C.

    Stops when dist(-grad L_rho(x, w), N_C(x)) <= tol_inner and returns
    ``(x, residual, iterations, converged)``.
    """
    if tol_inner <= 0:
        raise ValueError("tol_inner must be positive")
    cfg = config or AlmConfig()
    w = np.asarray(w, dtype=float)
    sx = problem.space_x
    res = projected_gradient(
        lambda x: aug_lagrangian_value(problem, x, w, rho),
        lambda x: aug_lagrangian_grad(problem, x, w, rho),
        lambda x: problem.set_c.project(x, sx),
        lambda x, g: normal_cone_dist(problem.set_c, x, g, sx),
        x_start, tol_inner, max_inner, sx.weights,
        sigma=cfg.armijo_sigma, beta=cfg.armijo_beta, step0=cfg.step0)
    if not res.converged:
        log.info("inner solve stopped: %s (residual %.3g)", res.message, res.residual)
    return res.x, res.residual, res.iterations, res.converged


def _classify(problem: Problem, trace: AlmTrace, cfg: AlmConfig) -> tuple[str, dict]:
    rec = trace.rows[-1].record if trace.rows else trace.initial
    summary: dict = {"outer_iterations": len(trace.rows), "stop_reason": trace.stop_reason}
    if len(trace.rows) >= 3:
        diag = bounded_multiplier_diagnostic(trace.records)
        summary.update(multiplier_growth_exponent=diag.growth_exponent,
                       multiplier_sup=diag.sup_norm, bounded_trend=diag.bounded_trend)
        summary.update(_decay_rates(trace))
    if (rec.eps_residual <= cfg.outer_tol_kkt and rec.r_residual <= cfg.outer_tol_kkt
            and rec.feasibility <= cfg.outer_tol_feas):
        return Certificate.KKT, summary
    stat = infeasibility_stationarity(problem, rec.x)
    summary["infeasibility_stationarity"] = stat
    if rec.feasibility > np.sqrt(cfg.outer_tol_feas) and stat <= cfg.outer_tol_kkt * max(
            1.0, rec.feasibility):
        return Certificate.INFEASIBLE, summary
    if len(trace.rows) >= 3:
        peak_feas = max(r.record.feasibility for r in trace.rows)
        peak_r = max(r.record.r_residual for r in trace.rows)
        tail = trace.rows[-1]
        shrinking = (rec.feasibility <= 0.1 * peak_feas
                     and rec.r_residual <= max(0.1 * peak_r, cfg.outer_tol_kkt)
                     and tail.inner_converged)
        if shrinking and not summary["bounded_trend"]:
            return Certificate.AKKT, summary
    return Certificate.INCONCLUSIVE, summary


def _decay_rates(trace: AlmTrace) -> dict:
    """Geometric-mean per-iteration factors of the residual sequences."""
    out = {}
    for key in ("eps_residual", "r_residual", "feasibility"):
        vals = np.array([getattr(r.record, key) for r in trace.rows], dtype=float)
        vals = vals[np.isfinite(vals) & (vals > 0)]
        if vals.size >= 2:
            out[f"{key}_rate"] = float(np.exp(np.mean(np.diff(np.log(vals)))))
    return out


def alm_solve(problem: Problem, config: AlmConfig | None = None, x0=None, lam0=None):
    """Run the safeguarded ALM; returns ``(Certificate, AlmTrace)``."""
    cfg = config or AlmConfig()
    sx, sy = problem.space_x, problem.space_y
    x = np.zeros(problem.n) if x0 is None else np.asarray(x0, dtype=float)
    x = problem.set_c.project(x, sx)
    lam = np.zeros(problem.m) if lam0 is None else np.asarray(lam0, dtype=float)
    state = AlmState(0, x, lam, lam.copy(), cfg.rho0, float("nan"))
    trace = AlmTrace(initial=akkt_residuals(problem, x, lam))
    t0 = time.perf_counter()
    v_old = None
    rec = trace.initial
    while True:
        if (rec.eps_residual <= cfg.outer_tol_kkt and rec.r_residual <= cfg.outer_tol_kkt
                and rec.feasibility <= cfg.outer_tol_feas):
            trace.stop_reason = "kkt"
            break
        if state.k >= cfg.max_outer:
            trace.stop_reason = "max_outer"
            break
        if state.rho > cfg.rho_max:
            trace.stop_reason = "rho_max"
            break
        k = state.k
        w = safeguard(state.lam, cfg.safeguard_bound, sy)
        tol_k = cfg.inner_tol(k)
        x_new, inner_res, inner_it, inner_ok = inner_solve(
            problem, w, state.rho, state.x, tol_k, cfg.max_inner, cfg)
        lam_new = multiplier_update(problem, x_new, w, state.rho)
        v_new = v_measure(problem, x_new, w, state.rho)
        rho_next = penalty_update(v_new, v_old, state.rho, cfg.gamma, cfg.tau, k)
        rec = akkt_residuals(problem, x_new, lam_new)
        trace.rows.append(TraceRow(k + 1, rec, state.rho, rho_next, w, v_new, tol_k, inner_it,
                                   inner_res, inner_ok, bool(np.any(w != state.lam))))
        log.debug("k=%d rho=%.3g V=%.3g eps=%.3g r=%.3g feas=%.3g |lam|=%.3g", k + 1, state.rho,
                  v_new, rec.eps_residual, rec.r_residual, rec.feasibility, rec.multiplier_norm)
        v_old = v_new
        state = AlmState(k + 1, x_new, lam_new, w, rho_next, v_new)
    trace.elapsed = time.perf_counter() - t0
    verdict, summary = _classify(problem, trace, cfg)
    return Certificate(verdict, rec, summary), trace


def gradient_identity_error(problem: Problem, row: TraceRow) -> float:
    """|grad L_rho(x, w) - L'_x(x, lam)| for a trace row (should be ~0)."""
    a = aug_lagrangian_grad(problem, row.record.x, row.w, row.rho)
    b = lagrangian_grad_x(problem, row.record.x, row.record.lam)
    return float(np.max(np.abs(a - b), initial=0.0))


def config_dict(cfg: AlmConfig) -> dict:
    return asdict(cfg)
