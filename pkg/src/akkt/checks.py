"""Named reproduction checks: expected vs actual with a tolerance and the
anchor phrase each value is tied to."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .certificates import box_split, growth_exponent, m_membership, split_bound_check
from .example35 import build_example35, discrete_problem, discrete_record
from .families import build
from .linalg import Subspace, dist_to_subspace, reduced_min_modulus
from .problem import Problem
from .sets import Ball, WeightedSpace, Zero

SUITES = ("ex35", "box-split", "affine", "gamma", "ball")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    anchor: str
    expected: float
    actual: float
    tol: float
    passed: bool
    note: str = ""

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _close(suite, name, anchor, expected, actual, tol, note=""):
    ok = bool(abs(actual - expected) <= tol)
    return Check(suite, name, anchor, float(expected), float(actual), float(tol), ok, note)


def _flag(suite, name, anchor, expected: bool, actual: bool, note=""):
    return Check(suite, name, anchor, float(expected), float(actual), 0.0,
                 bool(expected) == bool(actual), note)


def ex35_checks(ks=(1, 2, 4, 8, 16), n: int = 4096) -> list[Check]:
    anchor = "λᵏ = ¾k³χ"
    out = []
    for k in ks:
        pair = build_example35(k)
        out.append(_close("ex35", f"norm k={k}", anchor, 0.75 * k, pair.exact_norm, 1e-12))
        out.append(_close("ex35", f"gap k={k}", "= −(4k)^{−1} ≤ 0", -0.25 / k, pair.exact_gap,
                          1e-12))
        out.append(_close("ex35", f"<q,lam> k={k}", "with ⟨q, λᵏ⟩_{L²(0,1)} = 1", 1.0,
                          pair.q_pairing, 1e-12))
        out.append(_close("ex35", f"stationarity k={k}", "= 0", 0.0,
                          abs(pair.stationarity_alpha) + pair.stationarity_u, 1e-12))
    problem = discrete_problem(n)
    recs = []
    for k in (1, 2, 4, 8):
        rec = discrete_record(problem, k)
        recs.append(rec)
        out.append(_close("ex35", f"grid eps k={k}", anchor, 0.0, rec.eps_residual, 1e-8))
        out.append(_close("ex35", f"grid gap k={k}", "= −(4k)^{−1} ≤ 0", -0.25 / k,
                          rec.signed_gap, 0.02 * 0.25 / k))
    expo = growth_exponent([1, 2, 4, 8], [r.multiplier_norm for r in recs])
    out.append(_close("ex35", "grid growth exponent", "{λᵏ} is unbounded in L²(0,1)", 1.0, expo,
                      0.1))
    return out


def box_split_checks(trials: int = 1000, n: int = 50, seed: int = 42) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst = np.inf
    norm_ok = True
    for _ in range(trials):
        u_a, u_b, u, lam_a, lam_b, r = random_split_instance(rng, n)
        rep = split_bound_check(u, u_a, u_b, lam_a, lam_b, r)
        worst = min(worst, rep.slack)
        ta, tb = box_split(lam_a - lam_b)
        lam_norm = np.linalg.norm(lam_a - lam_b)
        norm_ok &= bool(np.linalg.norm(ta) <= lam_norm and np.linalg.norm(tb) <= lam_norm)
    anchor = "λ̃ᵏ_a := min(λᵏ,0)"
    return [Check("box-split", f"min slack over {trials} tuples", anchor, 0.0, worst, 1e-10,
                  bool(worst >= -1e-10)),
            _flag("box-split", "|lam_a|,|lam_b| <= |lam|", "the trivial estimates", True, norm_ok)]


def random_split_instance(rng, n: int):
    """Random (u_a, u_b, u, lam_a, lam_b, r) satisfying the box bound."""
    u_a = rng.standard_normal(n)
    u_b = u_a + rng.exponential(1.0, n)
    u = u_a + rng.uniform(-0.2, 1.2, n) * (u_b - u_a)
    lam_a = -rng.exponential(1.0, n) * (rng.random(n) < 0.7)
    lam_b = -rng.exponential(1.0, n) * (rng.random(n) < 0.7)
    if rng.random() < 0.3:
        # disjoint supports: the given split is already minimal
        lam_b[lam_a < 0] = 0.0
    lhs = -np.dot(lam_b, u_b - u) - np.dot(lam_a, u - u_a)
    # half the tuples are tight so the minimal split has no margin to spare
    r = max(lhs, 0.0) + (rng.exponential(0.5) if rng.random() < 0.5 else 0.0)
    return u_a, u_b, u, lam_a, lam_b, r


def affine_problem(A, b) -> Problem:
    return build({"name": "affine", "family": "affine-equality",
                  "params": {"A": np.asarray(A).tolist(), "b": np.asarray(b).tolist()}},
                 check=False)


def affine_checks(trials: int = 20, seed: int = 42) -> list[Check]:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((4, 7))
    x_star = rng.standard_normal(7)
    problem = affine_problem(A, A @ x_star)
    rng_space = Subspace.span(A.T)
    anchor = "M(x̄,r) = A*Y*"
    agree_in = agree_out = 0
    for _ in range(trials):
        # feasible x: x_star plus a kernel direction
        x = x_star + (np.eye(7) - rng_space.project(np.eye(7))) @ rng.standard_normal(7)
        r = float(rng.exponential(1.0))
        v_in = A.T @ rng.standard_normal(4)
        off = rng.standard_normal(7)
        off -= rng_space.project(off)
        v_out = v_in + off / np.linalg.norm(off)
        wit_in = m_membership(problem, x, r, v_in)
        wit_out = m_membership(problem, x, r, v_out)
        agree_in += wit_in.member == (dist_to_subspace(v_in, rng_space) <= 1e-8)
        agree_out += wit_out.member == (dist_to_subspace(v_out, rng_space) <= 1e-8)
    return [_close("affine", "range members accepted", anchor, trials, agree_in, 0),
            _close("affine", "off-range vectors rejected", anchor, trials, agree_out, 0)]


def gamma_checks() -> list[Check]:
    anchor = "γ(T_0) = 1"
    out = [_close("gamma", "gamma(I)", anchor, 1.0, reduced_min_modulus(np.eye(2)), 1e-12)]
    for eps in (1e-1, 1e-3, 1e-6):
        out.append(_close(
            "gamma", f"gamma(diag(1,{eps:g}))", "γ(T_ε) = ε^{-1}", eps,
            reduced_min_modulus(np.diag([1.0, eps])), 1e-12,
            note="definition gives eps; the printed value eps^-1 is the norm of the inverse"))
    return out


def ball_problem(dim: int) -> Problem:
    """C = unit ball of R^dim, no other constraints (Y = {0})."""
    return Problem("unit-ball", WeightedSpace.euclidean(dim), WeightedSpace(np.ones(0)),
                   lambda x: 0.0, lambda x: np.zeros(dim), lambda x: np.zeros(0),
                   lambda x, d: np.zeros(0), lambda x, lam: np.zeros(dim),
                   Ball(np.zeros(dim), 1.0), Zero(0))


def ball_checks(dim: int = 20) -> list[Check]:
    problem = ball_problem(dim)
    e = np.eye(dim)
    out = []
    worst = 0.0
    for k in range(1, dim - 1):
        xk = (e[0] + e[k]) / np.sqrt(2.0)
        wit = m_membership(problem, xk, 0.0, xk)
        worst = max(worst, wit.residual)
    out.append(Check("ball", "x^k in M(x^k, 0), k <= 18", "xᵏ ∈ N_C(xᵏ)", 0.0, worst, 1e-8,
                     bool(worst <= 1e-8)))
    xbar = e[0] / np.sqrt(2.0)
    wit = m_membership(problem, xbar, 0.0, xbar, tol=1e-6)
    out.append(_flag("ball", "xbar not in M(xbar, 0)", "x̄ ∉ M(x̄,0)", False, wit.member))
    return out


def run_suite(which: str = "all") -> list[Check]:
    table = {"ex35": ex35_checks, "box-split": box_split_checks, "affine": affine_checks,
             "gamma": gamma_checks, "ball": ball_checks}
    if which == "all":
        return [c for name in SUITES for c in table[name]()]
    if which not in table:
        raise ValueError(f"unknown suite {which!r}")
    return table[which]()


