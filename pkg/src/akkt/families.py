"""Built-in problem families and the JSON problem-spec loader.

A spec is a JSON object ``{"name", "family", "params", "solver", "seed"}``.
``load_problem`` fills defaults, builds the :class:`~akkt.problem.Problem`
and rejects it if the derivatives fail a finite-difference check.
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import jsonschema
import numpy as np

from .analytic import PiecewiseAnalytic
from .problem import Problem, discretize_interval, fd_check
from .sets import Box, NonnegCone, Product, WholeSpace, WeightedSpace, Zero

FAMILIES = ("qp-box", "affine-equality", "nonlinear-equality", "l2-box-control", "example35")
DEFAULT_SEED = 42
FD_REJECT = 1e-3

SPEC_SCHEMA = {
    "type": "object",
    "required": ["name", "family"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "family": {"enum": list(FAMILIES)},
        "params": {"type": "object"},
        "solver": {"type": "object"},
        "seed": {"type": "integer"},
    },
}

SOLVER_KEYS = {"rho0", "gamma", "tau", "safeguard_bound", "outer_tol_kkt", "outer_tol_feas",
               "max_outer", "max_inner", "armijo_sigma", "armijo_beta", "step0",
               "inner_tol_floor", "inner_tol_rate", "rho_max"}


class SpecError(ValueError):
    """Malformed or inconsistent problem spec."""


def _vec(v, n, what):
    a = np.asarray(v, dtype=float).reshape(-1) if np.ndim(v) else np.full(n, float(v))
    if a.size != n:
        raise SpecError(f"{what}: expected length {n}, got {a.size}")
    return a


def _mat(v, what):
    a = np.asarray(v, dtype=float)
    if a.ndim != 2:
        raise SpecError(f"{what} must be a nested list (matrix)")
    return a


def _bound(v):
    if isinstance(v, str):
        return float(v)
    if isinstance(v, list):
        return [float(t) if not isinstance(t, str) else float(t) for t in v]
    return float(v)


# -- families ---------------------------------------------------------------


def _qp_box(p):
    if "H" in p:
        H = _mat(p["H"], "H")
        n = H.shape[0]
    else:
        n = int(p.get("n", 2))
        H = np.eye(n)
    if H.shape != (n, n):
        raise SpecError("H must be square")
    c = _vec(p.get("c", 0.0), n, "c")
    lo = _vec(_bound(p.get("lower", -10.0)), n, "lower")
    up = _vec(_bound(p.get("upper", 10.0)), n, "upper")
    if "A" in p:
        A = _mat(p["A"], "A")
        if A.shape[1] != n:
            raise SpecError("A has the wrong number of columns")
    else:
        A = np.zeros((0, n))
    m = A.shape[0]
    b = _vec(p.get("b", 0.0), m, "b")
    cone = p.get("cone", "zero")
    if cone not in ("zero", "nonneg"):
        raise SpecError("cone must be 'zero' or 'nonneg'")
    K = Zero(m) if cone == "zero" else NonnegCone(m)
    Hs = 0.5 * (H + H.T)
    normalized = {"H": H.tolist(), "c": c.tolist(), "lower": _enc(lo), "upper": _enc(up),
                  "A": A.tolist(), "b": b.tolist(), "cone": cone}
    problem = Problem.from_dense(
        "", WeightedSpace.euclidean(n), WeightedSpace.euclidean(m),
        lambda x: float(0.5 * x @ Hs @ x + c @ x),
        lambda x: Hs @ x + c,
        lambda x: A @ x - b,
        lambda x: A,
        Box(lo, up), K)
    return problem, normalized


def _affine_equality(p):
    if "A" not in p:
        raise SpecError("affine-equality needs A")
    A = _mat(p["A"], "A")
    m, n = A.shape
    b = _vec(p.get("b", 0.0), m, "b")
    target = _vec(p.get("target", 0.0), n, "target")
    normalized = {"A": A.tolist(), "b": b.tolist(), "target": target.tolist()}
    problem = Problem.from_dense(
        "", WeightedSpace.euclidean(n), WeightedSpace.euclidean(m),
        lambda x: float(0.5 * np.sum((x - target) ** 2)),
        lambda x: x - target,
        lambda x: A @ x - b,
        lambda x: A,
        WholeSpace(n), Zero(m))
    return problem, normalized


def _nonlinear_equality(p):
    n = int(p.get("n", 3))
    cons = p.get("constraints", [{"Q": (2 * np.eye(n)).tolist(), "a": [0.0] * n, "b": 1.0}])
    Qs, As, bs = [], [], []
    for i, con in enumerate(cons):
        Q = _mat(con.get("Q", np.zeros((n, n)).tolist()), f"constraints[{i}].Q")
        if Q.shape != (n, n):
            raise SpecError(f"constraints[{i}].Q must be {n}x{n}")
        Qs.append(0.5 * (Q + Q.T))
        As.append(_vec(con.get("a", 0.0), n, f"constraints[{i}].a"))
        bs.append(float(con.get("b", 0.0)))
    Q = np.array(Qs).reshape(len(Qs), n, n)
    Amat = np.array(As).reshape(len(As), n)
    bvec = np.array(bs)
    target = _vec(p.get("target", [2.0] + [1.0] * (n - 1)), n, "target")
    lo = _vec(_bound(p.get("lower", "-inf")), n, "lower")
    up = _vec(_bound(p.get("upper", "inf")), n, "upper")
    normalized = {"n": n, "constraints": [{"Q": q.tolist(), "a": a.tolist(), "b": bb}
                                          for q, a, bb in zip(Qs, As, bs)],
                  "target": target.tolist(), "lower": _enc(lo), "upper": _enc(up)}

    def G(x):
        return 0.5 * np.einsum("i,kij,j->k", x, Q, x) + Amat @ x - bvec

    def J(x):
        return np.einsum("kij,j->ki", Q, x) + Amat

    problem = Problem.from_dense(
        "", WeightedSpace.euclidean(n), WeightedSpace.euclidean(len(bs)),
        lambda x: float(0.5 * np.sum((x - target) ** 2)),
        lambda x: x - target,
        G, J, Box(lo, up), Zero(len(bs)))
    return problem, normalized


def _l2_box_control(p):
    n = int(p.get("n", 64))
    grading = float(p.get("grading", 1.0))
    alpha = float(p.get("alpha", 1e-2))
    amplitude = float(p.get("amplitude", 1.0))
    ua = float(p.get("ua", -1.0))
    ub = float(p.get("ub", 1.0))
    if ua > ub:
        raise SpecError("need ua <= ub")
    grid = discretize_interval(n, grading)
    w = grid.weights
    yd = amplitude * np.sin(2 * np.pi * grid.nodes)
    normalized = {"n": n, "grading": grading, "alpha": alpha, "amplitude": amplitude,
                  "ua": ua, "ub": ub}

    # S u (t) = int_0^t u, midpoint-consistent
    def S(u):
        wu = w * u
        return np.cumsum(wu) - 0.5 * wu

    def S_adj(v):
        wv = w * v
        return np.cumsum(wv[::-1])[::-1] - 0.5 * wv

    def f(u):
        r = S(u) - yd
        return float(0.5 * np.dot(w, r * r) + 0.5 * alpha * np.dot(w, u * u))

    def grad(u):
        return S_adj(S(u) - yd) + alpha * u

    problem = Problem(
        "", WeightedSpace(w), WeightedSpace(np.concatenate([w, w])),
        f, grad,
        lambda u: np.concatenate([ub - u, u - ua]),
        lambda u, d: np.concatenate([-d, d]),
        lambda u, lam: lam[n:] - lam[:n],
        WholeSpace(n), Product([NonnegCone(n), NonnegCone(n)]))
    return problem, normalized


def example35_data(n: int, grading: float = 4.0):
    """Grid and cell-averaged q(t) = t^(-1/4) for the discretized fixture."""
    grid = discretize_interval(n, grading)
    q = PiecewiseAnalytic.power(1.0, -0.25).cell_averages(grid.edges)
    return grid, q


def _example35(p):
    n = int(p.get("n", 256))
    grading = float(p.get("grading", 4.0))
    f_alpha = float(p.get("f_alpha", -1.0))
    grid, q = example35_data(n, grading)
    w = grid.weights
    normalized = {"n": n, "grading": grading, "f_alpha": f_alpha}
    space_x = WeightedSpace(np.concatenate([[1.0], w]))
    cgrad = np.zeros(n + 1)
    cgrad[0] = f_alpha

    problem = Problem(
        "", space_x, WeightedSpace(w),
        lambda x: float(f_alpha * x[0]),
        lambda x: cgrad.copy(),
        lambda x: x[0] * q - x[1:],
        lambda x, d: d[0] * q - d[1:],
        lambda x, lam: np.concatenate([[np.dot(w * q, lam)], -lam]),
        Product([WholeSpace(1), Box.uniform(n, -1.0, 1.0)]), Zero(n))
    return problem, normalized


_BUILDERS = {
    "qp-box": _qp_box,
    "affine-equality": _affine_equality,
    "nonlinear-equality": _nonlinear_equality,
    "l2-box-control": _l2_box_control,
    "example35": _example35,
}


def _enc(a):
    return [float(t) if np.isfinite(t) else ("inf" if t > 0 else "-inf") for t in a]


def build(spec: dict, check: bool = True) -> Problem:
    """Validate ``spec`` and return the Problem (with normalized spec attached)."""
    try:
        jsonschema.validate(spec, SPEC_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SpecError(f"schema violation: {exc.message}") from None
    solver = dict(spec.get("solver", {}))
    unknown = set(solver) - SOLVER_KEYS
    if unknown:
        raise SpecError(f"unknown solver keys: {sorted(unknown)}")
    params = copy.deepcopy(spec.get("params", {}))
    x0 = params.pop("x0", None)
    try:
        problem, normalized = _BUILDERS[spec["family"]](params)
    except SpecError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"invalid params for {spec['family']}: {exc}") from None
    if x0 is not None:
        normalized["x0"] = _vec(x0, problem.n, "x0").tolist()
    norm_spec = {"name": spec["name"], "family": spec["family"], "params": normalized,
                 "solver": solver, "seed": int(spec.get("seed", DEFAULT_SEED))}
    problem = Problem(spec["name"], problem.space_x, problem.space_y, problem.objective,
                      problem.gradient, problem.constraint, problem.jvp, problem.vjp,
                      problem.set_c, problem.set_k, norm_spec)
    if check:
        rng = np.random.default_rng(norm_spec["seed"])
        x = problem.set_c.project(rng.standard_normal(problem.n), problem.space_x)
        report = fd_check(problem, x, 1e-6, rng=rng)
        if report.max_error > FD_REJECT:
            raise SpecError(f"derivative check failed (relative error {report.max_error:.3g})")
    return problem


def load_problem(spec) -> Problem:
    """Load from a dict, a JSON string or a path to a JSON file."""
    if isinstance(spec, (str, Path)) and not str(spec).lstrip().startswith("{"):
        try:
            spec = json.loads(Path(spec).read_text())
        except json.JSONDecodeError as exc:
            raise SpecError(f"not valid JSON: {exc}") from None
    elif isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise SpecError(f"not valid JSON: {exc}") from None
    if not isinstance(spec, dict):
        raise SpecError("spec must be a JSON object")
    return build(spec)


def serialize(problem: Problem) -> dict:
    if problem.spec is None:
        raise ValueError("problem was not built from a spec")
    return copy.deepcopy(problem.spec)


def problem_hash(problem: Problem) -> str:
    blob = json.dumps(serialize(problem), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def initial_point(problem: Problem) -> np.ndarray:
    x0 = (problem.spec or {}).get("params", {}).get("x0")
    x = np.zeros(problem.n) if x0 is None else np.asarray(x0, dtype=float)
    return problem.set_c.project(x, problem.space_x)


def qp_2d_spec() -> dict:
    """min 1/2|x|^2 s.t. x1 + x2 = 1, x in [-10, 10]^2."""
    return {"name": "qp2d", "family": "qp-box",
            "params": {"H": [[1.0, 0.0], [0.0, 1.0]], "c": [0.0, 0.0],
                       "lower": -10.0, "upper": 10.0, "A": [[1.0, 1.0]], "b": [1.0]}}


def infeasible_1d_spec() -> dict:
    """G(x) = x in {0}, C = [1, 2], f = 0: no feasible point."""
    return {"name": "infeasible1d", "family": "qp-box",
            "params": {"H": [[0.0]], "c": [0.0], "lower": 1.0, "upper": 2.0,
                       "A": [[1.0]], "b": [0.0]}}


__all__ = ["FAMILIES", "SpecError", "build", "load_problem", "serialize", "problem_hash",
           "initial_point", "example35_data", "qp_2d_spec", "infeasible_1d_spec"]
