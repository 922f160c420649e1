"""Closed convex sets over diagonally weighted coordinate spaces.

Every dual object (multiplier, normal vector) is represented in the same
coordinates as the primal space, i.e. through the Riesz map of the weighted
inner product ``<u, v> = sum_i w_i u_i v_i``.  Because the weights are
diagonal, boxes are still projected by clipping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

INF = float("inf")
FEAS_TOL = 1e-8
# relative slack used to decide that a point sits on a ball's sphere
BALL_ACTIVE_RTOL = 1e-12


class UnsupportedSetError(TypeError):
    """Operation not available for this set variant."""


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedSpace:
    """R^dim with inner product sum_i w_i u_i v_i (discretized L^2)."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be a 1-D array of positive finite numbers")
        object.__setattr__(self, "weights", w)

    @classmethod
    def euclidean(cls, dim: int) -> "WeightedSpace":
        return cls(np.ones(dim))

    @property
    def dim(self) -> int:
        return self.weights.size

    def inner(self, u, v) -> float:
        return float(np.dot(self.weights * u, v))

    def norm(self, u) -> float:
        return float(np.sqrt(max(self.inner(u, u), 0.0)))

    def sub(self, start: int, stop: int) -> "WeightedSpace":
        return WeightedSpace(self.weights[start:stop])


def _weights_of(space, dim):
    if space is None:
        return np.ones(dim)
    w = space.weights if isinstance(space, WeightedSpace) else np.asarray(space, float)
    if w.size != dim:
        raise DimensionError(f"set has dimension {dim}, space has {w.size}")
    return w


def _wnorm(w, u) -> float:
    return float(np.sqrt(np.dot(w * u, u)))


class ConvexSet:
    """Base class; subclasses implement the ``_``-prefixed hooks with
    weights already resolved to an array."""

    dim: int

    @property
    def is_cone(self) -> bool:
        return False

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionError(f"expected vector of length {self.dim}, got {x.shape}")
        return x

    # hooks -----------------------------------------------------------
    def _project(self, x, w):
        raise NotImplementedError

    def _support(self, lam, w) -> float:
        """sup_{y in S} <lam, y>."""
        raise NotImplementedError

    def _normal_project(self, x, v, w):
        """Projection of v onto N_S(x); x assumed in S."""
        raise NotImplementedError

    def _recession_project(self, d, w):
        raise NotImplementedError

    # public ------------------------------------------------------------
    def project(self, x, space=None) -> np.ndarray:
        x = self._check(x)
        return self._project(x, _weights_of(space, self.dim))

    def dist(self, x, space=None) -> float:
        x = self._check(x)
        w = _weights_of(space, self.dim)
        return _wnorm(w, x - self._project(x, w))

    def contains(self, x, space=None, tol: float = FEAS_TOL) -> bool:
        return self.dist(x, space) <= tol

    def support_gap(self, lam, z, space=None) -> float:
        lam = self._check(lam)
        z = self._check(z)
        w = _weights_of(space, self.dim)
        s = self._support(lam, w)
        if s == INF:
            return INF
        return s - float(np.dot(w * lam, z))

    def normal_cone_project(self, x, v, space=None) -> np.ndarray:
        x = self._check(x)
        v = self._check(v)
        return self._normal_project(x, v, _weights_of(space, self.dim))

    def tangent_cone_project(self, x, d, space=None) -> np.ndarray:
        # Moreau decomposition: T_S(x) is the polar of N_S(x)
        d = self._check(d)
        return d - self.normal_cone_project(x, d, space)

    def recession_project(self, d, space=None) -> np.ndarray:
        d = self._check(d)
        return self._recession_project(d, _weights_of(space, self.dim))

    def polar_project(self, x, space=None) -> np.ndarray:
        if not self.is_cone:
            raise UnsupportedSetError(f"{type(self).__name__} is not a cone")
        x = self._check(x)
        return x - self._project(x, _weights_of(space, self.dim))

    def bounds(self):
        """Coordinatewise (lower, upper) if the set is a (possibly degenerate) box."""
        raise UnsupportedSetError(f"{type(self).__name__} is not a box")

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        up = np.atleast_1d(np.asarray(self.upper, dtype=float))
        lo, up = np.broadcast_arrays(lo, up)
        if np.any(np.isnan(lo)) or np.any(np.isnan(up)):
            raise ValueError("NaN bound")
        if np.any(lo > up) or np.any(lo == INF) or np.any(up == -INF):
            raise ValueError("box is empty")
        object.__setattr__(self, "lower", lo.copy())
        object.__setattr__(self, "upper", up.copy())

    @classmethod
    def uniform(cls, dim: int, lower: float, upper: float) -> "Box":
        return cls(np.full(dim, float(lower)), np.full(dim, float(upper)))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def is_cone(self) -> bool:
        finite = np.concatenate([self.lower[np.isfinite(self.lower)],
                                 self.upper[np.isfinite(self.upper)]])
        return bool(np.all(finite == 0.0))

    def bounds(self):
        return self.lower, self.upper

    def _project(self, x, w):
        return np.clip(x, self.lower, self.upper)

    def _support(self, lam, w):
        pos = lam > 0
        neg = lam < 0
        if np.any(pos & (self.upper == INF)) or np.any(neg & (self.lower == -INF)):
            return INF
        val = np.where(pos, lam * np.where(pos, self.upper, 0.0), 0.0)
        val = val + np.where(neg, lam * np.where(neg, self.lower, 0.0), 0.0)
        return float(np.dot(w, val))

    def _normal_project(self, x, v, w):
        at_lo = x <= self.lower
        at_up = x >= self.upper
        out = np.zeros_like(v)
        both = at_lo & at_up
        out[both] = v[both]
        lo_only = at_lo & ~at_up
        out[lo_only] = np.minimum(v[lo_only], 0.0)
        up_only = at_up & ~at_lo
        out[up_only] = np.maximum(v[up_only], 0.0)
        return out

    def _recession_project(self, d, w):
        lo_inf = self.lower == -INF
        up_inf = self.upper == INF
        out = np.zeros_like(d)
        free = lo_inf & up_inf
        out[free] = d[free]
        m = up_inf & ~lo_inf
        out[m] = np.maximum(d[m], 0.0)
        m = lo_inf & ~up_inf
        out[m] = np.minimum(d[m], 0.0)
        return out

    def to_dict(self):
        return {"type": "box", "lower": _encode(self.lower), "upper": _encode(self.upper)}


@dataclass(frozen=True, eq=False)
class Zero(ConvexSet):
    dim: int

    @property
    def is_cone(self) -> bool:
        return True

    def bounds(self):
        return np.zeros(self.dim), np.zeros(self.dim)

    def _project(self, x, w):
        return np.zeros_like(x)

    def _support(self, lam, w):
        return 0.0

    def _normal_project(self, x, v, w):
        return v.copy()

    def _recession_project(self, d, w):
        return np.zeros_like(d)

    def to_dict(self):
        return {"type": "zero", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class NonnegCone(ConvexSet):
    dim: int

    @property
    def is_cone(self) -> bool:
        return True

    def bounds(self):
        return np.zeros(self.dim), np.full(self.dim, INF)

    def _project(self, x, w):
        return np.maximum(x, 0.0)

    def _support(self, lam, w):
        return INF if np.any(lam > 0) else 0.0

    def _normal_project(self, x, v, w):
        return np.where(x <= 0.0, np.minimum(v, 0.0), 0.0)

    def _recession_project(self, d, w):
        return np.maximum(d, 0.0)

    def to_dict(self):
        return {"type": "nonneg", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class WholeSpace(ConvexSet):
    dim: int

    @property
    def is_cone(self) -> bool:
        return True

    def bounds(self):
        return np.full(self.dim, -INF), np.full(self.dim, INF)

    def _project(self, x, w):
        return x.copy()

    def _support(self, lam, w):
        return INF if np.any(lam != 0) else 0.0

    def _normal_project(self, x, v, w):
        return np.zeros_like(v)

    def _recession_project(self, d, w):
        return d.copy()

    def to_dict(self):
        return {"type": "whole", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    """Closed ball in the weighted norm of the ambient space."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        if self.radius < 0 or not np.all(np.isfinite(c)):
            raise ValueError("ball needs finite center and radius >= 0")
        object.__setattr__(self, "center", c.copy())
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.size

    def _project(self, x, w):
        d = x - self.center
        n = _wnorm(w, d)
        if n <= self.radius:
            return x.copy()
        return self.center + (self.radius / n) * d

    def _support(self, lam, w):
        return float(np.dot(w * lam, self.center)) + self.radius * _wnorm(w, lam)

    def _normal_project(self, x, v, w):
        d = x - self.center
        n = _wnorm(w, d)
        if self.radius == 0.0:
            return v.copy()
        if n < self.radius * (1.0 - BALL_ACTIVE_RTOL):
            return np.zeros_like(v)
        t = max(0.0, float(np.dot(w * v, d)) / (n * n))
        return t * d

    def _recession_project(self, d, w):
        return np.zeros_like(d)

    def to_dict(self):
        return {"type": "ball", "center": _encode(self.center), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Product(ConvexSet):
    """Cartesian product; coordinates are the concatenation of the blocks."""

    sets: Sequence[ConvexSet] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(self.sets))
        offsets = np.cumsum([0] + [s.dim for s in self.sets])
        object.__setattr__(self, "_offsets", offsets)

    @property
    def dim(self) -> int:
        return int(self._offsets[-1])

    @property
    def is_cone(self) -> bool:
        return all(s.is_cone for s in self.sets)

    def _blocks(self):
        for s, a, b in zip(self.sets, self._offsets[:-1], self._offsets[1:]):
            yield s, slice(int(a), int(b))

    def _map(self, fn, *vecs, w):
        out = np.empty(self.dim)
        for s, sl in self._blocks():
            out[sl] = fn(s, *(v[sl] for v in vecs), w[sl])
        return out

    def bounds(self):
        lo, up = zip(*(s.bounds() for s in self.sets)) if self.sets else ((), ())
        return np.concatenate(lo or [np.zeros(0)]), np.concatenate(up or [np.zeros(0)])

    def _project(self, x, w):
        return self._map(lambda s, xb, wb: s._project(xb, wb), x, w=w)

    def _support(self, lam, w):
        total = 0.0
        for s, sl in self._blocks():
            total += s._support(lam[sl], w[sl])
        return total

    def _normal_project(self, x, v, w):
        return self._map(lambda s, xb, vb, wb: s._normal_project(xb, vb, wb), x, v, w=w)

    def _recession_project(self, d, w):
        return self._map(lambda s, db, wb: s._recession_project(db, wb), d, w=w)

    def to_dict(self):
        return {"type": "product", "sets": [s.to_dict() for s in self.sets]}


def _encode(a):
    return [float(t) if np.isfinite(t) else ("inf" if t > 0 else "-inf") for t in a]


def _decode(a):
    return np.array([float(t) for t in a], dtype=float)


def set_from_dict(d: dict, dim: int | None = None) -> ConvexSet:
    """Inverse of ``ConvexSet.to_dict``; ``dim`` fills in sizes omitted in specs."""
    kind = d["type"]
    if kind == "box":
        lo, up = d["lower"], d["upper"]
        if not isinstance(lo, list) or not isinstance(up, list):
            if dim is None:
                raise ValueError("scalar box bounds need a dimension")
            lo = [lo] * dim if not isinstance(lo, list) else lo
            up = [up] * dim if not isinstance(up, list) else up
        return Box(_decode(lo), _decode(up))
    if kind == "ball":
        return Ball(_decode(d["center"]), float(d["radius"]))
    if kind == "product":
        return Product([set_from_dict(s) for s in d["sets"]])
    n = d.get("dim", dim)
    if n is None:
        raise ValueError(f"set of type {kind!r} needs a dimension")
    return {"zero": Zero, "nonneg": NonnegCone, "whole": WholeSpace}[kind](int(n))


# -- functional interface ------------------------------------------------


def project(s: ConvexSet, x, space=None) -> np.ndarray:
    return s.project(x, space)


def dist(s: ConvexSet, x, space=None) -> float:
    return s.dist(x, space)


def support_gap(s: ConvexSet, lam, z, space=None) -> float:
    """sup_{y in S} <lam, y - z>; ``inf`` if lam pairs positively with a
    recession direction."""
    return s.support_gap(lam, z, space)


def normal_cone_dist(s: ConvexSet, x, g, space=None, feas_tol: float = FEAS_TOL) -> float:
    """min over mu in N_S(x) of |g + mu|, i.e. the distance of -g to N_S(x).

    Returns ``inf`` if x is farther than ``feas_tol`` from S, where the
    normal cone is empty by convention.
    """
    x = s._check(x)
    g = s._check(g)
    w = _weights_of(space, s.dim)
    if _wnorm(w, x - s._project(x, w)) > feas_tol:
        return INF
    xs = s._project(x, w)
    mu = s._normal_project(xs, -g, w)
    return _wnorm(w, g + mu)


def polar_project(s: ConvexSet, x, space=None) -> np.ndarray:
    return s.polar_project(x, space)


def recession_contains(s: ConvexSet, d, tol: float = 1e-12) -> bool:
    d = s._check(d)
    return float(np.max(np.abs(d - s.recession_project(d)), initial=0.0)) <= tol


def tangent_cone_dist(s: ConvexSet, x, d, space=None) -> float:
    x = s._check(x)
    w = _weights_of(space, s.dim)
    xs = s._project(x, w)
    d = s._check(d)
    return _wnorm(w, s._normal_project(xs, d, w))


def halfspace_projector(a, b: float, w) -> Callable[[np.ndarray], np.ndarray]:
    """Projector onto {p : <a, p>_w <= b} in the weighted inner product."""
    a = np.asarray(a, dtype=float)
    w = np.asarray(w, dtype=float)
    aa = float(np.dot(w * a, a))

    def proj(p):
        if aa == 0.0:
            return p.copy()
        excess = float(np.dot(w * a, p)) - b
        if excess <= 0.0:
            return p.copy()
        return p - (excess / aa) * a

    return proj


def dykstra(projectors: Sequence[Callable[[np.ndarray], np.ndarray]], x0,
            max_iter: int = 10_000, tol: float = 1e-14):
    """Cyclic Dykstra projection onto the intersection of convex sets.

    Returns ``(point, iterations, converged)``.  Convergence is declared
    when a full cycle changes neither the iterate nor the correction terms
    by more than ``tol`` (relative to the iterate scale).
    """
    x = np.array(x0, dtype=float)
    incs = [np.zeros_like(x) for _ in projectors]
    for it in range(1, max_iter + 1):
        change = 0.0
        for i, proj in enumerate(projectors):
            y = x + incs[i]
            new = proj(y)
            new_inc = y - new
            change = max(change, float(np.max(np.abs(new - x), initial=0.0)),
                         float(np.max(np.abs(new_inc - incs[i]), initial=0.0)))
            incs[i] = new_inc
            x = new
        if change <= tol * (1.0 + float(np.max(np.abs(x), initial=0.0))):
            return x, it, True
    return x, max_iter, False


@dataclass(frozen=True)
class ConeMembershipReport:
    member: bool
    violation: float
    witness: np.ndarray | None = None


def lin_cone_membership(problem, xbar, d, tol: float = 1e-10) -> ConeMembershipReport:
    """Test d in L_F(xbar) = {d in T_C(xbar) : G'(xbar) d in T_K(G(xbar))}.

    The violation is the sum of the two tangent-cone distances.
    """
    xbar = np.asarray(xbar, dtype=float)
    d = np.asarray(d, dtype=float)
    wx = problem.space_x.weights
    wy = problem.space_y.weights
    gx = problem.constraint(xbar)
    if problem.set_c.dist(xbar, wx) > FEAS_TOL or problem.set_k.dist(gx, wy) > FEAS_TOL:
        raise ValueError("xbar is not feasible")
    jd = problem.jvp(xbar, d)
    viol = tangent_cone_dist(problem.set_c, xbar, d, wx) + tangent_cone_dist(problem.set_k, gx, jd, wy)
    witness = problem.set_c.tangent_cone_project(problem.set_c.project(xbar, wx), d, wx)
    return ConeMembershipReport(viol <= tol, viol, witness)
