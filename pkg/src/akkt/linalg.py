"""Dense linear algebra: Jacobi SVD, numerical rank, reduced minimum modulus,
subspace gaps and adjoints with respect to diagonal weights.

Everything here works on plain ``numpy`` arrays and is side-effect free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_RANK_TOL = 1e-10


class InvalidInputError(ValueError):
    """Raised for non-finite matrices, bad weights or shape mismatches."""


@dataclass(frozen=True)
class SvdResult:
    singular_values: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left_basis * self.singular_values) @ self.right_basis.T


@dataclass(frozen=True)
class Subspace:
    """Subspace of R^ambient_dim stored by an orthonormal basis (columns)."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        if self.basis.shape[0] != self.ambient_dim or self.basis.ndim != 2:
            raise InvalidInputError("basis must be an ambient_dim x k array")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def trivial(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.zeros((ambient_dim, 0)))

    @classmethod
    def span(cls, vectors, tol: float = DEFAULT_RANK_TOL) -> "Subspace":
        """Subspace spanned by the columns of ``vectors``."""
        a = _as_matrix(vectors)
        if a.shape[1] == 0:
            return cls.trivial(a.shape[0])
        res = svd(a)
        r = _rank_from_sv(res.singular_values, tol)
        return cls(a.shape[0], res.left_basis[:, :r].copy())

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.basis @ (self.basis.T @ x)


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise InvalidInputError("expected a 2-D array")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    return a


def _orthonormal_complement(q: np.ndarray, total: int) -> np.ndarray:
    """Extend the orthonormal columns ``q`` (possibly fewer than ``total``)
    to ``total`` orthonormal columns."""
    m, k = q.shape
    if k >= total:
        return q
    # Gram-Schmidt against coordinate axes, taking the best-conditioned ones.
    cols = [q[:, j] for j in range(k)]
    for i in range(m):
        if len(cols) == total:
            break
        e = np.zeros(m)
        e[i] = 1.0
        for _ in range(2):
            for c in cols:
                e -= (c @ e) * c
        n = np.linalg.norm(e)
        if n > 1e-8:
            cols.append(e / n)
    return np.column_stack(cols) if cols else np.zeros((m, 0))


def _jacobi_tall(a: np.ndarray, max_sweeps: int = 60):
    """One-sided Jacobi on a matrix with rows >= cols.

    Returns (columns of A V, V)."""
    u = a.copy()
    n = u.shape[1]
    v = np.eye(n)
    eps = np.finfo(float).eps
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                up = u[:, p]
                uq = u[:, q]
                alpha = up @ up
                beta = uq @ uq
                gamma = up @ uq
                if gamma == 0.0 or abs(gamma) <= eps * np.sqrt(alpha) * np.sqrt(beta):
                    continue
                rotated = True
                diff = beta - alpha
                if abs(diff) > 1e150 * abs(2.0 * gamma):
                    t = gamma / diff  # 1/(2 zeta) without forming zeta
                else:
                    zeta = diff / (2.0 * gamma)
                    t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                new_p = c * up - s * uq
                new_q = s * up + c * uq
                u[:, p] = new_p
                u[:, q] = new_q
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        if not rotated:
            break
    return u, v


def svd(a) -> SvdResult:
    """Thin SVD by one-sided Jacobi rotations.

    Singular values come back sorted nonincreasing; left and right bases
    have ``min(m, n)`` orthonormal columns each.
    """
    a = _as_matrix(a)
    m, n = a.shape
    k = min(m, n)
    if k == 0:
        return SvdResult(np.zeros(0), np.zeros((m, 0)), np.zeros((n, 0)))
    transposed = m < n
    work = a.T if transposed else a
    b, v = _jacobi_tall(work)
    sigma = np.linalg.norm(b, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    b = b[:, order]
    v = v[:, order]
    smax = sigma[0] if sigma.size else 0.0
    cutoff = max(smax, 1.0) * np.finfo(float).eps * max(work.shape)
    keep = sigma > cutoff
    u = np.zeros_like(b)
    u[:, keep] = b[:, keep] / sigma[keep]
    nk = int(np.count_nonzero(keep))
    u = _orthonormal_complement(u[:, :nk], k)
    sigma = np.where(keep, sigma, 0.0)
    if transposed:
        return SvdResult(sigma, v, u)
    return SvdResult(sigma, u, v)


def _rank_from_sv(sv: np.ndarray, tol: float) -> int:
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol * sv[0]))


def numerical_rank(a, tol: float = DEFAULT_RANK_TOL) -> int:
    """Count singular values above ``tol * sigma_max``."""
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    return _rank_from_sv(svd(a).singular_values, tol)


def reduced_min_modulus(a, tol: float = DEFAULT_RANK_TOL) -> float:
    """Reduced minimum modulus gamma(A) = inf{|Ax| : dist(x, ker A) = 1}.

    In finite dimensions this is the smallest singular value above the
    rank threshold; the zero matrix gives ``inf`` (empty infimum).
    """
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    sv = svd(a).singular_values
    r = _rank_from_sv(sv, tol)
    if r == 0:
        return float("inf")
    return float(sv[r - 1])


def kernel(a, tol: float = DEFAULT_RANK_TOL) -> Subspace:
    a = _as_matrix(a)
    n = a.shape[1]
    # kernel basis from the right singular vectors of the square completion
    res = svd(np.vstack([a, np.zeros((max(0, n - a.shape[0]), n))]))
    r = _rank_from_sv(res.singular_values, tol)
    return Subspace(n, res.right_basis[:, r:].copy())


def range_space(a, tol: float = DEFAULT_RANK_TOL) -> Subspace:
    return Subspace.span(a, tol)


def dist_to_subspace(x: np.ndarray, s: Subspace) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - s.project(x)))


def subspace_gap(u: Subspace, v: Subspace) -> float:
    """Gap delta(U, V) = sup{dist(x, V) : x in U, |x| = 1}; 0 for trivial U."""
    if u.ambient_dim != v.ambient_dim:
        raise InvalidInputError("subspaces live in different ambient spaces")
    if u.dim == 0:
        return 0.0
    residual = u.basis - v.project(u.basis)
    return float(svd(residual).singular_values[0])


def _check_weights(w, size: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (size,):
        raise InvalidInputError(f"expected {size} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise InvalidInputError("weights must be finite and strictly positive")
    return w


def weighted_adjoint(j, wx, wy) -> np.ndarray:
    """Adjoint of J: X -> Y for the inner products <u,v> = sum w_i u_i v_i.

    Returns W_X^{-1} J^T W_Y, so that <J d, lam>_Y = <d, J* lam>_X.
    """
    j = _as_matrix(j)
    m, n = j.shape
    wx = _check_weights(wx, n)
    wy = _check_weights(wy, m)
    return (j.T * wy[None, :]) / wx[:, None]


def weighted_operator_norm(j, wx, wy) -> float:
    """Norm of J between the weighted spaces X and Y."""
    j = _as_matrix(j)
    wx = _check_weights(wx, j.shape[1])
    wy = _check_weights(wy, j.shape[0])
    if j.size == 0:
        return 0.0
    scaled = np.sqrt(wy)[:, None] * j / np.sqrt(wx)[None, :]
    return float(svd(scaled).singular_values[0])
