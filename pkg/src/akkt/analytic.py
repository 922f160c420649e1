"""Piecewise sums of power functions on (0, 1) with exact L^2 inner products."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class NonIntegrableError(ValueError):
    pass


@dataclass(frozen=True)
class Segment:
    """sum_j coef_j * t**power_j on [start, stop)."""

    start: float
    stop: float
    terms: tuple[tuple[float, float], ...]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c, p in self.terms:
            out = out + c * t**p
        return out


def _integral_power(q: float, a: float, b: float) -> float:
    """Exact integral of t**q over [a, b], 0 <= a < b."""
    if q == -1.0:
        if a <= 0.0:
            raise NonIntegrableError("t^-1 is not integrable at 0")
        return math.log(b / a)
    if q < -1.0 and a <= 0.0:
        raise NonIntegrableError(f"t^{q} is not integrable at 0")
    if a == 0.0:
        return b ** (q + 1.0) / (q + 1.0)
    return (b ** (q + 1.0) - a ** (q + 1.0)) / (q + 1.0)


@dataclass(frozen=True)
class PiecewiseAnalytic:
    """Function on (0,1) that is a finite sum of c*t^p on each segment and
    zero outside the listed segments."""

    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(sorted(self.segments, key=lambda s: s.start))
        for s in segs:
            if not (0.0 <= s.start < s.stop <= 1.0):
                raise ValueError(f"bad segment [{s.start}, {s.stop})")
        for s0, s1 in zip(segs, segs[1:]):
            if s1.start < s0.stop:
                raise ValueError("segments overlap")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def power(cls, coef: float, power: float, start: float = 0.0, stop: float = 1.0):
        return cls((Segment(start, stop, ((float(coef), float(power)),)),))

    @classmethod
    def constant(cls, value: float, start: float = 0.0, stop: float = 1.0):
        return cls.power(value, 0.0, start, stop)

    @classmethod
    def from_pieces(cls, pieces: Sequence[tuple[float, float, Sequence[tuple[float, float]]]]):
        return cls(tuple(Segment(a, b, tuple((float(c), float(p)) for c, p in terms))
                         for a, b, terms in pieces))

    def breakpoints(self) -> list[float]:
        pts = {0.0, 1.0}
        for s in self.segments:
            pts.update((s.start, s.stop))
        return sorted(pts)

    def terms_on(self, a: float, b: float) -> tuple[tuple[float, float], ...]:
        """Terms active on the open interval (a, b), which must not straddle a breakpoint."""
        mid = 0.5 * (a + b)
        for s in self.segments:
            if s.start <= mid < s.stop:
                return s.terms
        return ()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for s in self.segments:
            mask = (t >= s.start) & (t < s.stop)
            if np.any(mask):
                out[mask] = s(t[mask])
        return out

    def integral(self, a: float = 0.0, b: float = 1.0) -> float:
        total = 0.0
        pts = sorted({a, b, *[p for p in self.breakpoints() if a < p < b]})
        for lo, hi in zip(pts, pts[1:]):
            for c, p in self.terms_on(lo, hi):
                total += c * _integral_power(p, lo, hi)
        return total

    def cell_averages(self, edges) -> np.ndarray:
        """Exact mean value over each cell [edges[i], edges[i+1]]."""
        edges = np.asarray(edges, dtype=float)
        out = np.empty(edges.size - 1)
        for i in range(out.size):
            out[i] = self.integral(edges[i], edges[i + 1]) / (edges[i + 1] - edges[i])
        return out

    def __add__(self, other: "PiecewiseAnalytic") -> "PiecewiseAnalytic":
        pts = sorted(set(self.breakpoints()) | set(other.breakpoints()))
        segs = []
        for a, b in zip(pts, pts[1:]):
            merged: dict[float, float] = {}
            for c, p in self.terms_on(a, b) + other.terms_on(a, b):
                merged[p] = merged.get(p, 0.0) + c
            if merged:
                segs.append(Segment(a, b, tuple((c, p) for p, c in sorted(merged.items()))))
        return PiecewiseAnalytic(tuple(segs))

    def __neg__(self) -> "PiecewiseAnalytic":
        return self.scaled(-1.0)

    def __sub__(self, other: "PiecewiseAnalytic") -> "PiecewiseAnalytic":
        return self + (-other)

    def scaled(self, factor: float) -> "PiecewiseAnalytic":
        return PiecewiseAnalytic(tuple(
            Segment(s.start, s.stop, tuple((factor * c, p) for c, p in s.terms))
            for s in self.segments))


def exact_inner(f1: PiecewiseAnalytic, f2: PiecewiseAnalytic) -> float:
    """Exact L^2(0,1) inner product via antiderivatives of the term products."""
    pts = sorted(set(f1.breakpoints()) | set(f2.breakpoints()))
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        t1 = f1.terms_on(a, b)
        t2 = f2.terms_on(a, b)
        for c1, p1 in t1:
            for c2, p2 in t2:
                total += c1 * c2 * _integral_power(p1 + p2, a, b)
    return total


def exact_norm(f: PiecewiseAnalytic) -> float:
    return math.sqrt(exact_inner(f, f))
