"""Isometric embeddability of finite metric spaces into Euclidean space."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .metric_core import FiniteMetricSpace

EMBEDDABLE, NOT_EMBEDDABLE, BORDERLINE = "embeddable", "not-embeddable", "borderline"


@dataclass
class EmbeddabilityReport:
    verdict: str
    min_eig: float
    tol: float
    witness: np.ndarray | None = None
    eigenvalues: np.ndarray = field(default=None, repr=False)

    def to_dict(self):
        return {"verdict": self.verdict, "min_eig": float(self.min_eig),
                "witness": None if self.witness is None else [float(c) for c in self.witness]}


DEFAULT_BASE = 1


def _base(space, base):
    if base is None:
        base = DEFAULT_BASE if space.n > 1 else 0
    return base


def gram_matrix(space: FiniteMetricSpace, base: int | None = None) -> np.ndarray:
    """G_ij = (d(b, i)^2 + d(b, j)^2 - d(i, j)^2) / 2 over the other points."""
    base = _base(space, base)
    d2 = np.asarray(space.dist, dtype=float) ** 2
    idx = [i for i in range(space.n) if i != base]
    g = 0.5 * (d2[base, idx][:, None] + d2[base, idx][None, :] - d2[np.ix_(idx, idx)])
    return g


def _quad_form(space, c):
    d2 = np.asarray(space.dist, dtype=float) ** 2
    return float(c @ d2 @ c)


def negative_type_check(space: FiniteMetricSpace, tol: float | None = None,
                        base: int | None = None) -> EmbeddabilityReport:
    """Embeddable iff the Gram matrix is positive semidefinite.

    Eigenvalues below ``-tol`` (default 1e-9 times the Gram 1-norm) give a
    witness c with sum c = 0 and sum d^2 c_i c_j > 0.  Eigenvalues in
    ``[-tol, -noise)`` are reported as borderline, where ``noise`` is the
    rounding level of the eigensolver.
    """
    if space.n <= 2:
        return EmbeddabilityReport(EMBEDDABLE, 0.0, 0.0, None, np.zeros(max(space.n - 1, 0)))
    base = _base(space, base)
    g = gram_matrix(space, base)
    norm1 = float(np.abs(g).sum(axis=0).max())
    if tol is None:
        tol = 1e-9 * norm1
    vals, vecs = np.linalg.eigh(g)
    lam = float(vals[0])
    noise = 64 * np.finfo(float).eps * max(norm1, 1e-300) * space.n
    if lam < -tol:
        v = vecs[:, 0]
        c = np.empty(space.n)
        others = [i for i in range(space.n) if i != base]
        c[others] = v
        c[base] = -v.sum()
        return EmbeddabilityReport(NOT_EMBEDDABLE, lam, tol, c, vals)
    if lam < -noise:
        return EmbeddabilityReport(BORDERLINE, lam, tol, None, vals)
    return EmbeddabilityReport(EMBEDDABLE, lam, tol, None, vals)


@dataclass
class PairFamilyWitness:
    plus: tuple
    minus: tuple
    value: object

    def coefficients(self, n: int) -> np.ndarray:
        """The same violation as integer coefficients summing to zero."""
        c = np.zeros(n, dtype=int)
        for i in self.plus:
            c[i] += 1
        for i in self.minus:
            c[i] -= 1
        return c


def _sq(v):
    return v * v


def pair_family_check(space: FiniteMetricSpace, max_n: int = 3, samples: int = 2000, seed: int = 0):
    """Search families x+_1..x+_n, x-_1..x-_n (repetition allowed) with

        sum_{i,j} d^2(x+_i, x+_j) + d^2(x-_i, x-_j) - 2 d^2(x+_i, x-_j) > 0.

    Families up to size 3 are enumerated, larger ones up to ``max_n`` are
    sampled.  Returns the first witness or ``None``.
    """
    n = space.n
    exact = space.exact
    d2 = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            d2[i, j] = _sq(space.dist[i, j]) if exact else float(space.dist[i, j]) ** 2
    tol = 0 if exact else space.tol * max(1.0, float(np.max(np.asarray(d2, float))))

    def value(plus, minus):
        u = np.zeros(n, dtype=object)
        for i in plus:
            u[i] += 1
        for i in minus:
            u[i] -= 1
        return u @ d2 @ u

    for k in range(1, min(max_n, 3) + 1):
        fams = list(itertools.combinations_with_replacement(range(n), k))
        for plus in fams:
            for minus in fams:
                v = value(plus, minus)
                if v > tol:
                    return PairFamilyWitness(plus, minus, v)
    rng = np.random.default_rng(seed)
    for k in range(4, max_n + 1):
        for _ in range(samples):
            plus = tuple(sorted(rng.integers(0, n, size=k)))
            minus = tuple(sorted(rng.integers(0, n, size=k)))
            v = value(plus, minus)
            if v > tol:
                return PairFamilyWitness(plus, minus, v)
    return None


class NotEmbeddableError(ValueError):
    def __init__(self, report):
        super().__init__(f"space is not isometrically embeddable (min eigenvalue {report.min_eig:.3g})")
        self.report = report


def hilbert_embedding(space: FiniteMetricSpace, tol: float | None = None) -> np.ndarray:
    """Coordinates in R^(n-1), base point at the origin."""
    if space.n == 1:
        return np.zeros((1, 1))
    report = negative_type_check(space, tol)
    if report.verdict == NOT_EMBEDDABLE:
        raise NotEmbeddableError(report)
    base = _base(space, None)
    g = gram_matrix(space, base)
    vals, vecs = np.linalg.eigh(g)
    vals = np.clip(vals, 0, None)
    coords = vecs * np.sqrt(vals)
    return np.insert(coords, base, 0.0, axis=0)


def embedding_error(space: FiniteMetricSpace, coords) -> float:
    x = np.asarray(coords, float)
    rec = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(-1))
    return float(np.abs(rec - np.asarray(space.dist, float)).max())


def random_metric(n: int, rng, max_dist: int = 10) -> FiniteMetricSpace:
    """Random integer weights closed under shortest paths (exact)."""
    w = rng.integers(1, max_dist + 1, size=(n, n))
    w = np.triu(w, 1)
    w = w + w.T
    d = w.astype(object)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i, k] + d[k, j] < d[i, j]:
                    d[i, j] = d[i, k] + d[k, j]
    return FiniteMetricSpace.from_matrix([[Fraction(int(v)) for v in row] for row in d])


def random_ultrametric(n: int, rng, levels: int = 6) -> FiniteMetricSpace:
    """Random ultrametric from a hierarchical clustering with dyadic heights."""
    clusters = [[i] for i in range(n)]
    d = np.zeros((n, n), dtype=object)
    d[:] = Fraction(0)
    height = Fraction(1, 2 ** levels)
    while len(clusters) > 1:
        height *= 1 + Fraction(int(rng.integers(1, 4)), 4)
        k = min(len(clusters), int(rng.integers(2, 4)))
        pick = sorted(rng.choice(len(clusters), size=k, replace=False), reverse=True)
        merged = []
        for p in pick:
            merged.append(clusters.pop(p))
        for a, b in itertools.combinations(merged, 2):
            for i in a:
                for j in b:
                    d[i, j] = d[j, i] = height
        clusters.append([i for c in merged for i in c])
    return FiniteMetricSpace.from_matrix(d.tolist(), ultrametric=True)
