"""Finite metric spaces and the basic checks run on them.

Distances are stored either exactly (``int``/``Fraction`` entries in an
object array) or as floats.  Every comparison in float mode goes through a
caller supplied tolerance.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

DEFAULT_TOL = 1e-9
EXHAUSTIVE_LIMIT = 15


def is_exact_value(v) -> bool:
    return isinstance(v, Rational) and not isinstance(v, bool)


def to_exact_array(values) -> np.ndarray:
    arr = np.empty(np.shape(values), dtype=object)
    for idx, v in np.ndenumerate(np.asarray(values, dtype=object)):
        arr[idx] = Fraction(v)
    return arr


def parse_number(v):
    """Parse ``"p/q"`` strings and ints exactly; everything else as float."""
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    return float(v)


def format_number(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    return float(v)


class MetricError(ValueError):
    """Raised when a distance matrix violates the metric axioms."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Labeled points with a symmetric distance matrix.

    ``ultrametric`` is an optional flag carried through snowflaking; ``None``
    means "not checked".
    """

    labels: tuple
    dist: np.ndarray
    tol: float = DEFAULT_TOL
    ultrametric: bool | None = None
    exact: bool = field(init=False)

    def __post_init__(self):
        d = self.dist
        if not isinstance(d, np.ndarray):
            d = np.asarray(d, dtype=object)
        n = len(self.labels)
        if d.shape != (n, n):
            raise MetricError(f"distance matrix shape {d.shape} does not match {n} labels")
        exact = all(is_exact_value(v) for v in d.flat)
        if exact:
            d = to_exact_array(d)
        else:
            d = np.asarray(d, dtype=float)
        tol = 0 if exact else self.tol
        for i in range(n):
            if abs(d[i, i]) > tol:
                raise MetricError(f"nonzero self-distance at {self.labels[i]!r}", (i,))
            for j in range(i + 1, n):
                if d[i, j] < -tol:
                    raise MetricError("negative distance", (i, j))
                if abs(d[i, j] - d[j, i]) > tol:
                    raise MetricError("distance matrix is not symmetric", (i, j))
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "exact", exact)

    @classmethod
    def from_matrix(cls, dist, labels=None, tol=DEFAULT_TOL, ultrametric=None):
        n = len(dist)
        return cls(tuple(range(n)) if labels is None else tuple(labels), dist, tol, ultrametric)

    @classmethod
    def from_points(cls, points, labels=None, tol=DEFAULT_TOL):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        diff = pts[:, None, :] - pts[None, :, :]
        return cls.from_matrix(np.sqrt((diff ** 2).sum(-1)), labels, tol)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def eff_tol(self):
        return 0 if self.exact else self.tol

    def diameter(self, subset: Sequence[int] | None = None):
        idx = range(self.n) if subset is None else list(subset)
        best = 0
        for i, j in itertools.combinations(idx, 2):
            if self.dist[i, j] > best:
                best = self.dist[i, j]
        return best

    def subspace(self, subset: Sequence[int]) -> "FiniteMetricSpace":
        idx = list(subset)
        return FiniteMetricSpace(
            tuple(self.labels[i] for i in idx), self.dist[np.ix_(idx, idx)], self.tol, self.ultrametric
        )

    def to_dict(self) -> dict:
        return {
            "labels": [str(l) if not isinstance(l, (int, str)) else l for l in self.labels],
            "dist": [[format_number(v) for v in row] for row in self.dist],
        }

    @classmethod
    def from_dict(cls, data: dict, tol=DEFAULT_TOL) -> "FiniteMetricSpace":
        dist = [[parse_number(v) for v in row] for row in data["dist"]]
        labels = data.get("labels") or list(range(len(dist)))
        return cls(tuple(labels), dist, tol)


def triangle_violations(space: FiniteMetricSpace, limit: int | None = 1):
    """Triples (i, j, k) with d(i, k) > d(i, j) + d(j, k) beyond tolerance."""
    d = space.dist
    tol = space.eff_tol
    out = []
    for i, j, k in itertools.product(range(space.n), repeat=3):
        if d[i, k] > d[i, j] + d[j, k] + tol:
            out.append((i, j, k))
            if limit is not None and len(out) >= limit:
                break
    return out


def ultrametric_witness(space: FiniteMetricSpace, tol=None):
    """First triple violating the strong triangle inequality, or ``None``."""
    d = space.dist
    t = space.eff_tol if tol is None else tol
    n = space.n
    for i in range(n):
        for k in range(i + 1, n):
            dik = d[i, k]
            for j in range(n):
                if dik > max(d[i, j], d[j, k]) + t:
                    return (i, j, k)
    return None


def is_ultrametric(space: FiniteMetricSpace, tol=None) -> bool:
    """True iff d(x, z) <= max(d(x, y), d(y, z)) + tol for all triples."""
    return ultrametric_witness(space, tol) is None


def snowflake(space: FiniteMetricSpace, alpha) -> FiniteMetricSpace:
    """Raise every distance to the power ``alpha`` in (0, 1]."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if alpha == 1:
        return space
    flag = space.ultrametric
    if flag is None:
        flag = is_ultrametric(space)
    if space.exact and isinstance(alpha, Fraction) and alpha.denominator == 1:
        dist = space.dist
    else:
        dist = np.asarray(space.dist, dtype=float) ** float(alpha)
    out = FiniteMetricSpace(space.labels, dist, space.tol, flag)
    if not flag:
        bad = triangle_violations(out)
        if bad:
            raise MetricError("snowflaked matrix violates the triangle inequality", bad[0])
    return out


def _adjacency(space: FiniteMetricSpace, subset, radius):
    tol = space.eff_tol
    d = space.dist
    return {
        a: {b for b in subset if b != a and d[a, b] <= radius + tol}
        for a in subset
    }


def min_cover_exact(space: FiniteMetricSpace, subset: Sequence[int], radius):
    """Minimum number of sets of diameter <= radius covering ``subset``.

    A set of diameter <= radius is a clique of the graph joining points at
    distance <= radius, so this is a minimum clique partition.  Solved by
    branch and bound, points taken in lexicographic order.
    Returns (size, list of groups).
    """
    pts = sorted(subset)
    if not pts:
        return 0, []
    adj = _adjacency(space, pts, radius)
    best = [len(pts) + 1, None]
    groups: list[list[int]] = []

    def rec(pos):
        if len(groups) >= best[0]:
            return
        if pos == len(pts):
            best[0] = len(groups)
            best[1] = [list(g) for g in groups]
            return
        v = pts[pos]
        for g in groups:
            if all(u in adj[v] for u in g):
                g.append(v)
                rec(pos + 1)
                g.pop()
        if len(groups) + 1 < best[0]:
            groups.append([v])
            rec(pos + 1)
            groups.pop()

    rec(0)
    return best[0], best[1]


def min_cover_greedy(space: FiniteMetricSpace, subset: Sequence[int], radius):
    """Greedy upper bound on the cover size (lexicographic tie breaking)."""
    pts = sorted(subset)
    adj = _adjacency(space, pts, radius)
    left = list(pts)
    groups = []
    while left:
        g = [left[0]]
        for u in left[1:]:
            if all(u in adj[w] for w in g):
                g.append(u)
        groups.append(g)
        left = [u for u in left if u not in g]
    return len(groups), groups


@dataclass
class DoublingResult:
    value: int
    family: str
    bound: str
    witness: tuple = ()


def _balls(space: FiniteMetricSpace):
    seen = set()
    radii = sorted({space.dist[i, j] for i in range(space.n) for j in range(space.n)})
    for i in range(space.n):
        for r in radii:
            ball = tuple(j for j in range(space.n) if space.dist[i, j] <= r + space.eff_tol)
            if ball not in seen:
                seen.add(ball)
                yield ball


def doubling_number(space: FiniteMetricSpace, shrink=Fraction(1, 2), family: str = "auto",
                    exact_limit: int = EXHAUSTIVE_LIMIT) -> DoublingResult:
    """Smallest N such that every subset in the family is covered by N sets of
    diameter <= shrink * diam(S).

    ``family`` is ``"subsets"`` (all subsets, at most 15 points), ``"balls"``
    (closed metric balls) or ``"auto"``.
    """
    if space.n == 0:
        raise ValueError("empty space")
    if family == "auto":
        family = "subsets" if space.n <= EXHAUSTIVE_LIMIT else "balls"
    if family == "subsets":
        if space.n > EXHAUSTIVE_LIMIT:
            raise ValueError("subset enumeration is limited to 15 points")
        candidates = (
            s for k in range(1, space.n + 1) for s in itertools.combinations(range(space.n), k)
        )
    elif family == "balls":
        candidates = _balls(space)
    else:
        raise ValueError(f"unknown family {family!r}")
    best = DoublingResult(1, family, "exact", (0,))
    kind = "exact"
    for s in candidates:
        if len(s) < 2:
            continue
        r = shrink * space.diameter(s)
        if len(s) <= exact_limit:
            size, _ = min_cover_exact(space, s, r)
        else:
            size, _ = min_cover_greedy(space, s, r)
            kind = "greedy"
        if size > best.value:
            best = DoublingResult(size, family, kind, tuple(s))
    best.bound = kind
    return best


def as_point_set(points) -> np.ndarray:
    """Return an (m, d) array; exact entries stay as Fractions."""
    arr = np.asarray(points, dtype=object if _any_exact(points) else float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("a point set needs at least one point of dimension >= 1")
    return arr


def _any_exact(points) -> bool:
    flat = np.asarray(points, dtype=object).ravel()
    return len(flat) > 0 and all(is_exact_value(v) for v in flat)


def hausdorff_distance(a, b, squared: bool = False):
    """Euclidean Hausdorff distance between two finite point sets.

    Exact inputs give an exact result in dimension 1 (or with
    ``squared=True`` in any dimension).
    """
    a = as_point_set(a)
    b = as_point_set(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError("point sets live in different dimensions")
    if a.dtype == object and b.dtype == object:
        if a.shape[1] == 1:
            h = max(_directed_1d(a[:, 0], b[:, 0]), _directed_1d(b[:, 0], a[:, 0]))
            return h * h if squared else h
        h2 = max(_directed_sq(a, b), _directed_sq(b, a))
        return h2 if squared else float(h2) ** 0.5
    fa = np.asarray(a, dtype=float)
    fb = np.asarray(b, dtype=float)
    h = max(cKDTree(fb).query(fa)[0].max(), cKDTree(fa).query(fb)[0].max())
    return h * h if squared else float(h)


def _directed_1d(a, b):
    bs = sorted(b)
    worst = 0
    for x in a:
        i = bisect.bisect_left(bs, x)
        cand = []
        if i < len(bs):
            cand.append(abs(bs[i] - x))
        if i > 0:
            cand.append(abs(x - bs[i - 1]))
        worst = max(worst, min(cand))
    return worst


def _directed_sq(a, b):
    worst = 0
    for x in a:
        m = min(sum((xi - yi) ** 2 for xi, yi in zip(x, y)) for y in b)
        worst = max(worst, m)
    return worst
