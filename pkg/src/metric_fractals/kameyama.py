"""Chain pseudometrics on fractal structures.

The distance between x and y is the infimum of sum lambda^o(f_i) over chains
of cylinders f_1(X), ..., f_n(X) with x in the first, y in the last and
consecutive cylinders meeting.  On a finite cylinder lattice this is a
node-weighted shortest path, which bounds the true infimum from above.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .code_space import (CylinderLattice, DISJOINT, UNKNOWN, OMEGA, ExkamPoint, is_ultrafractal,
                         weight, word_str)
from .metric_core import FiniteMetricSpace, is_ultrametric


class MembershipError(ValueError):
    pass


@dataclass
class KameyamaConfig:
    lam: object
    lattice: CylinderLattice
    _adj: dict | None = field(default=None, repr=False)
    _ultra: object = field(default=None, repr=False)

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise ValueError("lambda must lie in (0, 1)")

    @property
    def depth(self):
        return self.lattice.depth

    @property
    def root(self):
        return self.lattice.word_keys[()]

    def nodes(self):
        """Non-singleton cylinders (singletons never shorten a chain)."""
        return [k for k, info in self.lattice.nodes.items() if not info.singleton]

    def weight(self, key):
        return self.lattice.weight(key, self.lam)

    def adjacency(self):
        """Meeting cylinders; unknown relations are left out so chains stay
        certified."""
        if self._adj is None:
            nodes = self.nodes()
            adj = {k: [] for k in nodes}
            for a, b in itertools.combinations(nodes, 2):
                r = self.lattice.relation(a, b)
                if r not in (DISJOINT, UNKNOWN):
                    adj[a].append(b)
                    adj[b].append(a)
            self._adj = adj
        return self._adj

    def holding(self, point):
        """Non-singleton cylinders certified to contain ``point``."""
        if self.lattice.backend.contains(self.root, point) is False:
            raise MembershipError(f"point {point!r} lies outside the space")
        out = []
        for k in self.nodes():
            if k == self.root:
                out.append(k)
            elif self.lattice.backend.contains(k, point):
                out.append(k)
        if not out:
            raise MembershipError(f"point {point!r} is not in any cylinder")
        if self.root not in out:
            out.append(self.root)
        return out

    def singleton_of(self, point):
        for k, info in self.lattice.nodes.items():
            if info.singleton and self.lattice.backend.contains(k, point):
                return k
        return None

    def ultrafractal(self):
        if self._ultra is None:
            self._ultra = is_ultrafractal(self.lattice)
        return self._ultra


@dataclass
class ChainCertificate:
    words: list
    weights: list
    total: object
    upper_bound: bool = True

    def to_dict(self):
        return {"words": [word_str(w) for w in self.words],
                "weights": [str(w) for w in self.weights], "total": str(self.total),
                "upper_bound": self.upper_bound}


def _search(cfg: KameyamaConfig, starts):
    adj = cfg.adjacency()
    dist, prev = {}, {}
    heap = []
    tie = itertools.count()
    for s in starts:
        w = cfg.weight(s)
        if s not in dist or w < dist[s]:
            dist[s] = w
            prev[s] = None
            heapq.heappush(heap, (w, next(tie), s))
    done = set()
    while heap:
        d, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v in adj[u]:
            nd = d + cfg.weight(v)
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, next(tie), v))
    return dist, prev


def _chain(cfg, prev, end):
    out = []
    k = end
    while k is not None:
        out.append(k)
        k = prev[k]
    out.reverse()
    lat = cfg.lattice
    words = [lat.nodes[k].words[0] for k in out]
    weights = [cfg.weight(k) for k in out]
    return words, weights


def self_distance(cfg: KameyamaConfig, x):
    """0 if {x} is a cylinder, else lambda^(deepest level holding x)."""
    single = cfg.singleton_of(x)
    if single is not None:
        w = cfg.lattice.nodes[single].words[0]
        return 0, ChainCertificate([w], [0], 0, upper_bound=False)
    best = min(cfg.holding(x), key=cfg.weight)
    wt = cfg.weight(best)
    return wt, ChainCertificate([cfg.lattice.nodes[best].words[0]], [wt], wt)


def kameyama_distance(cfg: KameyamaConfig, x, y):
    """Shortest certified chain from x to y.  Returns (value, certificate)."""
    if x == y:
        return self_distance(cfg, x)
    starts = cfg.holding(x)
    targets = cfg.holding(y)
    dist, prev = _search(cfg, starts)
    end = min((t for t in targets if t in dist), key=lambda t: dist[t])
    words, weights = _chain(cfg, prev, end)
    return dist[end], ChainCertificate(words, weights, dist[end])


def distance_matrix(cfg: KameyamaConfig, points, labels=None) -> FiniteMetricSpace:
    """Pairwise chain distances between distinct points (diagonal 0)."""
    pts = list(points)
    holds = [cfg.holding(p) for p in pts]
    n = len(pts)
    d = np.empty((n, n), dtype=object)
    for i in range(n):
        d[i, i] = 0
        dist, _ = _search(cfg, holds[i])
        for j in range(n):
            if j != i:
                d[i, j] = min(dist[t] for t in holds[j] if t in dist)
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = min(d[i, j], d[j, i])
    if not all(isinstance(v, (int, Fraction)) for v in d.flat):
        d = d.astype(float)
    return FiniteMetricSpace(tuple(labels) if labels is not None else tuple(range(n)), d)


def kameyama_ultra_distance(cfg: KameyamaConfig, x, y):
    """min lambda^o(f) over cylinders holding both points (ultrafractals only)."""
    verdict = cfg.ultrafractal()
    if verdict.status != "yes":
        raise ValueError(f"lattice is not a certified ultrafractal ({verdict.status})")
    if x == y:
        return self_distance(cfg, x)[0]
    common = set(cfg.holding(x)) & set(cfg.holding(y))
    return min(cfg.weight(k) for k in common)


def ultra_matrix(cfg: KameyamaConfig, points) -> FiniteMetricSpace:
    pts = list(points)
    n = len(pts)
    d = np.empty((n, n), dtype=object)
    holds = [set(cfg.holding(p)) for p in pts]
    for i in range(n):
        d[i, i] = 0
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = min(cfg.weight(k) for k in holds[i] & holds[j])
    if not all(isinstance(v, (int, Fraction)) for v in d.flat):
        d = d.astype(float)
    return FiniteMetricSpace(tuple(range(n)), d)


@dataclass
class CoverCheck:
    ok: bool
    diameter: object
    word: tuple
    pieces: list


def doubling_cover_check(cfg: KameyamaConfig, points, subset) -> CoverCheck:
    """Split ``subset`` along the children of the deepest cylinder holding it
    and check each piece has diameter <= lambda * diam(subset).

    Points are assigned to the first child holding them, so there are at
    most |F| pieces.
    """
    lat = cfg.lattice
    backend = lat.backend
    sub = list(subset)
    holds = [set(cfg.holding(points[i])) for i in sub]
    common = set.intersection(*holds)
    best = ()
    for w, key in lat.word_keys.items():
        if len(w) < lat.depth and len(w) > len(best) and key in common:
            best = w
    space = ultra_matrix(cfg, [points[i] for i in sub])
    diam = space.diameter()
    pieces = {}
    for pos, i in enumerate(sub):
        for c in range(backend.n_maps):
            key = lat.word_keys[best + (c,)]
            if backend.contains(key, points[i]):
                pieces.setdefault(c, []).append(pos)
                break
        else:
            raise MembershipError(f"point {points[i]!r} lies in no child of {word_str(best)}")
    ok = len(pieces) <= backend.n_maps and all(
        space.diameter(p) <= cfg.lam * diam for p in pieces.values())
    return CoverCheck(ok, diam, best, [[sub[p] for p in ps] for ps in pieces.values()])


def is_strongly_ultrametric(space: FiniteMetricSpace) -> bool:
    return is_ultrametric(space)


def _check_point(p):
    if not isinstance(p, ExkamPoint):
        raise TypeError("expected an ExkamPoint")


def exkam_p(lam, a: ExkamPoint, b: ExkamPoint):
    """Exact bracket [lower, upper] for the chain distance in the system
    {z/2, cz/2, 1}: lambda^n against the origin and
    [max(lambda^n, lambda^m), lambda^n + lambda^m] between x_{n,k}, x_{m,q}."""
    _check_point(a)
    _check_point(b)
    if a == b:
        return (0, 0)
    if a.is_origin or b.is_origin:
        n = b.n if a.is_origin else a.n
        v = lam ** n
        return (v, v)
    u, v = lam ** a.n, lam ** b.n
    return (max(u, v), u + v)


def exkam_u(lam, a: ExkamPoint, b: ExkamPoint):
    """The companion ultrametric: max(lambda^n, lambda^m), lambda^n to 0."""
    _check_point(a)
    _check_point(b)
    if a == b:
        return 0
    if a.is_origin or b.is_origin:
        return lam ** (b.n if a.is_origin else a.n)
    return max(lam ** a.n, lam ** b.n)


def exkam_points(depth: int, with_origin: bool = True):
    pts = [ExkamPoint(n, k) for n in range(depth + 1) for k in range(n + 1)]
    return ([ExkamPoint()] if with_origin else []) + pts
