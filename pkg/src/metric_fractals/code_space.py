"""Address words, the order function and cylinder image lattices.

A word ``(i1, ..., in)`` stands for the composition f_i1 o ... o f_in and its
cylinder is the image f_w(X) of the attractor.  Cylinder images are handled
by *backends* that turn a word into a hashable canonical key and decide set
relations between keys.  Relations are one of

    equal, disjoint, subset, superset, overlap, unknown

where ``subset`` means "first is a proper subset of second" and ``overlap``
means the sets meet but neither contains the other.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .ifs_engine import IFS, AffineContraction, ComplexAffine, PiecewiseAffine, fixed_point, MAP_TOL, attractor_approx

OMEGA = math.inf

EQUAL, DISJOINT, SUBSET, SUPERSET, OVERLAP, UNKNOWN = (
    "equal", "disjoint", "subset", "superset", "overlap", "unknown")

_FLIP = {SUBSET: SUPERSET, SUPERSET: SUBSET}


def flip(rel: str) -> str:
    return _FLIP.get(rel, rel)


def weight(lam, order):
    """lambda ** order with lambda ** omega = 0."""
    return 0 if order == OMEGA else lam ** order


def words(n_maps: int, length: int):
    return itertools.product(range(n_maps), repeat=length)


def all_words(n_maps: int, depth: int):
    for k in range(depth + 1):
        yield from words(n_maps, k)


def word_str(w) -> str:
    return "".join(str(i) for i in w) if all(i < 10 for i in w) else ",".join(map(str, w))


def identity_map(dim: int, exact=True) -> AffineContraction:
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    return AffineContraction([[one if i == j else zero for j in range(dim)] for i in range(dim)],
                             [zero] * dim)


@dataclass
class CylinderDescriptor:
    word: tuple
    map: object
    kind: str  # "full", "singleton", "image" or "symbolic"
    order: float

    @property
    def is_singleton(self):
        return self.kind == "singleton"


def compose_word(ifs: IFS, w):
    """The composed map f_w, or ``None`` when the system is not affine."""
    if any(isinstance(f, PiecewiseAffine) for f in ifs.maps):
        return None
    if all(isinstance(f, ComplexAffine) for f in ifs.maps):
        g = ComplexAffine(1, 0)
    else:
        g = identity_map(ifs.dim, ifs.exact)
    for i in w:
        g = g.compose(ifs.maps[i])
    return g


def compose(ifs: IFS, w) -> CylinderDescriptor:
    w = tuple(w)
    for i in w:
        if not 0 <= i < len(ifs.maps):
            raise ValueError(f"letter {i} is not a map index")
    g = compose_word(ifs, w)
    if g is None:
        return CylinderDescriptor(w, None, "symbolic", len(w))
    if g.is_constant:
        return CylinderDescriptor(w, g, "singleton", OMEGA)
    return CylinderDescriptor(w, g, "full" if not w else "image", len(w))


def _map_key(g):
    if isinstance(g, ComplexAffine):
        return ("c", round(g.a.real, 9), round(g.a.imag, 9), round(g.b_c.real, 9), round(g.b_c.imag, 9))
    if g.exact:
        return tuple(g.A.ravel()) + tuple(g.b)
    return tuple(np.round(np.asarray(g.A, float).ravel(), 9)) + tuple(np.round(np.asarray(g.b, float), 9))


def _lip_bound(rho, lip_f):
    """Largest n with lip_f ** n >= rho, i.e. the longest possible word
    composing to a map with contraction factor rho."""
    if rho >= 1:
        return 0
    if lip_f == 0:
        return 0
    return math.floor(math.log(float(rho)) / math.log(float(lip_f)) + 1e-9)


def order_of(ifs: IFS, w, depth: int):
    """o(f_w) = the longest word composing to the same map.

    Constant maps have order omega.  Otherwise words up to
    ``min(depth, bound)`` are searched, where ``bound`` comes from the
    contraction factor; the answer is exact when ``bound <= depth``.
    Returns ``(order, exact)``.
    """
    w = tuple(w)
    if depth < len(w):
        raise ValueError("depth must be at least the word length")
    desc = compose(ifs, w)
    if desc.kind == "singleton":
        return OMEGA, True
    if desc.map is None:
        return len(w), False
    target = _map_key(desc.map)
    rho = desc.map.lip
    bound = _lip_bound(rho, ifs.lip)
    limit = min(depth, bound)
    best = len(w)
    # distinct composed maps by length, pruned by contraction factor
    level = {_map_key(compose_word(ifs, ())): compose_word(ifs, ())}
    slack = 1e-12
    for k in range(1, limit + 1):
        nxt = {}
        for g in level.values():
            for f in ifs.maps:
                h = g.compose(f)
                if h.lip < float(rho) * (1 - slack) and h.lip < rho:
                    continue
                nxt.setdefault(_map_key(h), h)
        level = nxt
        if target in level:
            best = max(best, k)
        if not level:
            break
    return best, bound <= depth


def _table_order(ifs, cache, word, depth):
    """order_of backed by a per-depth table of all composed maps."""
    g = compose_word(ifs, tuple(word))
    if g.is_constant:
        return OMEGA, True
    table = cache.get(depth)
    if table is None:
        table = {}
        level = [compose_word(ifs, ())]
        for k in range(depth + 1):
            nxt = {}
            for h in level:
                table[_map_key(h)] = k
                if k < depth:
                    for f in ifs.maps:
                        c = h.compose(f)
                        nxt.setdefault(_map_key(c), c)
            level = list(nxt.values())
        cache[depth] = table
    best = max(len(word), table.get(_map_key(g), len(word)))
    return best, _lip_bound(g.lip, ifs.lip) <= depth


# ---------------------------------------------------------------- backends


class CylinderBackend:
    """Interface for cylinder image semantics."""

    n_maps: int
    exact = True
    membership = "exact"

    def image(self, word):
        raise NotImplementedError

    def is_singleton(self, key) -> bool:
        raise NotImplementedError

    def contains(self, key, point):
        """True/False, or ``None`` when undecided."""
        raise NotImplementedError

    def relation(self, a, b) -> str:
        raise NotImplementedError

    def order(self, word, depth=None):
        """(order, exact) for the map of ``word``."""
        key = self.image(word)
        if self.is_singleton(key):
            return OMEGA, True
        return len(word), False

    def describe(self, key) -> str:
        return str(key)


def _interval_relation(a, b):
    """Relation of closed intervals; touching intervals overlap."""
    (a0, a1), (b0, b1) = a, b
    if a == b:
        return EQUAL
    if a1 < b0 or b1 < a0:
        return DISJOINT
    if b0 <= a0 and a1 <= b1:
        return SUBSET
    if a0 <= b0 and b1 <= a1:
        return SUPERSET
    return OVERLAP


class IntervalBackend(CylinderBackend):
    """Exact cylinder hulls for a 1-D rational IFS with increasing maps.

    Exact when the first-level hulls are pairwise disjoint (cylinders are
    then nested or disjoint exactly when their hulls are) or when they cover
    the hull of the attractor (the attractor is an interval).  Otherwise
    only hull disjointness and word prefixes are used.
    """

    def __init__(self, ifs: IFS):
        if ifs.dim != 1 or not ifs.exact:
            raise ValueError("interval backend needs an exact one-dimensional IFS")
        if any(f.A[0, 0] < 0 for f in ifs.maps):
            raise ValueError("interval backend needs non-decreasing maps")
        self.ifs = ifs
        self.n_maps = len(ifs.maps)
        fixes = [fixed_point(f)[0] for f in ifs.maps]
        self.hull = (min(fixes), max(fixes))
        level1 = sorted(self._hull_of(f) for f in ifs.maps)
        self.separated = all(level1[i][1] < level1[i + 1][0] for i in range(len(level1) - 1))
        lo, hi = self.hull
        reach = lo
        for a, b in level1:
            if a > reach:
                break
            reach = max(reach, b)
        self.convex = reach >= hi
        self.mode = "separated" if self.separated else "convex" if self.convex else "general"
        self.exact = self.mode != "general"
        self._words = {}
        self._order_tables = {}

    def _hull_of(self, g):
        lo, hi = self.hull
        return (g.A[0, 0] * lo + g.b[0], g.A[0, 0] * hi + g.b[0])

    def image(self, word):
        g = compose_word(self.ifs, tuple(word))
        key = self._hull_of(g)
        self._words.setdefault(key, set()).add(tuple(word))
        return key

    def is_singleton(self, key):
        return key[0] == key[1]

    def singleton_point(self, key):
        return key[0]

    def contains(self, key, point):
        x = _scalar(point)
        inside = key[0] <= x <= key[1]
        if self.mode != "general" or not inside:
            return inside
        return None

    def relation(self, a, b):
        if a == b:
            return EQUAL
        if self.mode == "separated":
            return _interval_relation(a, b)
        if self.mode == "convex":
            return _interval_relation(a, b)
        if a[1] < b[0] or b[1] < a[0]:
            return DISJOINT
        wa, wb = self._words.get(a, ()), self._words.get(b, ())
        if any(v[:len(u)] == u for u in wa for v in wb):
            return SUPERSET
        if any(u[:len(v)] == v for u in wa for v in wb):
            return SUBSET
        return UNKNOWN

    def order(self, word, depth=None):
        depth = len(word) if depth is None else max(depth, len(word))
        return _table_order(self.ifs, self._order_tables, word, depth)

    def describe(self, key):
        return f"[{key[0]}, {key[1]}]"


def _scalar(point):
    if isinstance(point, (tuple, list, np.ndarray)):
        return point[0]
    return point


@dataclass(frozen=True)
class ExkamPoint:
    """The origin (``n is None``) or x_{n,k} = c^k / 2^n with 0 <= k <= n."""

    n: int | None = None
    k: int = 0

    def __post_init__(self):
        if self.n is not None and not 0 <= self.k <= self.n:
            raise ValueError(f"invalid point index ({self.n}, {self.k})")

    @property
    def is_origin(self):
        return self.n is None

    def value(self, c: complex = complex(math.cos(1), math.sin(1))) -> complex:
        return 0j if self.n is None else c ** self.k / 2 ** self.n


ORIGIN = ExkamPoint()


class ExKamBackend(CylinderBackend):
    """Closed-form cylinders of the system {z/2, cz/2, 1} with c^n != 1.

    Letters 0, 1, 2 are the three maps.  A word with a 2 has a singleton
    image; otherwise its image is X_{m,j} with m = length and j = number of
    ones.
    """

    n_maps = 3

    def image(self, word):
        word = tuple(word)
        if 2 in word:
            u = word[:word.index(2)]
            return ("pt", len(u), sum(1 for i in u if i == 1))
        return ("X", len(word), sum(1 for i in word if i == 1))

    def is_singleton(self, key):
        return key[0] == "pt"

    def singleton_point(self, key):
        return ExkamPoint(key[1], key[2])

    def contains(self, key, point):
        if not isinstance(point, ExkamPoint):
            raise TypeError("points of this backend are ExkamPoint instances")
        if key[0] == "pt":
            return not point.is_origin and (point.n, point.k) == key[1:]
        _, m, j = key
        if point.is_origin:
            return True
        return point.n >= m and j <= point.k <= j + point.n - m

    @staticmethod
    def _x_subset(a, b):
        (m, j), (m2, j2) = a, b
        return m >= m2 and j >= j2 and j - j2 <= m - m2

    def relation(self, a, b):
        if a == b:
            return EQUAL
        if a[0] == "pt" and b[0] == "pt":
            return DISJOINT
        if a[0] == "pt":
            return SUBSET if self.contains(b, ExkamPoint(*a[1:])) else DISJOINT
        if b[0] == "pt":
            return flip(self.relation(b, a))
        if self._x_subset(a[1:], b[1:]):
            return SUBSET
        if self._x_subset(b[1:], a[1:]):
            return SUPERSET
        return OVERLAP

    def order(self, word, depth=None):
        if 2 in word:
            return OMEGA, True
        return len(word), True

    def describe(self, key):
        return f"x_{{{key[1]},{key[2]}}}" if key[0] == "pt" else f"X_{{{key[1]},{key[2]}}}"


class NumericBackend(CylinderBackend):
    """Sampled cylinders with certified sample width.

    Only disjointness (samples farther apart than their widths), equality
    of composed maps and prefix containment are certified; everything else
    is ``unknown``.  Membership is numeric: within the certificate width of
    the sample.
    """

    exact = False
    membership = "numeric"

    def __init__(self, ifs: IFS, sample_depth: int = 6, seed_point=None):
        self.ifs = ifs
        self.n_maps = len(ifs.maps)
        seed = np.zeros((1, ifs.dim)) if seed_point is None else np.atleast_2d(seed_point)
        approx = attractor_approx(ifs, np.asarray(seed, float), sample_depth)
        self.sample = np.asarray(approx.points, float)
        self.width = float(approx.certificate)
        self._words = {}
        self._order_tables = {}

    def image(self, word):
        word = tuple(word)
        g = compose_word(self.ifs, word)
        if g.is_constant:
            pt = np.asarray(g(np.zeros((1, self.ifs.dim)), ), float)[0]
            key = ("pt", tuple(np.round(pt, 9)))
        else:
            key = ("map", _map_key(g))
        self._words.setdefault(key, (g, set()))[1].add(word)
        return key

    def is_singleton(self, key):
        return key[0] == "pt"

    def singleton_point(self, key):
        return np.array(key[1])

    def _cloud(self, key):
        g, _ = self._words[key]
        pts = np.asarray(g(self.sample), float)
        return pts, float(g.lip) * self.width

    def contains(self, key, point):
        pts, w = self._cloud(key)
        dist = np.sqrt(((pts - np.asarray(point, float)) ** 2).sum(-1)).min()
        return bool(dist <= w + MAP_TOL)

    def relation(self, a, b):
        if a == b:
            return EQUAL
        pa, wa = self._cloud(a)
        pb, wb = self._cloud(b)
        from scipy.spatial import cKDTree
        gap = cKDTree(pb).query(pa)[0].min()
        if gap > wa + wb + MAP_TOL:
            return DISJOINT
        ua, ub = self._words[a][1], self._words[b][1]
        if any(v[:len(u)] == u for u in ua for v in ub):
            return SUPERSET
        if any(u[:len(v)] == v for u in ua for v in ub):
            return SUBSET
        return UNKNOWN

    def order(self, word, depth=None):
        depth = len(word) if depth is None else max(depth, len(word))
        return _table_order(self.ifs, self._order_tables, word, depth)


class ProductBackend(CylinderBackend):
    """Cylinders of the product system built by :func:`product_structure`.

    Letter 0 is the level shift, letter i >= 1 acts as base map i - 1 on
    level 0.  Points are pairs ``(x, level)``.
    """

    def __init__(self, base: CylinderBackend, base_ifs: IFS, n_levels: int):
        self.base = base
        self.base_ifs = base_ifs
        self.n = n_levels
        self.n_maps = base.n_maps + 1
        self.exact = base.exact
        self.fixes = [fixed_point(f)[0] for f in base_ifs.maps]

    def _evaluate(self, word, point):
        x, t = point
        for i in reversed(word):
            if i == 0:
                x, t = (x, t + 1) if t < self.n - 1 else (self.fixes[0], self.n - 1)
            else:
                f = self.base_ifs.maps[i - 1]
                x, t = (f.A[0, 0] * x + f.b[0], 0) if t == 0 else (self.fixes[i - 1], 0)
        return x, t

    def image(self, word):
        word = tuple(word)
        s = 0
        while s < len(word) and word[s] == 0:
            s += 1
        rest = word[s:]
        if s >= self.n or 0 in rest:
            return ("pt", self._evaluate(word, (self.fixes[0], 0)))
        if not rest:
            return ("cyl", self.base.image(()), (s, self.n - 1))
        base_key = self.base.image(tuple(i - 1 for i in rest))
        if self.base.is_singleton(base_key):
            return ("pt", (self.base.singleton_point(base_key), s))
        return ("cyl", base_key, (s, s))

    def is_singleton(self, key):
        return key[0] == "pt"

    def singleton_point(self, key):
        return key[1]

    def contains(self, key, point):
        x, t = point
        if key[0] == "pt":
            return key[1] == (x, t)
        lo, hi = key[2]
        if not lo <= t <= hi:
            return False
        return self.base.contains(key[1], x)

    def relation(self, a, b):
        if a == b:
            return EQUAL
        if a[0] == "pt" and b[0] == "pt":
            return DISJOINT
        if a[0] == "pt":
            inside = self.contains(b, a[1])
            return UNKNOWN if inside is None else SUBSET if inside else DISJOINT
        if b[0] == "pt":
            return flip(self.relation(b, a))
        rb = self.base.relation(a[1], b[1])
        rl = _interval_relation(a[2], b[2])
        if DISJOINT in (rb, rl):
            return DISJOINT
        if UNKNOWN in (rb, rl):
            return UNKNOWN
        if rb == rl == EQUAL:
            return EQUAL
        if {rb, rl} <= {EQUAL, SUBSET}:
            return SUBSET
        if {rb, rl} <= {EQUAL, SUPERSET}:
            return SUPERSET
        return OVERLAP


def product_structure(ifs: IFS, n: int, depth: int = 3) -> IFS:
    """Fractal structure on X x {0, .., n-1} from one with disjoint images.

    Maps g_1..g_m act as f_i on level 0 and send other levels to the fixed
    point x_i on level 0; g_0 moves each level up by one and sends the top
    level to (x_1, n-1).  The first coordinate is the base space, the last
    one the level.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return ifs
    backend = IntervalBackend(ifs) if ifs.dim == 1 and ifs.exact else NumericBackend(ifs)
    keys = [backend.image((i,)) for i in range(len(ifs.maps))]
    for a, b in itertools.combinations(range(len(keys)), 2):
        rel = backend.relation(keys[a], keys[b])
        if rel != DISJOINT:
            raise ValueError(f"images of maps {a} and {b} are not disjoint ({rel})")
    d = ifs.dim
    exact = ifs.exact
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    fixes = [np.asarray(fixed_point(f)) for f in ifs.maps]

    def embed(A, b, t_coeff, t_off):
        big = [[A[i][j] for j in range(d)] + [zero] for i in range(d)] + [[zero] * d + [t_coeff]]
        return AffineContraction(big, list(b) + [t_off])

    zeros_d = [[zero] * d for _ in range(d)]
    ident = [[one if i == j else zero for j in range(d)] for i in range(d)]
    maps = []
    g0 = [(lvl, embed(ident, [zero] * d, one, one)) for lvl in range(n - 1)]
    g0.append((n - 1, embed(zeros_d, list(fixes[0]), zero, n - 1)))
    maps.append(PiecewiseAffine([(Fraction(l) if exact else float(l), f) for l, f in g0]))
    for f, x in zip(ifs.maps, fixes):
        A = f.A.tolist()
        branches = [(Fraction(0) if exact else 0.0, embed(A, list(f.b), zero, zero))]
        branches += [(Fraction(l) if exact else float(l), embed(zeros_d, list(x), zero, zero)) for l in range(1, n)]
        maps.append(PiecewiseAffine(branches))
    return IFS(maps)


# ----------------------------------------------------------------- lattice


@dataclass
class Verdict:
    status: str  # "yes", "no" or "unknown"
    witness: tuple | None
    depth: int
    unknown_pairs: int = 0

    def to_dict(self):
        w = None if self.witness is None else [word_str(x) for x in self.witness]
        return {"status": self.status, "witness": w, "depth": self.depth}


@dataclass
class KeyInfo:
    key: object
    words: list
    level: float
    order_exact: bool
    singleton: bool


@dataclass
class CylinderLattice:
    """All cylinders of words up to ``depth`` grouped by image."""

    backend: CylinderBackend
    depth: int
    word_keys: dict = field(default_factory=dict)
    nodes: dict = field(default_factory=dict)
    _rel: dict = field(default_factory=dict)

    def relation(self, a, b) -> str:
        if a == b:
            return EQUAL
        hit = self._rel.get((a, b))
        if hit is None:
            hit = self.backend.relation(a, b)
            self._rel[(a, b)] = hit
            self._rel[(b, a)] = flip(hit)
        return hit

    def keys(self):
        return list(self.nodes)

    def weight(self, key, lam):
        return weight(lam, self.nodes[key].level)

    def containing(self, point):
        """(keys whose image contains ``point``, undecided keys)."""
        yes, unknown = [], []
        for k in self.nodes:
            r = self.backend.contains(k, point)
            if r is None:
                unknown.append(k)
            elif r:
                yes.append(k)
        return yes, unknown

    def to_dict(self):
        keys = self.keys()
        index = {k: i for i, k in enumerate(keys)}
        rels = []
        for a, b in itertools.combinations(keys, 2):
            r = self.relation(a, b)
            if r != DISJOINT:
                rels.append([index[a], index[b], r])
        return {
            "depth": self.depth,
            "nodes": [
                {"image": self.backend.describe(k), "words": [word_str(w) for w in self.nodes[k].words],
                 "order": None if self.nodes[k].level == OMEGA else self.nodes[k].level,
                 "singleton": self.nodes[k].singleton}
                for k in keys
            ],
            "relations": rels,
        }


def build_lattice(backend: CylinderBackend, depth: int, max_words: int = 200_000) -> CylinderLattice:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    total = sum(backend.n_maps ** k for k in range(depth + 1))
    if total > max_words:
        raise ValueError(f"{total} words exceed the limit of {max_words}")
    lat = CylinderLattice(backend, depth)
    for w in all_words(backend.n_maps, depth):
        key = backend.image(w)
        lat.word_keys[w] = key
        info = lat.nodes.get(key)
        if info is None:
            info = lat.nodes[key] = KeyInfo(key, [], len(w), True, backend.is_singleton(key))
        info.words.append(w)
    for info in lat.nodes.values():
        if info.singleton:
            info.level, info.order_exact = OMEGA, True
            continue
        best, exact = 0, True
        for w in info.words:
            o, ex = backend.order(w, depth)
            if o > best:
                best = o
            exact = exact and ex
        info.level, info.order_exact = best, exact
    return lat


def is_ultrafractal(lat: CylinderLattice) -> Verdict:
    """Every two cylinders are disjoint or nested."""
    unknown = 0
    keys = lat.keys()
    for a, b in itertools.combinations(keys, 2):
        r = lat.relation(a, b)
        if r == OVERLAP:
            return Verdict("no", (lat.nodes[a].words[0], lat.nodes[b].words[0]), lat.depth)
        if r == UNKNOWN:
            unknown += 1
    return Verdict("unknown" if unknown else "yes", None, lat.depth, unknown)


def is_strict_ultrafractal(lat: CylinderLattice) -> Verdict:
    """Same-length cylinders are equal, disjoint, or one is a singleton."""
    unknown = 0
    for k in range(1, lat.depth + 1):
        by_key = {}
        for w in words(lat.backend.n_maps, k):
            by_key.setdefault(lat.word_keys[w], w)
        items = list(by_key.items())
        for (a, wa), (b, wb) in itertools.combinations(items, 2):
            if lat.nodes[a].singleton or lat.nodes[b].singleton:
                continue
            r = lat.relation(a, b)
            if r == DISJOINT:
                continue
            if r == UNKNOWN:
                unknown += 1
                continue
            return Verdict("no", (wa, wb), lat.depth)
    return Verdict("unknown" if unknown else "yes", None, lat.depth, unknown)


def make_backend(ifs: IFS, kind: str = "auto", **kw) -> CylinderBackend:
    """``interval``, ``exkam``, ``numeric`` or ``auto``."""
    if kind == "auto":
        kind = "interval" if ifs.dim == 1 and ifs.exact else "numeric"
    if kind == "interval":
        return IntervalBackend(ifs)
    if kind == "exkam":
        return ExKamBackend()
    if kind == "numeric":
        return NumericBackend(ifs, **kw)
    raise ValueError(f"unknown backend {kind!r}")
