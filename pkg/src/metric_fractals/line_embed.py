"""Bi-Hoelder embedding of doubling ultrametric spaces into the real line.

Points are grouped into closed balls of radius lambda^n.  Every ball at level
n gets an interval of length lambda^(n alpha); the intervals of its child
balls sit inside it, separated by gaps larger than
(lambda^alpha / epsilon) lambda^(n alpha).  A point goes to the left endpoint
of its deepest interval.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .metric_core import FiniteMetricSpace, MetricError, ultrametric_witness

MAX_LEVELS = 256


class InfeasibleError(ValueError):
    pass


@dataclass
class BallTree:
    """``levels[n]`` lists the closed lambda^n balls as sorted index tuples;
    ``parent[n][i]`` is the index of the level n-1 ball holding ball i."""

    space: FiniteMetricSpace
    lam: object
    levels: list
    parent: list

    @property
    def depth(self):
        return len(self.levels) - 1

    def children(self, n, i):
        return [j for j, p in enumerate(self.parent[n + 1]) if p == i]

    def child_counts(self):
        return [len(self.children(n, i)) for n in range(self.depth) for i in range(len(self.levels[n]))]

    @property
    def max_children(self):
        return max(self.child_counts(), default=1)

    def ball_of(self, n, x):
        for i, b in enumerate(self.levels[n]):
            if x in b:
                return i
        raise KeyError(x)


def ball_hierarchy(space: FiniteMetricSpace, lam, levels: int | None = None) -> BallTree:
    """Closed lambda^n balls for n = 0, 1, ... until all are singletons."""
    bad = ultrametric_witness(space)
    if bad is not None:
        raise MetricError("space is not an ultrametric", bad)
    if space.diameter() > 1 + space.eff_tol:
        raise ValueError("normalize the space to diameter <= 1")
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    d = space.dist
    tol = space.eff_tol
    cap = MAX_LEVELS if levels is None else levels
    out, parent = [], []
    r = Fraction(1) if isinstance(lam, Fraction) else 1.0
    for n in range(cap + 1):
        balls, seen = [], set()
        for x in range(space.n):
            if x in seen:
                continue
            b = tuple(y for y in range(space.n) if d[x, y] <= r + tol)
            seen.update(b)
            balls.append(b)
        balls.sort()
        if n == 0:
            parent.append([None] * len(balls))
        else:
            parent.append([next(i for i, p in enumerate(out[-1]) if b[0] in p) for b in balls])
        out.append(balls)
        if levels is None and all(len(b) == 1 for b in balls):
            break
        r = r * lam
    return BallTree(space, lam, out, parent)


def choose_alpha(lam, epsilon, D: int):
    """alpha = 1 when lambda < epsilon / ((1 + epsilon) D).

    lambda^alpha grows as alpha shrinks, so alpha = 1 is the only candidate
    in (0, 1] worth testing; otherwise the combination is infeasible.
    """
    if epsilon <= 0 or D < 1:
        raise ValueError("need epsilon > 0 and D >= 1")
    bound = epsilon / ((1 + epsilon) * D)
    if lam < bound:
        return Fraction(1) if isinstance(lam, Fraction) else 1.0
    raise InfeasibleError(
        f"lambda = {lam} >= epsilon / ((1 + epsilon) D) = {bound}; no alpha in (0, 1] works, "
        "increase epsilon or use a tree with fewer children per ball")


def _pow(lam, e):
    if isinstance(lam, Fraction) and isinstance(e, Fraction) and e.denominator == 1:
        return lam ** int(e)
    return float(lam) ** float(e)


@dataclass
class IntervalAssignment:
    tree: BallTree
    alpha: object
    epsilon: object
    intervals: dict = field(default_factory=dict)  # (level, ball index) -> (lo, hi)
    layouts: dict = field(default_factory=dict)  # (level, ball index) -> "padded" | "flush" | "single"

    def width(self, n):
        return _pow(self.tree.lam, self.alpha * n)

    def to_dict(self):
        return {f"{n}:{','.join(map(str, self.tree.levels[n][i]))}": [str(lo), str(hi)]
                for (n, i), (lo, hi) in sorted(self.intervals.items())}


def interval_assignment(tree: BallTree, alpha, epsilon) -> IntervalAssignment:
    """Nested intervals satisfying the length, nesting and gap conditions.

    Siblings are ordered by their smallest point index.  The default layout
    leaves equal gaps on both ends and between children; when that gap is
    too small the children are packed flush to both ends instead, which
    maximizes the gap between siblings.
    """
    lam_a = _pow(tree.lam, alpha)
    asg = IntervalAssignment(tree, alpha, epsilon)
    zero = Fraction(0) if isinstance(lam_a, Fraction) else 0.0
    asg.intervals[(0, 0)] = (zero, zero + 1)
    for n in range(tree.depth):
        w = asg.width(n)
        wc = asg.width(n + 1)
        need = lam_a / epsilon * w
        for i in range(len(tree.levels[n])):
            lo, hi = asg.intervals[(n, i)]
            kids = sorted(tree.children(n, i), key=lambda j: tree.levels[n + 1][j][0])
            k = len(kids)
            if k == 1:
                asg.intervals[(n + 1, kids[0])] = (lo, lo + wc)
                asg.layouts[(n, i)] = "single"
                continue
            spare = w - k * wc
            gap = spare / (k + 1)
            if gap > need:
                start, layout = lo + gap, "padded"
            else:
                gap = spare / (k - 1)
                start, layout = lo, "flush"
                if not gap > need:
                    raise InfeasibleError(
                        f"ball {tree.levels[n][i]} at level {n}: {k} children leave gap {gap} <= {need}")
            for pos, j in enumerate(kids):
                a = start + pos * (wc + gap)
                asg.intervals[(n + 1, j)] = (a, a + wc)
            asg.layouts[(n, i)] = layout
    return asg


def phi(asg: IntervalAssignment, x: int):
    """Left endpoint of the deepest interval around point ``x``."""
    tree = asg.tree
    if not 0 <= x < tree.space.n:
        raise KeyError(f"unknown point {x}")
    n = tree.depth
    return asg.intervals[(n, tree.ball_of(n, x))][0]


def embed(asg: IntervalAssignment):
    return [phi(asg, x) for x in range(asg.tree.space.n)]


@dataclass
class BoundReport:
    ok: bool
    lower_const: object
    upper_const: object
    violations: list


def verify_bounds(asg: IntervalAssignment) -> BoundReport:
    """(lambda^alpha / eps) d^alpha <= |phi x - phi y| <= lambda^-alpha d^alpha."""
    tree = asg.tree
    lam_a = _pow(tree.lam, asg.alpha)
    lo_c = lam_a / asg.epsilon
    hi_c = 1 / lam_a
    vals = embed(asg)
    bad = []
    for x, y in itertools.combinations(range(tree.space.n), 2):
        da = _pow(tree.space.dist[x, y], asg.alpha) if asg.alpha != 1 else tree.space.dist[x, y]
        gap = abs(vals[x] - vals[y])
        if not (lo_c * da <= gap <= hi_c * da):
            bad.append((x, y))
    return BoundReport(not bad, lo_c, hi_c, bad)


def holder_constants(asg: IntervalAssignment):
    """Smallest c with d^alpha / c <= |phi x - phi y| <= c d^alpha."""
    tree = asg.tree
    vals = embed(asg)
    c = 0
    for x, y in itertools.combinations(range(tree.space.n), 2):
        da = _pow(tree.space.dist[x, y], asg.alpha) if asg.alpha != 1 else tree.space.dist[x, y]
        gap = abs(vals[x] - vals[y])
        c = max(c, gap / da, da / gap)
    return c


class LipschitzError(ValueError):
    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


@dataclass
class ConjugateMap:
    """g(t) = min_s [g(s) + eps |t - s|] over samples s, clamped to [lo, hi]."""

    samples: list
    values: list
    epsilon: object
    lo: object
    hi: object

    def __call__(self, t):
        v = min(g + self.epsilon * abs(t - s) for s, g in zip(self.samples, self.values))
        return min(max(v, self.lo), self.hi)

    def breakpoints(self):
        """Kinks of the extension between consecutive samples."""
        pts = []
        order = sorted(zip(self.samples, self.values))
        for (s0, g0), (s1, g1) in zip(order, order[1:]):
            t = (g1 - g0 + self.epsilon * (s1 + s0)) / (2 * self.epsilon)
            if s0 <= t <= s1:
                pts.append(t)
        return [s for s, _ in order] + pts

    def to_dict(self):
        bp = sorted(set(self.breakpoints()))
        return {"epsilon": str(self.epsilon),
                "breakpoints": [[str(t), str(self(t))] for t in bp]}


def conjugate_contraction(asg: IntervalAssignment, fmap, epsilon=None) -> ConjugateMap:
    """Extend phi o f o phi^-1 from phi(X) to an eps-Lipschitz map of R.

    ``fmap`` sends point indices to point indices.
    """
    eps = asg.epsilon if epsilon is None else epsilon
    n = asg.tree.space.n
    vals = embed(asg)
    g = [vals[fmap[x]] for x in range(n)]
    for x, y in itertools.combinations(range(n), 2):
        if abs(g[x] - g[y]) > eps * abs(vals[x] - vals[y]):
            raise LipschitzError(f"conjugate is not {eps}-Lipschitz on points {x}, {y}", (x, y))
    lo, hi = asg.intervals[(0, 0)]
    return ConjugateMap(vals, g, eps, lo, hi)


def lipschitz_ratio(space: FiniteMetricSpace, fmap):
    """max d(f x, f y) / d(x, y) over distinct points."""
    best = 0
    for x, y in itertools.combinations(range(space.n), 2):
        if space.dist[x, y] > 0:
            best = max(best, space.dist[fmap[x], fmap[y]] / space.dist[x, y])
    return best


def conjugation_law(asg: IntervalAssignment, fmap):
    """(Lip of phi f phi^-1 on phi(X), c^2 Lip(f)^alpha)."""
    vals = embed(asg)
    n = asg.tree.space.n
    lhs = 0
    for x, y in itertools.combinations(range(n), 2):
        lhs = max(lhs, abs(vals[fmap[x]] - vals[fmap[y]]) / abs(vals[x] - vals[y]))
    c = holder_constants(asg)
    lip = lipschitz_ratio(asg.tree.space, fmap)
    return lhs, c * c * _pow(lip, asg.alpha) if asg.alpha != 1 else c * c * lip


# ------------------------------------------------------- random test inputs


def random_ball_tree_space(rng, lam, D: int, max_points: int = 64, max_level: int = 6):
    """Random ultrametric whose lambda-ball tree branches at most D ways.

    An internal node at level l separates its children at a height in
    (lambda^(l+1), lambda^l]; children sit one to two levels deeper.
    """
    lam = Fraction(lam)
    points = []
    d_entries = {}
    budget = [max_points]

    def grow(level):
        if budget[0] <= 1 or level >= max_level or (level > 0 and rng.random() < 0.2):
            budget[0] -= 1
            points.append(len(points))
            return [points[-1]]
        k = int(rng.integers(2, D + 1))
        k = min(k, budget[0])
        hi, lo = lam ** level, lam ** (level + 1)
        h = lo + (hi - lo) * Fraction(int(rng.integers(1, 9)), 8)
        groups = []
        for _ in range(k):
            if budget[0] <= 0:
                break
            groups.append(grow(level + 1 + int(rng.integers(0, 2))))
        for a, b in itertools.combinations(groups, 2):
            for x in a:
                for y in b:
                    d_entries[(x, y)] = h
        return [x for g in groups for x in g]

    grow(0)
    n = len(points)
    d = [[Fraction(0)] * n for _ in range(n)]
    for (x, y), v in d_entries.items():
        d[x][y] = d[y][x] = v
    return FiniteMetricSpace.from_matrix(d, ultrametric=True)


def random_lipschitz_map(tree: BallTree, rng):
    """A map sending each lambda^n ball into a lambda^(n+1) ball.

    Points split at level n + 1 land in a common lambda^(n+2) ball, so the
    map is lambda-Lipschitz.
    """
    space = tree.space
    lam = tree.lam
    d = space.dist
    out = {}

    def ball(p, level, within):
        r = lam ** level
        return [q for q in within if d[p, q] <= r]

    def assign(group, level, target):
        # group: a lambda^level ball; target: a lambda^(level + 1) ball
        if len(group) == 1:
            out[group[0]] = target[int(rng.integers(0, len(target)))]
            return
        anchor = target[int(rng.integers(0, len(target)))]
        inner = ball(anchor, level + 2, target)
        rest = list(group)
        while rest:
            sub = ball(rest[0], level + 1, rest)
            rest = [q for q in rest if q not in sub]
            assign(sub, level + 1, inner)

    everything = list(range(space.n))
    anchor = int(rng.integers(0, space.n))
    assign(everything, 0, ball(anchor, 1, everything))
    return [out[x] for x in range(space.n)]
