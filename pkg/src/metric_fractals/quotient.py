"""A quotient pseudometric on truncated code space.

Codes of length N are mapped to weighted indicator vectors chi(code) on the
coordinates (n, code[:n]), n <= N, with weight c^n.  Pairs of codes that
address the same point span a relation subspace; p_c(x, y) is the norm of
chi(x) - chi(y) modulo that subspace.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .ifs_engine import IFS, attractor_approx, fixed_point

EXACT, CANDIDATE = "exact", "candidate"


@dataclass
class TruncatedCodeMeasure:
    n_letters: int
    depth: int
    c: float

    def __post_init__(self):
        if not 0 < self.c < 1:
            raise ValueError("c must lie in (0, 1)")
        if self.depth < 0 or self.n_letters < 1:
            raise ValueError("need depth >= 0 and at least one letter")

    @property
    def n_coords(self) -> int:
        return sum(self.n_letters ** n for n in range(self.depth + 1))

    @property
    def total_mass(self):
        return sum((self.n_letters * self.c) ** n for n in range(self.depth + 1))

    def weight(self, n: int):
        return self.c ** n


def _check_code(code, measure):
    code = tuple(code)
    if len(code) != measure.depth:
        raise ValueError(f"code length {len(code)} differs from depth {measure.depth}")
    if any(not 0 <= a < measure.n_letters for a in code):
        raise ValueError(f"code {code} uses letters outside the alphabet")
    return code


def chi(code, measure: TruncatedCodeMeasure) -> dict:
    """Indicator of the prefixes of ``code`` as {(n, prefix): 1}."""
    code = _check_code(code, measure)
    return {(n, code[:n]): 1 for n in range(measure.depth + 1)}


def chi_inner(a, b, measure: TruncatedCodeMeasure):
    """<chi(a), chi(b)> under the weights c^n."""
    a, b = _check_code(a, measure), _check_code(b, measure)
    L = common_prefix(a, b)
    return sum(measure.weight(n) for n in range(L + 1))


def common_prefix(a, b) -> int:
    L = 0
    for x, y in zip(a, b):
        if x != y:
            break
        L += 1
    return L


def closed_form_sq(a, b, measure: TruncatedCodeMeasure):
    """||chi(a) - chi(b)||^2 = 2 sum_{L < n <= N} c^n."""
    L = common_prefix(a, b)
    return 2 * sum(measure.weight(n) for n in range(L + 1, measure.depth + 1))


def code_point(ifs: IFS, code):
    """The point addressed by ``code`` followed by its last letter forever."""
    code = tuple(code)
    if not code:
        raise ValueError("empty code")
    p = np.asarray(fixed_point(ifs.maps[code[-1]]))
    p = p.reshape(1, -1)
    for letter in reversed(code[:-1]):
        p = ifs.maps[letter](p)
    return p[0]


def glue_relations(ifs: IFS, depth: int, policy: str = EXACT, tol: float = 1e-9):
    """Code pairs (a, b), a < b, identified at depth N.

    ``exact``: both codes, continued by their last letter, address the same
    point (exact equality for exact systems, ``tol`` otherwise).
    ``candidate``: the balls B(f_w(center), Lip_w * R) around the two
    cylinders meet, where B(center, R) holds the attractor; this is a
    superset of all true gluings.
    """
    codes = list(itertools.product(range(len(ifs.maps)), repeat=depth))
    if policy == EXACT:
        groups = {}
        for code in codes:
            p = code_point(ifs, code)
            if ifs.exact:
                key = tuple(p)
            else:
                key = tuple(np.round(np.asarray(p, float) / tol).astype(np.int64))
            groups.setdefault(key, []).append(code)
        pairs = []
        for g in groups.values():
            pairs.extend(itertools.combinations(sorted(g), 2))
        return sorted(pairs)
    if policy != CANDIDATE:
        raise ValueError(f"unknown policy {policy!r}")
    centers, radii = _cylinder_balls(ifs, codes)
    pairs = []
    for i, j in itertools.combinations(range(len(codes)), 2):
        if np.linalg.norm(centers[i] - centers[j]) <= radii[i] + radii[j] + tol:
            pairs.append((codes[i], codes[j]))
    return pairs


def _cylinder_balls(ifs, codes):
    lips = [float(f.lip) for f in ifs.maps]
    approx = attractor_approx(ifs, [fixed_point(ifs.maps[0])], 6)
    pts = np.asarray(approx.points, float)
    center = (pts.min(axis=0) + pts.max(axis=0)) / 2
    R = float(np.linalg.norm(pts - center, axis=1).max()) + float(approx.certificate)
    centers, radii = [], []
    for code in codes:
        p = center.reshape(1, -1).astype(object) if ifs.exact else center.reshape(1, -1)
        for letter in reversed(code):
            p = ifs.maps[letter](p)
        centers.append(np.asarray(p[0], float))
        radii.append(R * math.prod(lips[a] for a in code))
    return np.array(centers), radii


@dataclass
class QuotientMetric:
    """p_c on depth-N codes modulo the span of the given relations."""

    measure: TruncatedCodeMeasure
    relations: list
    rank_tol: float = 1e-12
    index: dict = field(default_factory=dict, repr=False)
    basis: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        for a, b in self.relations:
            for code in (a, b):
                for n in range(self.measure.depth + 1):
                    self.index.setdefault((n, tuple(code[:n])), len(self.index))
        vecs = [self._dense(a, b) for a, b in self.relations]
        self.basis = _orthonormal(vecs, len(self.index), self.rank_tol)

    @property
    def rank(self) -> int:
        return len(self.basis)

    def _scale(self, n):
        return math.sqrt(self.measure.weight(n))

    def _dense(self, a, b):
        v = np.zeros(len(self.index))
        for sign, code in ((1.0, a), (-1.0, b)):
            for n in range(self.measure.depth + 1):
                v[self.index[(n, tuple(code[:n]))]] += sign * self._scale(n)
        return v

    def distance(self, x, y) -> float:
        x, y = _check_code(x, self.measure), _check_code(y, self.measure)
        inside = np.zeros(len(self.index))
        outside = 0.0
        for sign, code in ((1.0, x), (-1.0, y)):
            for n in range(common_prefix(x, y) + 1, self.measure.depth + 1):
                k = self.index.get((n, code[:n]))
                if k is None:
                    outside += self.measure.weight(n)
                else:
                    inside[k] += sign * self._scale(n)
        for _ in range(2):
            for q in self.basis:
                inside -= (q @ inside) * q
        return math.sqrt(float(inside @ inside) + outside)

    def matrix(self, codes) -> np.ndarray:
        codes = list(codes)
        n = len(codes)
        d = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                d[i, j] = d[j, i] = self.distance(codes[i], codes[j])
        return d


def _orthonormal(vecs, dim, rank_tol):
    """Modified Gram-Schmidt with a second pass; drops dependent vectors."""
    basis = []
    for v in vecs:
        w = np.array(v, float)
        scale = np.linalg.norm(w)
        if scale == 0:
            continue
        for _ in range(2):
            for q in basis:
                w -= (q @ w) * q
        nrm = np.linalg.norm(w)
        if nrm > rank_tol * scale:
            basis.append(w / nrm)
    return np.array(basis).reshape(len(basis), dim)


def quotient_metric(ifs: IFS, c, depth: int, policy: str = EXACT, tol: float = 1e-9) -> QuotientMetric:
    measure = TruncatedCodeMeasure(len(ifs.maps), depth, c)
    return QuotientMetric(measure, glue_relations(ifs, depth, policy, tol))


def p_c(ifs: IFS, c, depth: int, x, y, policy: str = EXACT) -> float:
    return quotient_metric(ifs, c, depth, policy).distance(x, y)


def stabilization_probe(ifs: IFS, c, x, y, depths=range(4, 11), policy: str = EXACT):
    """p_c of the prefixes of two long codes across depths."""
    out = []
    for N in depths:
        if len(x) < N or len(y) < N:
            raise ValueError("codes shorter than the largest depth")
        out.append((N, quotient_metric(ifs, c, N, policy).distance(x[:N], y[:N])))
    return out


def to_dict(qm: QuotientMetric, codes, values):
    return {"c": qm.measure.c, "depth": qm.measure.depth,
            "pairs": [["".join(map(str, a)), "".join(map(str, b))] for a, b in qm.relations],
            "values": [[float(v) for v in row] for row in values],
            "codes": ["".join(map(str, a)) for a in codes]}
