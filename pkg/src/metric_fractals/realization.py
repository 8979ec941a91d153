"""A fractal structure on X = Z u Y with Z inside K x K and Y inside [0,1]^d.

Cantor points are finite binary strings ``s`` standing for
x_s = sum 2 s_i / 3^(i+1) (trailing zeros are dropped by :func:`normalize`).
Points of K x K are pairs of such strings.  Z is K x S_0 plus finitely many
extra points, where S_0 = {0} u {x_(0^n 1)}.

Rectangles K_p x K_q are addressed by the string pair ``(p, q)``; lengths
matter there, so rectangle strings are never normalized.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .code_space import (CylinderBackend, CylinderLattice, KeyInfo, EQUAL, DISJOINT, SUBSET, SUPERSET,
                         OVERLAP, UNKNOWN, OMEGA, flip, all_words)

# ------------------------------------------------------------ binary strings


def normalize(s: str) -> str:
    return s.rstrip("0")


def prefix(s: str, k: int) -> str:
    """First k letters of s0^omega."""
    return (s + "0" * k)[:k]


def cantor_value(s: str) -> Fraction:
    return sum((Fraction(2, 3 ** (i + 1)) for i, c in enumerate(s) if c == "1"), Fraction(0))


def even_part(s: str) -> str:
    return s[0::2]


def odd_part(s: str) -> str:
    return s[1::2]


def even_odd_split(s: str):
    return even_part(s), odd_part(s)


def interleave(even: str, odd: str) -> str:
    """Inverse of :func:`even_odd_split` (requires len(odd) <= len(even) <= len(odd) + 1)."""
    if not len(odd) <= len(even) <= len(odd) + 1:
        raise ValueError("part lengths do not come from one string")
    out = []
    for i, c in enumerate(even):
        out.append(c)
        if i < len(odd):
            out.append(odd[i])
    return "".join(out)


def iterated_even(s: str, i: int) -> str:
    for _ in range(i):
        s = even_part(s)
    return s


def leading_zeros(s: str) -> int:
    return len(s) - len(s.lstrip("0"))


def point_value(z):
    """Rational coordinates of a point of K x K."""
    return cantor_value(z[0]), cantor_value(z[1])


def _in_cyl(s: str, p: str) -> bool:
    return prefix(s, len(p)) == p


def _is_s0(b: str) -> bool:
    return b == "" or b == "0" * (len(b) - 1) + "1"


def _check_bits(s):
    if any(c not in "01" for c in s):
        raise ValueError(f"{s!r} is not a binary string")


# ----------------------------------------------------------------- the space


class ZSpace:
    """K x S_0 together with finitely many extra points off K x S_0."""

    def __init__(self, extras=()):
        cleaned = set()
        for a, b in extras:
            _check_bits(a)
            _check_bits(b)
            z = (normalize(a), normalize(b))
            if _is_s0(z[1]):
                raise ValueError(f"extra point {z} already lies in K x S_0")
            cleaned.add(z)
        self.extras = tuple(sorted(cleaned))

    def contains(self, z) -> bool:
        return _is_s0(z[1]) or z in self.extras

    def level_of(self, z):
        """gamma with z in Z^gamma, or None on K x {0}."""
        a, b = z
        if b == "":
            return None
        return prefix(a, leading_zeros(b))

    def base_in_rect(self, p: str, q: str) -> bool:
        """Does K_p x K_q meet K x S_0?"""
        return _s0_hits(q)

    def extras_in(self, p, q):
        return [z for z in self.extras if _in_cyl(z[0], p) and _in_cyl(z[1], q)]

    def rect_nonempty(self, p, q) -> bool:
        return self.base_in_rect(p, q) or bool(self.extras_in(p, q))

    def representative(self, gamma: str, a: str, b: str):
        """The chosen point z^gamma_(a,b) of a non-empty rectangle."""
        p, q = gamma + a, "0" * len(gamma) + "1" + b
        if "1" not in b:
            return normalize(p), normalize("0" * len(gamma) + "1")
        inside = self.extras_in(p, q)
        if not inside:
            raise ValueError(f"rectangle ({p}, {q}) is empty")
        return inside[0]

    # node tree used to describe cylinder images

    def children(self, p: str, q: str):
        m = leading_zeros(q)
        if m == len(q) and len(q) == len(p):
            return [(p + "0", q + "0"), (p + "1", q + "0"), (p, q + "1")]
        if "1" not in q:
            raise ValueError(f"({p}, {q}) is not a tree node")
        a, b = p[m:], q[m + 1:]
        if len(a) == len(b):
            return [(p + "0", q), (p + "1", q)]
        return [(p, q + "0"), (p, q + "1")]

    def node_points(self, p, q):
        """Finite node: its points; infinite node: ``None``."""
        if self.base_in_rect(p, q):
            return None
        return self.extras_in(p, q)

    def canonical(self, p, q):
        """Canonical key of the set Z n K_p x K_q for a tree node, or None if empty."""
        pts = self.node_points(p, q)
        if pts is not None:
            return _finite_key(pts)
        while True:
            kids = [c for c in self.children(p, q) if self.rect_nonempty(*c)]
            if len(kids) != 1:
                return ("node", p, q)
            p, q = kids[0]

    def key_contains(self, key, z) -> bool:
        if key[0] == "node":
            return self.contains(z) and _in_cyl(z[0], key[1]) and _in_cyl(z[1], key[2])
        if key[0] == "pt":
            return key[1] == z
        return z in key[1]

    def node_representatives(self, p, q, levels: int = 2):
        """Representative points of the non-empty descendants of a node."""
        out = set()
        frontier = [(p, q)]
        for _ in range(levels + 1):
            nxt = []
            for node in frontier:
                if not self.rect_nonempty(*node):
                    continue
                out.update(self.extras_in(*node))
                if self.base_in_rect(*node):
                    out.add(_base_point(*node))
                nxt.extend(self.children(*node))
            frontier = nxt
        return sorted(out)

    def to_dict(self):
        return {"extras": [list(z) for z in self.extras]}

    @classmethod
    def from_dict(cls, data):
        return cls([tuple(z) for z in data.get("extras", [])])


def _s0_hits(q: str) -> bool:
    """q = 0^n 1 0^k (so K_q contains the S_0 point x_(0^n 1))."""
    n = leading_zeros(q)
    return "1" not in q[n + 1:]


def _base_point(p, q):
    b = "" if "1" not in q else normalize(q)
    return normalize(p), b


def _finite_key(pts):
    pts = sorted(set(pts))
    if not pts:
        return None
    if len(pts) == 1:
        return ("pt", pts[0])
    return ("fin", frozenset(pts))


# ------------------------------------------------------------- retractions


def retract_r(z, zs: ZSpace):
    """Retraction of K x K onto Z through the deepest non-empty rectangle."""
    if zs.contains(z):
        return z
    a, b = z
    m = leading_zeros(b)
    gamma = prefix(a, m)
    ta, tb = a[m:], b[m + 1:]
    best = ("", "")
    limit = 2 * (len(a) + len(b) + max((len(e[0]) + len(e[1]) for e in zs.extras), default=0)) + 4
    for s in range(1, limit + 1):
        alpha, beta = prefix(ta, (s + 1) // 2), prefix(tb, s // 2)
        if not zs.rect_nonempty(gamma + alpha, "0" * m + "1" + beta):
            break
        best = (alpha, beta)
    return zs.representative(gamma, *best)


def retract_under(z, zs: ZSpace | None = None):
    """Z -> K x {0}: identity there, (x_gamma, 0) on Z^gamma."""
    a, b = z
    if b == "":
        return z
    return normalize(prefix(a, leading_zeros(b))), ""


def retract_gamma(gamma: str, z):
    """Z^gamma -> Z^gamma n K x S_0."""
    a, b = z
    m = len(gamma)
    if not (_in_cyl(a, gamma) and leading_zeros(b) == m and b != ""):
        raise ValueError(f"{z} is not in Z^{gamma or 'empty'}")
    if _is_s0(b):
        return z
    tail = b[m + 1:]
    beta = tail[:tail.index("1") + 1]
    alpha = prefix(a[m:], len(beta))
    return normalize(gamma + alpha), normalize("0" * m + "1")


def map_fi(i: int, z, zs: ZSpace):
    if i not in (0, 1):
        raise ValueError("i must be 0 or 1")
    a, b = z
    if b == "":
        return normalize(str(i) + a), ""
    m = leading_zeros(b)
    gamma = prefix(a, m)
    if not _is_s0(b):
        return map_fi(i, retract_gamma(gamma, z), zs)
    alpha = a[m:]
    return retract_r((normalize(str(i) + gamma + even_part(alpha)),
                      normalize("0" * m + "01" + odd_part(alpha))), zs)


def map_f2(z, zs: ZSpace):
    a, b = z
    if b != "":
        return map_f2(retract_under(z), zs)
    return retract_r((normalize(even_part(a)), normalize("1" + odd_part(a))), zs)


def apply_map(letter: int, z, zs: ZSpace):
    return map_f2(z, zs) if letter == 2 else map_fi(letter, z, zs)


def apply_word(word, z, zs: ZSpace):
    """f_w(z) = f_w0(f_w1(...(z)))."""
    for letter in reversed(tuple(word)):
        z = apply_map(letter, z, zs)
    return z


def preimage(word, target, zs: ZSpace):
    """A point of Z mapped onto ``target`` by f_w, or None."""
    t = target
    for letter in word:
        a, b = t
        if letter == 2:
            if b == "" or leading_zeros(b) != 0:
                return None
            t = (normalize(interleave(*_pad_pair(a, b[1:]))), "")
        else:
            if prefix(a, 1) != str(letter):
                return None
            if b == "":
                t = (normalize(a[1:]), "")
                continue
            m = leading_zeros(b)
            if m < 1:
                return None
            gp = prefix(a, m)[1:]
            ta, tb = a[m:], b[m + 1:]
            t = (normalize(gp + interleave(*_pad_pair(ta, tb))), normalize("0" * (m - 1) + "1"))
    if not zs.contains(t) or apply_word(word, t, zs) != target:
        return None
    return t


def _pad_pair(e, o):
    n = max(len(e), len(o) + 1)
    return prefix(e, n), prefix(o, n - 1)


FIXED_POINT_Z0 = ("", "")
FIXED_POINT_Z2 = ("", "1")
FIXED_POINT_Z1_VALUE = (Fraction(1), Fraction(0))


def fixed_points():
    """z0, z1, z2 as rational coordinates (z1 = (1, 0) has address 1^omega)."""
    return [point_value(FIXED_POINT_Z0), FIXED_POINT_Z1_VALUE, point_value(FIXED_POINT_Z2)]


# --------------------------------------------------------- cylinder images


def set_sample(key, zs: ZSpace, seed: int = 0, n_random: int = 24, levels: int = 3):
    """Points of a key set: representatives of the descendants a few levels
    down, extra points inside, and random points of the K x S_0 part."""
    if key[0] == "pt":
        return [key[1]]
    if key[0] == "fin":
        return sorted(key[1])
    _, p, q = key
    pts = set(zs.node_representatives(p, q, levels))
    if zs.base_in_rect(p, q):
        rng = np.random.default_rng([seed, len(p), len(q), int(p or "0", 2), int(q or "0", 2)])
        if "1" in q:
            bs = [normalize(q)]
        else:
            bs = [""] + ["0" * m + "1" for m in range(len(q), len(q) + 3)]
        for _ in range(n_random):
            a = normalize(p + "".join(rng.choice(["0", "1"], size=12)))
            pts.add((a, bs[int(rng.integers(0, len(bs)))]))
    return sorted(pts)


def hull_node(points, zs: ZSpace):
    """Smallest tree node holding all points."""
    p, q = "", ""
    while True:
        for c in zs.children(p, q):
            if all(_in_cyl(z[0], c[0]) and _in_cyl(z[1], c[1]) for z in points):
                p, q = c
                break
        else:
            return p, q


def image_key(points, zs: ZSpace):
    """Canonical key of the smallest node-described set holding ``points``."""
    pts = sorted(set(points))
    if len(pts) == 1:
        return ("pt", pts[0])
    p, q = hull_node(pts, zs)
    if zs.node_points(p, q) is None:
        return zs.canonical(p, q)
    return _finite_key(pts)


@dataclass
class ImageResult:
    key: object
    sample_size: int
    targets: int
    covered: int

    @property
    def verified(self):
        return self.targets == self.covered


class RealizationBackend(CylinderBackend):
    """Images f_w(Z) for words over {0, 1, 2}.

    f_w(Z) is found from f_(w[1:])(Z) by mapping a sample of that set with
    f_(w[0]), adding every extra point reachable by a preimage chain, and
    taking the smallest node-described set holding the result.
    """

    n_maps = 3

    def __init__(self, zs: ZSpace, seed: int = 0):
        self.zs = zs
        self.seed = seed
        self._keys = {(): ("node", "", "")}
        self._samples = {}

    def _mapped(self, word):
        hit = self._samples.get(word)
        if hit is None:
            inner = set_sample(self.image(word[1:]), self.zs, self.seed)
            hit = sorted({apply_map(word[0], z, self.zs) for z in inner})
            self._samples[word] = hit
        return hit

    def image(self, word):
        word = tuple(word)
        key = self._keys.get(word)
        if key is None:
            pts = set(self._mapped(word))
            for e in self.zs.extras:
                if e not in pts and preimage(word, e, self.zs) is not None:
                    pts.add(e)
            key = image_key(pts, self.zs)
            self._keys[word] = key
        return key

    def verify(self, word) -> ImageResult:
        """Check the mapped sample lies in the key set and every
        representative of the key set has a preimage under f_w."""
        word = tuple(word)
        key = self.image(word)
        if not word:
            return ImageResult(key, 0, 0, 0)
        sample = self._mapped(word)
        inside = all(self.zs.key_contains(key, z) for z in sample)
        targets = set_sample(key, self.zs, self.seed + 1, n_random=4, levels=2)
        hit = set(sample)
        covered = sum(1 for t in targets if t in hit or preimage(word, t, self.zs) is not None)
        return ImageResult(key, len(sample), len(targets), covered if inside else -1)

    def is_singleton(self, key):
        return key[0] == "pt"

    def singleton_point(self, key):
        return key[1]

    def contains(self, key, point):
        return self.zs.key_contains(key, point)

    def relation(self, a, b):
        if a == b:
            return EQUAL
        if a[0] != "node" or b[0] != "node":
            sa, sb = self._finite(a), self._finite(b)
            if sa is not None and sb is not None:
                return _set_relation(sa, sb)
            if sa is not None:
                inside = [self.zs.key_contains(b, z) for z in sa]
                return SUBSET if all(inside) else OVERLAP if any(inside) else DISJOINT
            return flip(self.relation(b, a))
        (_, p1, q1), (_, p2, q2) = a, b
        if _comparable(p1, p2) and _comparable(q1, q2):
            if len(p1) >= len(p2) and len(q1) >= len(q2):
                return SUBSET
            if len(p1) <= len(p2) and len(q1) <= len(q2):
                return SUPERSET
            return OVERLAP
        return DISJOINT

    @staticmethod
    def _finite(key):
        if key[0] == "pt":
            return {key[1]}
        if key[0] == "fin":
            return set(key[1])
        return None

    def describe(self, key):
        if key[0] == "node":
            return f"Z[{key[1]}|{key[2]}]"
        if key[0] == "pt":
            return f"{{{key[1]}}}"
        return "{" + ", ".join(map(str, sorted(key[1]))) + "}"


def _comparable(s, t):
    return s.startswith(t) or t.startswith(s)


def _set_relation(a: set, b: set):
    if a == b:
        return EQUAL
    if a < b:
        return SUBSET
    if b < a:
        return SUPERSET
    return OVERLAP if a & b else DISJOINT


def image_of_word(word, zs: ZSpace, backend: RealizationBackend | None = None):
    backend = backend or RealizationBackend(zs)
    return backend.image(tuple(word))


def image_case(word, zs: ZSpace):
    """(case, expected key) from the case table of non-singleton images.

    Words over {0,1} give the node (gamma, 0^|gamma|); 2 beta gives the
    rectangle (even(beta), 1 odd(beta)); alpha 2 beta with i = |alpha| > 0
    gives (alpha even(t), 0^i 1 odd(t)) where t is the i-fold even part of
    beta.  Words with two or more 2s must have singleton images.
    """
    w = "".join(map(str, word))
    twos = w.count("2")
    if twos == 0:
        return 1, zs.canonical(w, "0" * len(w))
    if twos > 1:
        return 0, None
    alpha, beta = w.split("2")
    if not alpha:
        return 2, zs.canonical(even_part(beta), "1" + odd_part(beta))
    t = iterated_even(beta, len(alpha))
    return 3, zs.canonical(alpha + even_part(t), "0" * len(alpha) + "1" + odd_part(t))


def matches_case_table(word, zs: ZSpace, backend: RealizationBackend):
    """Evaluated image is a singleton or equals the predicted set."""
    key = backend.image(tuple(word))
    case, expected = image_case(word, zs)
    if key[0] == "pt":
        return True
    return case != 0 and key == expected


# ---------------------------------------------------------------- the cubes


class CubeTree:
    """Dyadic closed cubes meeting a finite Y in [0,1]^d.

    A cube at level n is an integer vector k in [0, 2^n)^d standing for
    2^-n (k + [0,1]^d).  Binary strings are read d bits per level; the
    block value (most significant bit first) picks successor
    ``block mod count`` in lexicographic order.
    """

    def __init__(self, Y):
        pts = [tuple(Fraction(v) for v in y) for y in Y]
        if not pts:
            raise ValueError("Y must not be empty")
        if len(set(pts)) != len(pts):
            raise ValueError("points of Y must be distinct")
        d = len(pts[0])
        if any(len(y) != d for y in pts) or not all(0 <= v <= 1 for y in pts for v in y):
            raise ValueError("Y must lie in [0,1]^d")
        self.Y = pts
        self.d = d
        self._succ = {}

    def points_in(self, level, k):
        s = Fraction(1, 2 ** level)
        return tuple(i for i, y in enumerate(self.Y)
                     if all(k[j] * s <= y[j] <= (k[j] + 1) * s for j in range(self.d)))

    def successors(self, level, k):
        hit = self._succ.get((level, k))
        if hit is None:
            hit = []
            for off in itertools.product((0, 1), repeat=self.d):
                c = tuple(2 * k[j] + off[j] for j in range(self.d))
                if self.points_in(level + 1, c):
                    hit.append(c)
            hit.sort()
            self._succ[(level, k)] = hit
        return hit

    def phi(self, bits: str):
        if len(bits) % self.d:
            raise ValueError("bit string length must be a multiple of d")
        level, k = 0, (0,) * self.d
        for n in range(len(bits) // self.d):
            succ = self.successors(level, k)
            k = succ[int(bits[n * self.d:(n + 1) * self.d], 2) % len(succ)]
            level += 1
        return level, k

    def reach(self, bits: str):
        """Points of Y reached by infinite strings starting with ``bits``."""
        full = len(bits) - len(bits) % self.d
        rest = len(bits) - full
        out = set()
        tails = [""] if rest == 0 else ["".join(t) for t in itertools.product("01", repeat=self.d - rest)]
        for t in tails:
            level, k = self.phi(bits + t if rest else bits[:full])
            out.update(self.points_in(level, k))
        return frozenset(out)

    def boundary(self, bits: str) -> int:
        """Index of the point of Y picked by bits 0^omega."""
        s = bits + "0" * ((-len(bits)) % self.d)
        while True:
            level, k = self.phi(s)
            pts = self.points_in(level, k)
            if len(pts) == 1 and len(s) >= len(bits):
                return pts[0]
            s += "0" * self.d

    def cubes_near(self, x, n: int):
        """Cubes of level n at max-norm distance < 8 / 2^n from x."""
        side = Fraction(1, 2 ** n)
        ranges = []
        for j in range(self.d):
            lo = max(0, math.floor((x[j] - 8 * side) / side) - 1)
            hi = min(2 ** n - 1, math.ceil((x[j] + 8 * side) / side) + 1)
            ranges.append(range(lo, hi + 1))
        out = []
        for k in itertools.product(*ranges):
            dist = max(max(k[j] * side - x[j], x[j] - (k[j] + 1) * side, 0) for j in range(self.d))
            if dist < 8 * side:
                out.append(k)
        return out


def cube_tree(Y) -> CubeTree:
    return CubeTree(Y)


def map_f3(z, tree: CubeTree):
    a, _ = retract_under(z)
    return tree.Y[tree.boundary(a)]


# ------------------------------------------------------- the whole system


def default_lambda(d: int) -> Fraction:
    """Smallest of 1/2, 3/4, 4/5, ... with lambda^d >= 1/2."""
    for lam in (Fraction(1, 2), Fraction(3, 4), Fraction(4, 5), Fraction(7, 8), Fraction(9, 10)):
        if lam ** d >= Fraction(1, 2):
            return lam
    raise ValueError("dimension too large for the built-in choices")


class FullBackend(CylinderBackend):
    """Cylinders of {f0, f1, f2, f3} on X = Z u Y.

    Points are ``("Z", z)`` or ``("Y", i)`` with i an index into Y.
    """

    n_maps = 4

    def __init__(self, zback: RealizationBackend, tree: CubeTree):
        self.z = zback
        self.tree = tree

    def image(self, word):
        word = tuple(word)
        if not word:
            return ("X",)
        if 3 in word[1:]:
            return ("sing", word)
        if word[0] != 3:
            return ("Z", self.z.image(word))
        rest = word[1:]
        if 2 in rest:
            return ("sing", word)
        pts = self.tree.reach("".join(map(str, rest)))
        return ("Y", pts)

    def is_singleton(self, key):
        if key[0] == "sing":
            return True
        if key[0] == "Y":
            return len(key[1]) == 1
        if key[0] == "Z":
            return self.z.is_singleton(key[1])
        return False

    def contains(self, key, point):
        kind, val = point
        if key[0] == "X":
            return True
        if key[0] == "sing":
            return None
        if key[0] != kind:
            return False
        if kind == "Y":
            return val in key[1]
        return self.z.contains(key[1], val)

    def relation(self, a, b):
        if a == b:
            return EQUAL
        if a[0] == "X":
            return SUPERSET
        if b[0] == "X":
            return SUBSET
        if "sing" in (a[0], b[0]):
            return UNKNOWN
        if a[0] != b[0]:
            return DISJOINT
        if a[0] == "Y":
            return _set_relation(set(a[1]), set(b[1]))
        return self.z.relation(a[1], b[1])

    def describe(self, key):
        if key[0] == "Y":
            return "Y{" + ",".join(map(str, sorted(key[1]))) + "}"
        if key[0] == "Z":
            return self.z.describe(key[1])
        return str(key)


@dataclass
class FullStructure:
    zs: ZSpace
    tree: CubeTree
    lam: Fraction
    lattice: CylinderLattice
    z_depth: int

    @property
    def d(self):
        return self.tree.d

    @property
    def s(self) -> float:
        """The exponent with lambda^d = 2^-s."""
        return -self.d * math.log2(self.lam)

    @property
    def y3(self):
        return min(range(len(self.tree.Y)), key=lambda i: self.tree.Y[i])

    def config(self):
        from .kameyama import KameyamaConfig
        return KameyamaConfig(self.lam, self.lattice)


def full_structure(zs: ZSpace, Y, lam=None, z_depth: int = 6, seed: int = 0) -> FullStructure:
    """Assemble the four-map system and its cylinder lattice.

    Z cylinders come from words over {0,1,2} up to ``z_depth``; Y cylinders
    f3 f_alpha(X) from binary alpha, followed until they are single points.
    """
    tree = CubeTree(Y)
    lam = default_lambda(tree.d) if lam is None else Fraction(lam)
    if not 0 < lam < 1 or lam ** tree.d < Fraction(1, 2):
        raise ValueError("need 0 < lambda < 1 with lambda^d >= 1/2")
    zback = RealizationBackend(zs, seed)
    backend = FullBackend(zback, tree)
    lat = CylinderLattice(backend, z_depth)

    def add(word, key):
        lat.word_keys[word] = key
        info = lat.nodes.get(key)
        single = backend.is_singleton(key)
        if info is None:
            info = lat.nodes[key] = KeyInfo(key, [], OMEGA if single else len(word), True, single)
        info.words.append(word)
        if not single:
            info.level = max(info.level, len(word))

    for w in all_words(3, z_depth):
        add(w, backend.image(w))
    stack = [""]
    while stack:
        alpha = stack.pop()
        word = (3,) + tuple(int(c) for c in alpha)
        key = backend.image(word)
        add(word, key)
        if len(key[1]) > 1:
            stack.extend([alpha + "1", alpha + "0"])
    for info in lat.nodes.values():
        info.order_exact = info.singleton
    return FullStructure(zs, tree, lam, lat, z_depth)


def y_point(i):
    return ("Y", i)


def z_point(z):
    return ("Z", z)


def max_norm(x, y):
    return max(abs(a - b) for a, b in zip(x, y))


@dataclass
class CubeCoverReport:
    ok: bool
    n: int
    cubes: int
    covered: bool
    diam: object
    worst_piece: object


def cube_cover_check(fs: FullStructure, cfg, subset, dist) -> CubeCoverReport:
    """Cover a subset of Y by the cube family around its first point.

    ``dist`` is the p-distance matrix between the points of Y.
    """
    S = list(subset)
    x = S[0]
    M = max(dist[x][y] for y in S)
    diam = max(dist[a][b] for a in S for b in S)
    t = -math.log2(M) / fs.s
    n = max(0, math.ceil(t - 1e-12))
    cubes = fs.tree.cubes_near(fs.tree.Y[x], n)
    pieces = [fs.tree.points_in(n, k) for k in cubes]
    covered = all(any(y in p for p in pieces) for y in S)
    worst = max((max(dist[a][b] for a in p for b in p) for p in pieces if p), default=0)
    ok = covered and len(cubes) <= 17 ** fs.d and worst <= fs.lam * diam
    return CubeCoverReport(ok, n, len(cubes), covered, diam, worst)


def random_extras(rng, count: int = 6):
    """Extra points (a, b) with b off S_0."""
    out = set()
    while len(out) < count:
        a = "".join(rng.choice(["0", "1"], size=int(rng.integers(0, 5))))
        m = int(rng.integers(0, 3))
        tail = "".join(rng.choice(["0", "1"], size=int(rng.integers(0, 3)))) + "1"
        b = "0" * m + "1" + tail
        out.add((normalize(a), normalize(b)))
    return sorted(out)


def random_y(rng, count: int, d: int, denom: int = 8):
    pts = set()
    while len(pts) < count:
        pts.add(tuple(Fraction(int(rng.integers(0, denom + 1)), denom) for _ in range(d)))
    return sorted(pts)
