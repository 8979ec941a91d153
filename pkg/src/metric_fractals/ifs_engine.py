"""Affine contractions, Hutchinson iteration and attractor sampling."""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from .metric_core import as_point_set, hausdorff_distance, is_exact_value, parse_number, format_number

MAP_TOL = 1e-12


def _exact_matrix(m) -> bool:
    return all(is_exact_value(v) for v in np.asarray(m, dtype=object).ravel())


def _as_array(values, exact):
    if exact:
        arr = np.empty(np.shape(values), dtype=object)
        for idx, v in np.ndenumerate(np.asarray(values, dtype=object)):
            arr[idx] = Fraction(v)
        return arr
    return np.asarray(values, dtype=float)


class AffineContraction:
    """x -> A x + b on R^d.  Exact when every entry is rational."""

    def __init__(self, A, b):
        A = np.atleast_2d(np.asarray(A, dtype=object))
        b = np.atleast_1d(np.asarray(b, dtype=object))
        if A.shape != (b.shape[0], b.shape[0]):
            raise ValueError("A must be d x d and b of length d")
        self.exact = _exact_matrix(A) and _exact_matrix(b)
        self.A = _as_array(A, self.exact)
        self.b = _as_array(b, self.exact)

    @property
    def dim(self) -> int:
        return self.b.shape[0]

    @property
    def lip(self):
        """Operator 2-norm of A (exact for scalar multiples of the identity)."""
        A = self.A
        if self.exact:
            d = self.dim
            diag = A[0, 0]
            if all(A[i, j] == (diag if i == j else 0) for i in range(d) for j in range(d)):
                return abs(diag)
        return float(np.linalg.norm(np.asarray(A, dtype=float), 2))

    def __call__(self, points):
        pts = as_point_set(points)
        if self.exact and pts.dtype == object:
            return pts.dot(self.A.T) + self.b
        return np.asarray(pts, dtype=float) @ np.asarray(self.A, dtype=float).T + np.asarray(self.b, dtype=float)

    def compose(self, other: "AffineContraction") -> "AffineContraction":
        """self o other."""
        return AffineContraction(self.A.dot(other.A), self.A.dot(other.b) + self.b)

    @property
    def is_constant(self) -> bool:
        if self.exact:
            return all(v == 0 for v in self.A.ravel())
        return bool(np.allclose(np.asarray(self.A, dtype=float), 0, atol=MAP_TOL))

    def same_map(self, other, tol=MAP_TOL) -> bool:
        if not isinstance(other, AffineContraction) or other.dim != self.dim:
            return False
        if self.exact and other.exact:
            return bool((self.A == other.A).all() and (self.b == other.b).all())
        return bool(
            np.allclose(np.asarray(self.A, float), np.asarray(other.A, float), atol=tol)
            and np.allclose(np.asarray(self.b, float), np.asarray(other.b, float), atol=tol)
        )

    def to_dict(self):
        return {
            "A": [[format_number(v) for v in row] for row in self.A],
            "b": [format_number(v) for v in self.b],
        }

    def __repr__(self):
        return f"AffineContraction(A={self.A.tolist()}, b={self.b.tolist()})"


class ComplexAffine(AffineContraction):
    """z -> a z + b on the complex plane, acting on points of R^2."""

    def __init__(self, a, b):
        self.a = complex(a)
        self.b_c = complex(b)
        A = [[self.a.real, -self.a.imag], [self.a.imag, self.a.real]]
        super().__init__(np.asarray(A, dtype=float), np.asarray([self.b_c.real, self.b_c.imag]))

    @property
    def lip(self):
        return abs(self.a)

    def apply_complex(self, z):
        return self.a * z + self.b_c

    def compose(self, other):
        if isinstance(other, ComplexAffine):
            return ComplexAffine(self.a * other.a, self.a * other.b_c + self.b_c)
        return super().compose(other)

    @property
    def is_constant(self):
        return abs(self.a) <= MAP_TOL

    def to_dict(self):
        return {"complex": {"a": [self.a.real, self.a.imag], "b": [self.b_c.real, self.b_c.imag]}}

    def __repr__(self):
        return f"ComplexAffine(a={self.a}, b={self.b_c})"


class PiecewiseAffine:
    """Finitely many affine branches guarded by the value of one coordinate.

    Branch ``(level, f)`` applies to points whose coordinate ``axis`` equals
    ``level``.  Used for the discrete factor of product systems.
    """

    def __init__(self, branches, axis=-1, tol=MAP_TOL):
        self.branches = list(branches)
        self.axis = axis
        self.tol = tol
        self.exact = all(f.exact for _, f in self.branches)

    @property
    def dim(self):
        return self.branches[0][1].dim

    lip = None

    def branch_for(self, point):
        t = point[self.axis]
        for level, f in self.branches:
            if (t == level) if self.exact else abs(float(t) - float(level)) <= self.tol:
                return f
        raise ValueError(f"no branch covers level {t}")

    def __call__(self, points):
        pts = as_point_set(points)
        rows = [self.branch_for(p)(p.reshape(1, -1))[0] for p in pts]
        return np.array(rows, dtype=pts.dtype if self.exact else float)


@dataclass
class IFS:
    maps: list
    dim: int | None = None

    def __post_init__(self):
        if not self.maps:
            raise ValueError("an IFS needs at least one map")
        dims = {f.dim for f in self.maps}
        if len(dims) != 1:
            raise ValueError("maps act on different dimensions")
        self.dim = dims.pop()

    @property
    def lip(self):
        """Lip(F) = max Lip(f); ``None`` for topological (piecewise) systems."""
        lips = [f.lip for f in self.maps]
        if any(l is None for l in lips):
            return None
        return max(lips)

    @property
    def exact(self) -> bool:
        return all(getattr(f, "exact", False) for f in self.maps)

    def __len__(self):
        return len(self.maps)

    def to_dict(self):
        return {"dim": self.dim, "maps": [f.to_dict() for f in self.maps]}

    @classmethod
    def from_dict(cls, data):
        maps = []
        for m in data["maps"]:
            if "complex" in m:
                a = complex(*m["complex"]["a"])
                b = complex(*m["complex"]["b"])
                maps.append(ComplexAffine(a, b))
            else:
                A = [[parse_number(v) for v in row] for row in m["A"]]
                b = [parse_number(v) for v in m["b"]]
                maps.append(AffineContraction(A, b))
        return cls(maps)


def lipschitz_constant(f) -> float:
    """Largest singular value of the linear part (|a| for complex maps)."""
    return f.lip


def fixed_point(f, tol=1e-12):
    """Unique fixed point of a contraction: closed form when (I - A) is
    invertible, Banach iteration from the origin otherwise."""
    if isinstance(f, ComplexAffine):
        z = f.b_c / (1 - f.a)
        return np.array([z.real, z.imag])
    d = f.dim
    if f.exact:
        M = [[(1 if i == j else 0) - f.A[i, j] for j in range(d)] + [f.b[i]] for i in range(d)]
        sol = _solve_exact(M)
        if sol is not None:
            return np.array(sol, dtype=object)
    else:
        try:
            return np.linalg.solve(np.eye(d) - np.asarray(f.A, float), np.asarray(f.b, float))
        except np.linalg.LinAlgError:
            pass
    x = np.zeros((1, d))
    for _ in range(100000):
        nxt = f(x)
        if np.abs(np.asarray(nxt, float) - np.asarray(x, float)).max() <= tol:
            return nxt[0]
        x = nxt
    return x[0]


def _solve_exact(M):
    n = len(M)
    M = [row[:] for row in M]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return None
        M[c], M[piv] = M[piv], M[c]
        for r in range(n):
            if r != c and M[r][c] != 0:
                k = M[r][c] / M[c][c]
                M[r] = [a - k * b for a, b in zip(M[r], M[c])]
    return [M[i][n] / M[i][i] for i in range(n)]


def dedupe(points, radius=0):
    """Drop repeated points; float points within ``radius`` are merged."""
    pts = as_point_set(points)
    if pts.dtype == object:
        seen = {}
        for p in pts:
            seen.setdefault(tuple(p), p)
        keys = sorted(seen)
        return np.array([list(k) for k in keys], dtype=object)
    pts = np.asarray(pts, float)
    order = np.lexsort(pts.T[::-1])
    pts = pts[order]
    if radius <= 0:
        return np.unique(pts, axis=0)
    tree = cKDTree(pts)
    keep = np.ones(len(pts), dtype=bool)
    for i in range(len(pts)):
        if keep[i]:
            for j in tree.query_ball_point(pts[i], radius):
                if j > i:
                    keep[j] = False
    return pts[keep]


def hutchinson_step(ifs: IFS, k, radius=0):
    """Union of the images f(K) for f in the system."""
    pts = as_point_set(k)
    images = [f(pts) for f in ifs.maps]
    exact = all(im.dtype == object for im in images)
    stacked = np.vstack([np.asarray(im, dtype=object if exact else float) for im in images])
    return dedupe(stacked, radius)


@dataclass
class AttractorApprox:
    points: np.ndarray
    n: int
    certificate: object
    gap_bound: object
    initial_gap: object
    partial: bool = False


def attractor_approx(ifs: IFS, seed, n: int, radius=None, max_points: int = 2_000_000) -> AttractorApprox:
    """n-fold Hutchinson iterate of ``seed``.

    ``gap_bound`` is Lip^n * h(K_0, K_1), the bound on h(K_n, K_{n+1});
    ``certificate`` is gap_bound / (1 - Lip), a bound on the distance to the
    attractor.  Float runs merge points closer than ``radius`` (default
    certificate / 4).
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    k0 = dedupe(seed)
    k1 = hutchinson_step(ifs, k0)
    h01 = hausdorff_distance(k0, k1)
    lip = ifs.lip
    if lip is None:
        gap = cert = None
    else:
        gap = lip ** n * h01
        cert = gap / (1 - lip) if lip < 1 else None
    if radius is None:
        radius = 0 if ifs.exact or cert is None else float(cert) / 4
    k = k0
    partial = False
    for step in range(n):
        if len(k) * len(ifs.maps) > max_points:
            partial = True
            break
        k = hutchinson_step(ifs, k, radius)
    return AttractorApprox(k, n, cert, gap, h01, partial)


def chaos_game(ifs: IFS, start, iterations: int, seed: int = 0, burn_in: int = 32) -> np.ndarray:
    """Random orbit with uniformly chosen maps; the first ``burn_in`` steps
    are discarded."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    rng = np.random.default_rng(seed)
    x = np.asarray(start, dtype=float).reshape(1, -1)
    mats = [(np.asarray(f.A, float), np.asarray(f.b, float)) for f in ifs.maps]
    out = np.empty((iterations, ifs.dim))
    choices = rng.integers(0, len(mats), size=iterations + burn_in)
    v = x[0]
    for t, c in enumerate(choices):
        A, b = mats[c]
        v = A @ v + b
        if t >= burn_in:
            out[t - burn_in] = v
    return out


def cantor_ifs() -> IFS:
    """x/3 and x/3 + 2/3 with exact coefficients."""
    third = Fraction(1, 3)
    return IFS([AffineContraction([[third]], [0]), AffineContraction([[third]], [Fraction(2, 3)])])


def halves_ifs() -> IFS:
    """x/2 and x/2 + 1/2; images overlap at 1/2."""
    half = Fraction(1, 2)
    return IFS([AffineContraction([[half]], [0]), AffineContraction([[half]], [half])])


def exkam_ifs(c: complex = cmath.exp(1j)) -> IFS:
    """z/2, c z/2 and the constant 1 on the complex plane (|c| = 1)."""
    if abs(abs(c) - 1) > 1e-12:
        raise ValueError("c must have modulus 1")
    return IFS([ComplexAffine(0.5, 0), ComplexAffine(0.5 * c, 0), ComplexAffine(0, 1)])
