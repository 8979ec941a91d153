import itertools
from fractions import Fraction as F

import numpy as np
import pytest

from metric_fractals.code_space import ORIGIN, ExKamBackend, ExkamPoint, IntervalBackend, build_lattice
from metric_fractals.ifs_engine import cantor_ifs, halves_ifs
from metric_fractals.kameyama import (KameyamaConfig, MembershipError, distance_matrix, doubling_cover_check,
                                      exkam_p, exkam_points, exkam_u, is_strongly_ultrametric,
                                      kameyama_distance, kameyama_ultra_distance, self_distance, ultra_matrix)
from metric_fractals.metric_core import triangle_violations

HALF = F(1, 2)


@pytest.fixture(scope="module")
def exkam_cfg():
    return KameyamaConfig(HALF, build_lattice(ExKamBackend(), 6))


@pytest.fixture(scope="module")
def cantor_cfg():
    return KameyamaConfig(HALF, build_lattice(IntervalBackend(cantor_ifs()), 6))


def cantor_point(bits):
    return sum((F(2, 3 ** (i + 1)) for i, b in enumerate(bits) if b == "1"), F(0))


CANTOR_BITS = ["", "1", "01", "11", "001", "101", "011", "111", "0101", "1101"]


def test_exkam_distance_to_origin(exkam_cfg):
    for p in exkam_points(6, with_origin=False):
        value, cert = kameyama_distance(exkam_cfg, ORIGIN, p)
        assert value == HALF ** p.n
        assert cert.total == value


def test_exkam_pairs_inside_bracket(exkam_cfg):
    pts = exkam_points(5, with_origin=False)
    for a, b in itertools.combinations(pts, 2):
        lo, hi = exkam_p(HALF, a, b)
        value, _ = kameyama_distance(exkam_cfg, a, b)
        assert lo <= value <= hi


def test_same_point(exkam_cfg, cantor_cfg):
    # {x_{n,k}} is the image of a word ending in the constant map
    assert kameyama_distance(exkam_cfg, ExkamPoint(2, 1), ExkamPoint(2, 1))[0] == 0
    # Cantor points only get the depth bound
    assert self_distance(cantor_cfg, F(0))[0] == HALF ** 6


def test_exkam_formulas():
    assert exkam_p(HALF, ORIGIN, ExkamPoint(3, 1)) == (F(1, 8), F(1, 8))
    assert exkam_p(HALF, ExkamPoint(2, 0), ExkamPoint(2, 0)) == (0, 0)
    assert exkam_p(HALF, ExkamPoint(2, 0), ExkamPoint(5, 3)) == (F(1, 4), F(1, 4) + F(1, 32))
    assert exkam_u(HALF, ORIGIN, ExkamPoint(4, 2)) == F(1, 16)
    assert exkam_u(HALF, ExkamPoint(1, 0), ExkamPoint(1, 0)) == 0
    assert exkam_u(HALF, ExkamPoint(1, 0), ExkamPoint(3, 2)) == HALF


def test_exkam_sandwich():
    pts = exkam_points(5)
    for a, b in itertools.combinations(pts, 2):
        u = exkam_u(HALF, a, b)
        lo, hi = exkam_p(HALF, a, b)
        assert u <= lo and hi <= 2 * u


def test_pseudometric_axioms(exkam_cfg, cantor_cfg):
    for cfg, pts in ((exkam_cfg, exkam_points(4)), (cantor_cfg, [cantor_point(b) for b in CANTOR_BITS])):
        space = distance_matrix(cfg, pts)
        assert triangle_violations(space) == []
        d = space.dist
        assert all(d[i, j] == d[j, i] for i in range(space.n) for j in range(space.n))


def test_cantor_distance_controls_euclidean(cantor_cfg):
    pts = [cantor_point(b) for b in CANTOR_BITS]
    for x, y in itertools.combinations(pts, 2):
        p, _ = kameyama_distance(cantor_cfg, x, y)
        assert abs(x - y) <= p * 1


def test_maps_are_lambda_lipschitz(cantor_cfg):
    ifs = cantor_ifs()
    short = [b for b in CANTOR_BITS if len(b) <= 3]
    for f in ifs.maps:
        for a, b in itertools.combinations(short, 2):
            x, y = cantor_point(a), cantor_point(b)
            fx = f.A[0, 0] * x + f.b[0]
            fy = f.A[0, 0] * y + f.b[0]
            assert kameyama_distance(cantor_cfg, fx, fy)[0] <= HALF * kameyama_distance(cantor_cfg, x, y)[0]


def test_ultra_agrees_with_chain_on_ultrafractal(cantor_cfg):
    pts = [cantor_point(b) for b in CANTOR_BITS]
    chain = distance_matrix(cantor_cfg, pts)
    ultra = ultra_matrix(cantor_cfg, pts)
    assert (chain.dist == ultra.dist).all()
    assert is_strongly_ultrametric(ultra)
    for x, y in itertools.combinations(pts, 2):
        assert kameyama_ultra_distance(cantor_cfg, x, y) == kameyama_distance(cantor_cfg, x, y)[0]


def test_ultra_refuses_non_ultrafractal():
    cfg = KameyamaConfig(HALF, build_lattice(IntervalBackend(halves_ifs()), 3))
    with pytest.raises(ValueError):
        kameyama_ultra_distance(cfg, F(0), F(1))


def test_doubling_cover(cantor_cfg, rng):
    pts = [cantor_point(b) for b in CANTOR_BITS]
    for _ in range(20):
        sub = sorted(rng.choice(len(pts), size=int(rng.integers(2, len(pts) + 1)), replace=False).tolist())
        check = doubling_cover_check(cantor_cfg, pts, sub)
        assert check.ok and len(check.pieces) <= 2


def test_point_outside_is_reported(cantor_cfg):
    with pytest.raises(MembershipError):
        kameyama_distance(cantor_cfg, F(3, 2), F(0))


def test_lambda_range():
    with pytest.raises(ValueError):
        KameyamaConfig(F(3, 2), build_lattice(ExKamBackend(), 2))
