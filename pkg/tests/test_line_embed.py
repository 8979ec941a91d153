import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from metric_fractals.code_space import ExkamPoint
from metric_fractals.kameyama import exkam_points, exkam_u
from metric_fractals.line_embed import (InfeasibleError, LipschitzError, ball_hierarchy, choose_alpha,
                                        conjugate_contraction, conjugation_law, embed, holder_constants,
                                        interval_assignment, lipschitz_ratio, phi, random_ball_tree_space,
                                        random_lipschitz_map, verify_bounds)
from metric_fractals.metric_core import FiniteMetricSpace, MetricError


def exkam_space(lam, depth):
    pts = exkam_points(depth)
    return pts, FiniteMetricSpace.from_matrix([[exkam_u(lam, a, b) for b in pts] for a in pts])


def test_choose_alpha_examples():
    with pytest.raises(InfeasibleError):
        choose_alpha(F(1, 2), F(8), 2)
    assert choose_alpha(F(1, 2), F(3), 1) == 1
    assert choose_alpha(F(1, 4), F(2), 1) == 1


def test_two_points_split_below_their_distance():
    s = FiniteMetricSpace.from_matrix([[0, F(1, 4)], [F(1, 4), 0]])
    tree = ball_hierarchy(s, F(1, 2))
    assert tree.levels[:3] == [[(0, 1)]] * 3
    assert tree.levels[3] == [(0,), (1,)] and tree.depth == 3


def test_exkam_ball_of_origin():
    pts, s = exkam_space(F(1, 2), 5)
    tree = ball_hierarchy(s, F(1, 2))
    for n in range(6):
        ball = tree.levels[n][tree.ball_of(n, 0)]
        expected = {0} | {i for i, p in enumerate(pts) if not p.is_origin and p.n >= n}
        assert set(ball) == expected


def test_rejects_non_ultrametric_and_large_diameter():
    with pytest.raises(MetricError):
        ball_hierarchy(FiniteMetricSpace.from_points([0, 0.5, 1]), F(1, 2))
    with pytest.raises(ValueError):
        ball_hierarchy(FiniteMetricSpace.from_matrix([[0, 2], [2, 0]]), F(1, 2))


def test_two_children_layout():
    s = FiniteMetricSpace.from_matrix([[0, 1], [1, 0]])
    tree = ball_hierarchy(s, F(1, 4))
    asg = interval_assignment(tree, choose_alpha(F(1, 4), F(2), tree.max_children), F(2))
    assert asg.intervals[(0, 0)] == (0, 1)
    (a0, a1), (b0, b1) = asg.intervals[(1, 0)], asg.intervals[(1, 1)]
    assert a1 - a0 == b1 - b0 == F(1, 4)
    assert b0 - a1 == F(1, 6) > F(1, 8)


def test_single_child_is_left_aligned():
    s = FiniteMetricSpace.from_matrix([[0, F(1, 16)], [F(1, 16), 0]])
    tree = ball_hierarchy(s, F(1, 4))
    asg = interval_assignment(tree, F(1), F(2))
    assert asg.layouts[(0, 0)] == "single" and asg.intervals[(1, 0)] == (0, F(1, 4))


def test_singleton_space():
    tree = ball_hierarchy(FiniteMetricSpace.from_matrix([[0]]), F(1, 4))
    asg = interval_assignment(tree, F(1), F(1))
    assert phi(asg, 0) == 0


def check_intervals(asg):
    tree = asg.tree
    lam_a = tree.lam ** asg.alpha
    for (n, i), (lo, hi) in asg.intervals.items():
        assert hi - lo == asg.width(n)
        if n:
            plo, phi_ = asg.intervals[(n - 1, tree.parent[n][i])]
            assert plo <= lo and hi <= phi_
    for n in range(tree.depth):
        for i in range(len(tree.levels[n])):
            kids = sorted(asg.intervals[(n + 1, j)] for j in tree.children(n, i))
            for (a, b), (c, d) in zip(kids, kids[1:]):
                assert c - b > lam_a / asg.epsilon * asg.width(n)


def test_ball_tree_separation_and_intervals(rng):
    for _ in range(15):
        s = random_ball_tree_space(rng, F(1, 16), 4, max_points=40)
        tree = ball_hierarchy(s, F(1, 16))
        assert tree.max_children <= 4
        for n, balls in enumerate(tree.levels):
            for a, b in itertools.combinations(balls, 2):
                assert min(s.dist[x, y] for x in a for y in b) > F(1, 16) ** n
        asg = interval_assignment(tree, choose_alpha(F(1, 16), F(1, 2), tree.max_children), F(1, 2))
        check_intervals(asg)
        assert verify_bounds(asg).ok
        vals = embed(asg)
        assert len(set(vals)) == s.n


@given(st.integers(min_value=0, max_value=100_000))
@settings(max_examples=25, deadline=None)
def test_conjugates_are_epsilon_lipschitz(seed):
    rng = np.random.default_rng(seed)
    lam, eps = F(1, 16), F(1, 2)
    s = random_ball_tree_space(rng, lam, 4, max_points=24)
    tree = ball_hierarchy(s, lam)
    asg = interval_assignment(tree, choose_alpha(lam, eps, tree.max_children), eps)
    f = random_lipschitz_map(tree, rng)
    assert lipschitz_ratio(s, f) <= lam
    g = conjugate_contraction(asg, f)
    vals = embed(asg)
    for x in range(s.n):
        assert g(vals[x]) == vals[f[x]]
    knots = sorted(set(g.breakpoints()) | {F(0), F(1)})
    for t, u in zip(knots, knots[1:]):
        assert abs(g(u) - g(t)) <= eps * (u - t)
    lhs, rhs = conjugation_law(asg, f)
    assert lhs <= rhs


def test_identity_and_constant_conjugates():
    pts, s = exkam_space(F(1, 16), 3)
    tree = ball_hierarchy(s, F(1, 16))
    asg = interval_assignment(tree, choose_alpha(F(1, 16), F(1), tree.max_children), F(1))
    vals = embed(asg)
    const = conjugate_contraction(asg, [0] * s.n)
    assert {const(t) for t in vals} == {vals[0]}
    with pytest.raises(LipschitzError):
        conjugate_contraction(asg, list(range(s.n)), epsilon=F(1, 2))
    ident = conjugate_contraction(asg, list(range(s.n)), epsilon=holder_constants(asg) ** 2)
    assert [ident(v) for v in vals] == vals


def test_exkam_halving_map_conjugate():
    lam, eps = F(1, 16), F(1)
    pts, s = exkam_space(lam, 5)
    idx = {p: i for i, p in enumerate(pts)}
    f = [0 if p.is_origin else idx.get(ExkamPoint(p.n + 1, p.k), 0) for p in pts]
    tree = ball_hierarchy(s, lam)
    asg = interval_assignment(tree, choose_alpha(lam, eps, tree.max_children), eps)
    assert verify_bounds(asg).ok
    g = conjugate_contraction(asg, f)
    assert g.epsilon == eps
