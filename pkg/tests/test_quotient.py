import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from metric_fractals.ifs_engine import IFS, AffineContraction, cantor_ifs, halves_ifs
from metric_fractals.quotient import (CANDIDATE, EXACT, TruncatedCodeMeasure, chi, chi_inner, closed_form_sq,
                                      glue_relations, p_c, quotient_metric, stabilization_probe, to_dict)


def test_measure():
    m = TruncatedCodeMeasure(2, 3, 0.5)
    assert m.n_coords == 15
    assert m.total_mass == pytest.approx(4.0)
    with pytest.raises(ValueError):
        TruncatedCodeMeasure(2, 3, 1.0)


@given(st.lists(st.integers(0, 2), min_size=5, max_size=5), st.lists(st.integers(0, 2), min_size=5, max_size=5),
       st.floats(0.05, 0.95))
def test_chi_inner_products(a, b, c):
    m = TruncatedCodeMeasure(3, 5, c)
    assert chi_inner(a, a, m) == pytest.approx((1 - c ** 6) / (1 - c))
    L = next((i for i, (x, y) in enumerate(zip(a, b)) if x != y), 5)
    assert chi_inner(a, b, m) == pytest.approx(sum(c ** n for n in range(L + 1)))
    ca, cb = chi(a, m), chi(b, m)
    direct = sum(m.weight(n) for (n, w) in ca if (n, w) in cb)
    assert direct == pytest.approx(chi_inner(a, b, m))
    if a == b:
        assert ca == cb


def test_chi_rejects_wrong_length():
    with pytest.raises(ValueError):
        chi((0, 1), TruncatedCodeMeasure(2, 3, 0.5))


def test_cantor_has_no_gluings_and_closed_form():
    ifs = cantor_ifs()
    assert glue_relations(ifs, 5) == []
    assert glue_relations(ifs, 5, CANDIDATE) == []
    qm = quotient_metric(ifs, 0.4, 5)
    codes = list(itertools.product(range(2), repeat=5))
    for a, b in itertools.combinations(codes, 2):
        d = qm.distance(a, b)
        assert d > 0
        assert d ** 2 == pytest.approx(closed_form_sq(a, b, qm.measure), abs=1e-14)


def test_halves_gluings():
    pairs = glue_relations(halves_ifs(), 4)
    assert ((0, 1, 1, 1), (1, 0, 0, 0)) in pairs
    assert all(a < b for a, b in pairs)
    assert len(pairs) == 7
    qm = quotient_metric(halves_ifs(), 0.5, 4)
    for a, b in pairs:
        assert qm.distance(a, b) < 1e-12


def test_candidate_policy_is_a_superset():
    ifs = halves_ifs()
    exact = set(glue_relations(ifs, 4, EXACT))
    cand = set(glue_relations(ifs, 4, CANDIDATE))
    assert exact <= cand
    with pytest.raises(ValueError):
        glue_relations(ifs, 3, "bogus")


def test_inexact_system_uses_tolerance():
    f = [AffineContraction(np.array([[0.5]]), np.array([0.0])), AffineContraction(np.array([[0.5]]), np.array([0.5]))]
    pairs = glue_relations(IFS(f), 3)
    assert ((0, 1, 1), (1, 0, 0)) in pairs


@given(st.integers(0, 10_000), st.floats(0.1, 0.9))
@settings(max_examples=20, deadline=None)
def test_pseudometric_axioms(seed, c):
    rng = np.random.default_rng(seed)
    qm = quotient_metric(halves_ifs(), c, 5)
    codes = [tuple(int(v) for v in rng.integers(0, 2, size=5)) for _ in range(6)]
    d = qm.matrix(codes)
    assert np.allclose(d, d.T) and np.all(np.diag(d) == 0)
    for i, j, k in itertools.permutations(range(len(codes)), 3):
        assert d[i, k] <= d[i, j] + d[j, k] + 1e-12


def test_stabilization_probe_and_json():
    x, y = (0,) * 10, (1,) * 10
    rows = stabilization_probe(halves_ifs(), 0.5, x, y, depths=range(4, 8))
    assert [n for n, _ in rows] == [4, 5, 6, 7]
    assert all(v > 0 for _, v in rows)
    assert p_c(halves_ifs(), 0.5, 4, x[:4], y[:4]) == pytest.approx(rows[0][1])
    with pytest.raises(ValueError):
        stabilization_probe(halves_ifs(), 0.5, x[:5], y, depths=[6])
    qm = quotient_metric(halves_ifs(), 0.5, 3)
    codes = [(0, 0, 0), (1, 1, 1)]
    out = to_dict(qm, codes, qm.matrix(codes))
    assert out["depth"] == 3 and out["codes"] == ["000", "111"] and ["011", "100"] in out["pairs"]
