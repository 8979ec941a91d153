"""Acceptance criteria.  Each test prints one PASS/FAIL line."""

import itertools
import time
from fractions import Fraction as F

import numpy as np
import pytest

from metric_fractals.code_space import (ORIGIN, ExKamBackend, ExkamPoint, IntervalBackend, ProductBackend,
                                        all_words, build_lattice, is_strict_ultrafractal, is_ultrafractal)
from metric_fractals.hilbert_embed import (NOT_EMBEDDABLE, embedding_error, hilbert_embedding, negative_type_check,
                                           pair_family_check, random_metric, random_ultrametric)
from metric_fractals.ifs_engine import attractor_approx, cantor_ifs, halves_ifs
from metric_fractals.kameyama import (KameyamaConfig, distance_matrix, doubling_cover_check, exkam_points,
                                      kameyama_distance)
from metric_fractals.line_embed import (ball_hierarchy, choose_alpha, conjugate_contraction, interval_assignment,
                                        random_ball_tree_space, random_lipschitz_map, verify_bounds)
from metric_fractals.metric_core import hausdorff_distance, min_cover_exact
from metric_fractals.quotient import closed_form_sq, glue_relations, quotient_metric
from metric_fractals.realization import (RealizationBackend, ZSpace, cube_cover_check, full_structure,
                                         iterated_even, matches_case_table, max_norm, random_extras, random_y,
                                         set_sample, y_point, z_point)

HALF = F(1, 2)


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
        assert ok, detail
    return emit


def test_criterion_1_exkam_golden_values(report):
    t0 = time.perf_counter()
    cfg = KameyamaConfig(HALF, build_lattice(ExKamBackend(), 8))
    pts = exkam_points(8, with_origin=False)
    origin_ok = all(kameyama_distance(cfg, ORIGIN, p)[0] == HALF ** p.n for p in pts)
    d = distance_matrix(cfg, pts).dist
    bracket_ok = all(max(HALF ** a.n, HALF ** b.n) <= d[i, j] <= HALF ** a.n + HALF ** b.n
                     for (i, a), (j, b) in itertools.combinations(enumerate(pts), 2))
    dt = time.perf_counter() - t0
    report(1, origin_ok and bracket_ok and dt < 10,
           f"origin values exact={origin_ok}, pair brackets={bracket_ok}, {len(pts)} points, {dt:.1f}s")


def test_criterion_2_non_doubling_witness(report):
    t0 = time.perf_counter()
    cfg = KameyamaConfig(HALF, build_lattice(ExKamBackend(), 8))
    sizes = {}
    for n in range(3, 9):
        S = [ExkamPoint(n, l) for l in range(n + 1)]
        space = distance_matrix(cfg, S)
        size, _ = min_cover_exact(space, range(len(S)), space.diameter() / 2)
        sizes[n] = size
    dt = time.perf_counter() - t0
    ok = all(sizes[n] >= n + 1 for n in sizes) and dt < 30
    report(2, ok, f"minimum cover sizes {sizes}, {dt:.1f}s")


def test_criterion_3_hutchinson_contraction(report):
    ifs = cantor_ifs()
    iterates = [attractor_approx(ifs, [F(0)], n).points for n in range(12)]
    h = [hausdorff_distance(iterates[n], iterates[n + 1]) for n in range(11)]
    worst = max(h[n] - F(1, 3) ** n * h[0] for n in range(11))
    report(3, worst <= 0, f"max h(K_n,K_n+1) - 3^-n h(K_0,K_1) = {worst} over n <= 10 (exact)")


def test_criterion_4_line_embedding_bounds(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    lam, eps = F(1, 16), HALF
    bounds_ok = lip_ok = True
    sizes = []
    for _ in range(50):
        s = random_ball_tree_space(rng, lam, 4, max_points=64)
        tree = ball_hierarchy(s, lam)
        asg = interval_assignment(tree, choose_alpha(lam, eps, tree.max_children), eps)
        bounds_ok &= verify_bounds(asg).ok
        g = conjugate_contraction(asg, random_lipschitz_map(tree, rng))
        # g is piecewise linear with kinks only at its knots
        knots = sorted(set(g.breakpoints()) | {F(0), F(1)})
        vals = [g(t) for t in knots]
        lip_ok &= all(abs(v1 - v0) <= eps * (t1 - t0) for t0, t1, v0, v1 in zip(knots, knots[1:], vals, vals[1:]))
        sizes.append(s.n)
    dt = time.perf_counter() - t0
    report(4, bounds_ok and lip_ok and dt < 60,
           f"50 trees with {min(sizes)}-{max(sizes)} points: bounds={bounds_ok}, eps-Lipschitz={lip_ok}, {dt:.1f}s")


def test_criterion_5_negative_type_coherence(report):
    rng = np.random.default_rng(5)
    disagree = witnesses = 0
    worst_rel = 0.0
    for _ in range(200):
        s = random_metric(int(rng.integers(4, 9)), rng)
        nt = negative_type_check(s)
        fam = pair_family_check(s, max_n=3)
        if fam is not None:
            witnesses += 1
            disagree += nt.verdict != NOT_EMBEDDABLE
        if nt.verdict != NOT_EMBEDDABLE:
            worst_rel = max(worst_rel, embedding_error(s, hilbert_embedding(s)) / float(s.diameter()))
    ultra_fail = 0
    for _ in range(200):
        u = random_ultrametric(int(rng.integers(4, 9)), rng)
        nt = negative_type_check(u)
        ultra_fail += nt.verdict == NOT_EMBEDDABLE
        if nt.verdict != NOT_EMBEDDABLE:
            worst_rel = max(worst_rel, embedding_error(u, hilbert_embedding(u)) / float(u.diameter()))
    ok = disagree == 0 and ultra_fail == 0 and worst_rel <= 1e-9
    report(5, ok, f"{witnesses} pair-family witnesses, {disagree} disagreements, {ultra_fail} ultrametric "
                  f"refusals, worst embedding error {worst_rel:.2e} x diam")


def _ultra_properties(cfg, pts, rng, n_subsets=30):
    space = distance_matrix(cfg, pts)
    d = space.dist
    strong = all(d[i, k] <= max(d[i, j], d[j, k]) for i, j, k in itertools.permutations(range(len(pts)), 3))
    covers = True
    for _ in range(n_subsets):
        sub = sorted(rng.choice(len(pts), size=int(rng.integers(2, len(pts) + 1)), replace=False).tolist())
        chk = doubling_cover_check(cfg, pts, sub)
        covers &= chk.ok and len(chk.pieces) <= cfg.lattice.backend.n_maps
    return strong, covers


def test_criterion_6_ultrafractal_properties(report):
    rng = np.random.default_rng(6)
    rows = {}

    def cantor_pt(bits):
        return sum((F(2, 3 ** (i + 1)) for i, b in enumerate(bits) if b == "1"), F(0))

    bits = ["", "1", "01", "11", "001", "101", "011", "111", "0101", "1101", "00011", "10111"]
    lat = build_lattice(IntervalBackend(cantor_ifs()), 6)
    rows["cantor"] = (is_ultrafractal(lat).status, *_ultra_properties(KameyamaConfig(HALF, lat),
                                                                     [cantor_pt(b) for b in bits], rng))

    zs = ZSpace(random_extras(np.random.default_rng(0), 6))
    lat = build_lattice(RealizationBackend(zs), 6)
    zpts = set_sample(("node", "", ""), zs, n_random=6, levels=2)[:14]
    rows["realization"] = (is_ultrafractal(lat).status, *_ultra_properties(KameyamaConfig(HALF, lat), zpts, rng))

    for n in (2, 3):
        lat = build_lattice(ProductBackend(IntervalBackend(cantor_ifs()), cantor_ifs(), n), 6)
        ppts = [(cantor_pt(b), t) for b in bits[:6] for t in range(n)]
        rows[f"product x{n}"] = (is_ultrafractal(lat).status, *_ultra_properties(KameyamaConfig(HALF, lat), ppts, rng))
    ok = all(r == ("yes", True, True) for r in rows.values())
    detail = ", ".join(f"{k}: ultrafractal={v[0]} strong-triangle={v[1]} covers={v[2]}" for k, v in rows.items())
    report(6, ok, detail)


def test_criterion_7_realization_invariants(report):
    t0 = time.perf_counter()
    rows = []
    for d in (1, 2, 3):
        rng = np.random.default_rng(70 + d)
        zs = ZSpace(random_extras(rng, 10))
        Y = random_y(rng, 8, d)
        zb = RealizationBackend(zs)
        cases = all(matches_case_table(w, zs, zb) for w in all_words(3, 6))
        strict = is_strict_ultrafractal(build_lattice(zb, 6)).status == "yes"
        fs = full_structure(zs, Y)
        cfg = fs.config()
        ys = [y_point(i) for i in range(len(Y))]
        zpts = [z_point(z) for z in set_sample(("node", "", ""), zs, n_random=2, levels=1)[:8]]
        yz = all(kameyama_distance(cfg, y, z)[0] == 1 for y in ys for z in zpts)
        D = distance_matrix(cfg, ys).dist
        lower = all(float(D[i][j]) >= float(fs.lam) ** d * float(max_norm(Y[i], Y[j])) ** fs.s * (1 - 1e-12)
                    for i, j in itertools.combinations(range(len(Y)), 2))
        cover = True
        for _ in range(20):
            S = sorted(rng.choice(len(Y), size=int(rng.integers(2, len(Y) + 1)), replace=False).tolist())
            cover &= cube_cover_check(fs, cfg, S, D).ok
        rows.append((d, cases, strict, yz, lower, cover))
    dt = time.perf_counter() - t0
    ok = all(all(r[1:]) for r in rows) and dt < 300
    detail = "; ".join(f"d={r[0]}: cases={r[1]} strict={r[2]} p(y,z)=1:{r[3]} lower={r[4]} cover={r[5]}"
                       for r in rows)
    report(7, ok, f"{detail}; {dt:.1f}s")


def test_criterion_8_even_odd_golden(report):
    s = "110010011"
    got = [iterated_even(s, i) for i in range(1, 8)]
    ok = got[:3] == ["10101", "111", "11"] and all(g == "1" for g in got[3:])
    report(8, ok, f"iterated even parts {got}")


def test_criterion_9_quotient(report):
    N, c = 8, 0.5
    qm = quotient_metric(cantor_ifs(), c, N)
    codes = list(itertools.product(range(2), repeat=N))
    rng = np.random.default_rng(9)
    picks = rng.integers(0, len(codes), size=(400, 2))
    closed = max(abs(qm.distance(codes[i], codes[j]) ** 2 - closed_form_sq(codes[i], codes[j], qm.measure))
                 for i, j in picks)
    hq = quotient_metric(halves_ifs(), c, N)
    glued = max(hq.distance(a, b) for a, b in glue_relations(halves_ifs(), N))
    bad = 0
    for _ in range(1000):
        x, y, z = (codes[int(k)] for k in rng.integers(0, len(codes), size=3))
        dxy, dyz, dxz = hq.distance(x, y), hq.distance(y, z), hq.distance(x, z)
        bad += not (abs(dxy - hq.distance(y, x)) < 1e-12 and dxz <= dxy + dyz + 1e-12 and hq.distance(x, x) == 0)
    ok = closed <= 1e-10 and glued <= 1e-10 and bad == 0
    report(9, ok, f"closed-form error {closed:.1e}, max glued distance {glued:.1e}, {bad} axiom failures in 1000 triples")
