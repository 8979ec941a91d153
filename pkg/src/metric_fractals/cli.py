"""Command line front end: ``metric-fractals <command> ...``.

Every report is JSON.  Numbers in reports carry a ``provenance`` of
``exact``, ``certified-bound`` or ``sampled``.
"""

from __future__ import annotations

import csv
import itertools
import json
import sys
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import code_space, hilbert_embed, kameyama, line_embed, quotient, realization
from .ifs_engine import IFS, attractor_approx, cantor_ifs, exkam_ifs, fixed_point, halves_ifs
from .metric_core import FiniteMetricSpace, format_number, parse_number

BUILTIN = {"cantor": cantor_ifs, "halves": halves_ifs, "exkam": exkam_ifs}


def load_ifs(spec: str) -> IFS:
    if spec in BUILTIN:
        return BUILTIN[spec]()
    return IFS.from_dict(json.loads(Path(spec).read_text()))


def _num(v, provenance):
    return {"value": str(Fraction(v)) if isinstance(v, (int, Fraction)) else float(v),
            "provenance": provenance}


def _emit(report, out):
    text = json.dumps(report, indent=2, sort_keys=True, default=str)
    if out:
        Path(out).write_text(text + "\n")
    click.echo(text)


def _fmt(v):
    return str(v) if isinstance(v, Fraction) else repr(float(v))


def write_svg(points, path, size=400):
    pts = np.asarray(points, float)
    if pts.ndim == 1 or pts.shape[1] == 1:
        pts = np.column_stack([pts.reshape(-1), np.zeros(len(pts))])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    xy = 10 + (pts[:, :2] - lo[:2]) / span[:2] * (size - 20)
    body = "".join(f'<circle cx="{x:.3f}" cy="{size - y:.3f}" r="1.5"/>' for x, y in xy)
    Path(path).write_text(f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">'
                          f"{body}</svg>\n")


@click.group()
def main():
    """Fractal structures, chain pseudometrics and embeddings."""


@main.command()
@click.argument("ifs_spec")
@click.option("--n", "n", type=int, default=6, show_default=True, help="Hutchinson iterations.")
@click.option("--out", type=click.Path(), default=None, help="Prefix for .csv and .svg output.")
def attractor(ifs_spec, n, out):
    """Iterate the Hutchinson operator from the first map's fixed point."""
    ifs = load_ifs(ifs_spec)
    approx = attractor_approx(ifs, [fixed_point(ifs.maps[0])], n)
    pts = approx.points
    if out:
        with open(f"{out}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            for p in pts:
                w.writerow([_fmt(v) for v in p])
        write_svg(pts, f"{out}.svg")
    prov = "exact" if ifs.exact else "certified-bound"
    _emit({"command": "attractor", "n": n, "points": len(pts), "partial": approx.partial,
           "gap_bound": None if approx.gap_bound is None else _num(approx.gap_bound, prov),
           "certificate": None if approx.certificate is None else _num(approx.certificate, prov)},
          None)


def _parse_point(raw, backend):
    if isinstance(backend, code_space.ExKamBackend):
        if raw in (None, "origin"):
            return code_space.ORIGIN
        return code_space.ExkamPoint(int(raw[0]), int(raw[1]))
    if isinstance(raw, list):
        return tuple(parse_number(v) for v in raw)
    return parse_number(raw)


@main.command("kameyama")
@click.argument("ifs_spec")
@click.option("--lambda", "lam", default="1/2", show_default=True)
@click.option("--depth", type=int, default=6, show_default=True)
@click.option("--pairs", "pairs_file", type=click.Path(exists=True), default=None,
              help="JSON list of point pairs; ExKam points are [n, k] or \"origin\".")
@click.option("--backend", type=click.Choice(["auto", "exact", "interval", "exkam", "numeric"]),
              default="auto", show_default=True)
@click.option("--out", type=click.Path(), default=None)
def kameyama_cmd(ifs_spec, lam, depth, pairs_file, backend, out):
    """Chain distances between point pairs."""
    lam = parse_number(lam)
    if backend == "exact":
        backend = "exkam" if ifs_spec == "exkam" else "interval"
    if backend == "auto" and ifs_spec == "exkam":
        backend = "exkam"
    be = code_space.make_backend(load_ifs(ifs_spec), backend)
    lat = code_space.build_lattice(be, depth)
    cfg = kameyama.KameyamaConfig(lam, lat)
    if pairs_file:
        raw = json.loads(Path(pairs_file).read_text())
        pairs = [(_parse_point(a, be), _parse_point(b, be)) for a, b in raw]
    elif isinstance(be, code_space.ExKamBackend):
        pairs = [(code_space.ORIGIN, p) for p in kameyama.exkam_points(min(depth, 4), False)]
    else:
        raise click.UsageError("--pairs is required for this system")
    verdict = cfg.ultrafractal()
    rows = []
    for x, y in pairs:
        value, cert = kameyama.kameyama_distance(cfg, x, y)
        row = {"x": str(x), "y": str(y), "distance": _num(value, "certified-bound"),
               "chain": cert.to_dict()}
        if verdict.status == "yes":
            u = kameyama.kameyama_ultra_distance(cfg, x, y)
            row["ultra"] = _num(u, "certified-bound")
            row["agree"] = bool(u == value)
        rows.append(row)
    _emit({"command": "kameyama", "lambda": str(lam), "depth": depth,
           "ultrafractal": verdict.to_dict(), "pairs": rows}, out)


@main.command()
@click.argument("space_file", type=click.Path(exists=True))
@click.option("--target", type=click.Choice(["line", "hilbert"]), default="hilbert", show_default=True)
@click.option("--lambda", "lam", default="1/16", show_default=True)
@click.option("--epsilon", default="1/2", show_default=True)
@click.option("--tol", type=float, default=None)
@click.option("--out", type=click.Path(), default=None)
def embed(space_file, target, lam, epsilon, tol, out):
    """Embed a finite metric space into R or into Euclidean space."""
    space = FiniteMetricSpace.from_dict(json.loads(Path(space_file).read_text()))
    if space.n == 1:
        _emit({"command": "embed", "target": target, "coords": [[0]], "status": "trivial"}, out)
        return
    if target == "hilbert":
        report = hilbert_embed.negative_type_check(space, tol)
        result = {"command": "embed", "target": target, "report": report.to_dict()}
        if report.verdict == hilbert_embed.NOT_EMBEDDABLE:
            result["status"] = "refused"
            fam = hilbert_embed.pair_family_check(space)
            if fam is not None:
                result["pair_family"] = {"plus": list(fam.plus), "minus": list(fam.minus),
                                         "value": _num(fam.value, "exact" if space.exact else "sampled")}
        else:
            coords = hilbert_embed.hilbert_embedding(space, tol)
            result["status"] = "embedded"
            result["coords"] = coords.tolist()
            result["max_error"] = _num(hilbert_embed.embedding_error(space, coords), "sampled")
        _emit(result, out)
        return
    lam, eps = parse_number(lam), parse_number(epsilon)
    tree = line_embed.ball_hierarchy(space, lam)
    try:
        alpha = line_embed.choose_alpha(lam, eps, tree.max_children)
        asg = line_embed.interval_assignment(tree, alpha, eps)
    except line_embed.InfeasibleError as exc:
        _emit({"command": "embed", "target": target, "status": "infeasible", "reason": str(exc)}, out)
        sys.exit(1)
    bounds = line_embed.verify_bounds(asg)
    _emit({"command": "embed", "target": target, "status": "embedded", "alpha": str(alpha),
           "coords": [format_number(v) for v in line_embed.embed(asg)],
           "lower_const": _num(bounds.lower_const, "exact"),
           "upper_const": _num(bounds.upper_const, "exact"),
           "bounds_hold": bounds.ok, "violations": bounds.violations}, out)


def read_y(path):
    with open(path, newline="") as fh:
        return [tuple(Fraction(v.strip()) for v in row) for row in csv.reader(fh) if row]


def realize_report(zs, Y, lam=None, depth=6, seed=0):
    """Verification bundle for the four-map system on Z u Y."""
    zback = realization.RealizationBackend(zs, seed)
    words = code_space.all_words(3, depth)
    cases_ok = all(realization.matches_case_table(w, zs, zback) for w in words)
    verified = all(zback.verify(w).verified for w in words)
    lat = code_space.build_lattice(zback, depth)
    strict = code_space.is_strict_ultrafractal(lat)
    fs = realization.full_structure(zs, Y, lam, depth, seed)
    cfg = fs.config()
    n = len(fs.tree.Y)
    ypts = [realization.y_point(i) for i in range(n)]
    dist = kameyama.distance_matrix(cfg, ypts).dist
    zsample = [realization.z_point(z) for z in [("", ""), ("1", ""), ("01", "1"), ("", "1")] + list(zs.extras[:2])]
    yz = sorted({kameyama.kameyama_distance(cfg, y, z)[0] for y in ypts for z in zsample})
    lower = []
    for i, j in itertools.combinations(range(n), 2):
        bound = float(fs.lam) ** fs.d * float(realization.max_norm(fs.tree.Y[i], fs.tree.Y[j])) ** fs.s
        lower.append(float(dist[i][j]) >= bound * (1 - 1e-12))
    rng = np.random.default_rng(seed)
    covers = []
    for _ in range(20):
        if n < 2:
            break
        S = sorted(rng.choice(n, size=int(rng.integers(2, n + 1)), replace=False).tolist())
        covers.append(realization.cube_cover_check(fs, cfg, S, dist).ok)
    return {
        "lambda": str(fs.lam), "d": fs.d, "s": _num(fs.s, "sampled"), "depth": depth,
        "case_table_match": cases_ok, "images_verified": verified, "strict": strict.to_dict(),
        "yz_distances": [_num(v, "certified-bound") for v in yz],
        "lower_bound_holds": all(lower), "cube_cover_holds": all(covers),
        "y_distances": [[format_number(v) for v in row] for row in dist],
    }


@main.command()
@click.argument("zspace_file", type=click.Path(exists=True))
@click.argument("y_file", type=click.Path(exists=True))
@click.option("--lambda", "lam", default=None, help="Defaults to the smallest listed value with lambda^d >= 1/2.")
@click.option("--depth", type=int, default=6, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def realize(zspace_file, y_file, lam, depth, seed, out):
    """Build the maps on Z u Y and check the metric bounds."""
    zs = realization.ZSpace.from_dict(json.loads(Path(zspace_file).read_text()))
    Y = read_y(y_file)
    report = realize_report(zs, Y, None if lam is None else parse_number(lam), depth, seed)
    report["command"] = "realize"
    _emit(report, out)


@main.command("quotient")
@click.argument("ifs_spec")
@click.option("--c", "c", type=float, default=0.5, show_default=True)
@click.option("--depth", type=int, default=8, show_default=True)
@click.option("--policy", type=click.Choice([quotient.EXACT, quotient.CANDIDATE]), default=quotient.EXACT,
              show_default=True)
@click.option("--codes", multiple=True, help="Codes such as 0110; defaults to 4 random codes.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def quotient_cmd(ifs_spec, c, depth, policy, codes, seed, out):
    """Quotient pseudometric on depth-N codes."""
    ifs = load_ifs(ifs_spec)
    qm = quotient.quotient_metric(ifs, c, depth, policy)
    if codes:
        cl = [tuple(int(ch) for ch in s) for s in codes]
    else:
        rng = np.random.default_rng(seed)
        cl = [tuple(int(v) for v in rng.integers(0, len(ifs.maps), depth)) for _ in range(4)]
    values = qm.matrix(cl)
    report = quotient.to_dict(qm, cl, values)
    report.update({"command": "quotient", "policy": policy, "rank": qm.rank,
                   "total_mass": qm.measure.total_mass, "provenance": "sampled"})
    _emit(report, out)


if __name__ == "__main__":
    main()
