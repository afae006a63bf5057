"""Command line entry point.

Exit codes: 0 when every certification passes, 1 when a valid report contains
violations, 2 on input or parameter errors (with a JSON error object on stderr).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import freegroup as fg
from .action import FreeGroupAction, GraphFrame, PermutationAction, TreeFrame, cocycle_norm, cocycle_norm_graph, free_constants
from .bundle import BundleParams, GraphBundle, PropernessConstants, verify_curvature, verify_norm_bound, verify_properness
from .config import SCHEMA_VERSION, TOOL_VERSION
from .exceptions import TangentLpError
from .graph import read_graph
from .metric import all_pairs_distances, growth_profile, hyperbolicity_delta, non_collapsing
from .pipeline import RunConfig, _clean, _metric_stage, dumps, emit_csv_tables, error_object, run_pipeline
from .pseudometric import PseudoParams, bound_terms, check_sources, pseudo_field
from .symmetry import vertex_orbits


class _Parser(argparse.ArgumentParser):
    """Usage errors become JSON error objects with exit code 2."""

    def error(self, message):
        _fail({"type": "UsageError", "message": message})


def _fail(obj: dict) -> None:
    sys.stderr.write(json.dumps({"error": obj}, sort_keys=True) + "\n")
    raise SystemExit(2)


def _write_text(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _write_rows(path, header, rows) -> None:
    fh = sys.stdout if path is None or path == "-" else open(path, "w", encoding="utf-8", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in row])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _need_seed(args, why: str) -> None:
    if args.seed is None:
        raise TangentLpError(f"--seed is required for {why}")


def _load_graph(args):
    if getattr(args, "action", None) and args.action.startswith("free:") and not args.graph:
        k = int(args.action.split(":", 1)[1])
        return fg.cayley_ball(k, args.radius), k
    if not args.graph:
        raise TangentLpError("--graph FILE (or --action free:k) is required")
    return read_graph(args.graph, args.measure), None


def _delta(g, d, mode, samples, seed, o=0):
    if g.is_tree():
        return 0.0, "tree", False
    est = hyperbolicity_delta(d, mode, basepoint=o, n_samples=samples, seed=seed)
    return est.value, est.mode, est.is_lower_bound


# -- subcommands -------------------------------------------------------------


def cmd_analyze(args) -> int:
    if args.delta_mode == "sampled":
        _need_seed(args, "sampled hyperbolicity")
    g, k = _load_graph(args)
    o = g.vertex(args.base) if args.base is not None else 0
    cfg = RunConfig(
        delta_mode=args.delta_mode,
        delta_samples=args.samples,
        seed=0 if args.seed is None else args.seed,
    )
    metric, *_ = _metric_stage(cfg, g, o, k)
    nc = non_collapsing(g, args.C)
    metric["non_collapsing"] = {"C": nc.C, "v": nc.v, "argmin": g.labels[nc.argmin]}
    report = {"schema_version": SCHEMA_VERSION, "tool_version": TOOL_VERSION, "metric": metric}
    _write_text(args.out, dumps(_clean(report)))
    return 0


def cmd_pseudometric(args) -> int:
    g, _ = _load_graph(args)
    d = all_pairs_distances(g)
    a = g.vertex(args.base) if args.base is not None else 0
    if args.epsilon is None:
        delta, _, lower = _delta(g, d, "exact", 0, None, a)
        params = PseudoParams.default(delta, args.D)
    else:
        params = PseudoParams(args.epsilon, args.D, 0.0 if args.delta is None else args.delta)
    src = check_sources(g, args.sources.split(",")) if args.sources else None
    field = pseudo_field(g, d, a, params, src)
    gp, upper, lower, scope = bound_terms(field, d)
    dx = d.rows(field.sources)
    rows = []
    for i, x in enumerate(field.sources):
        for y in range(g.n):
            de = field.table[i, y]
            rows.append(
                (
                    g.labels[x],
                    g.labels[y],
                    int(dx[i, y]),
                    float(gp[i, y]),
                    float(de),
                    float(upper[i, y] - de),
                    float(de - lower[i, y]) if scope[i, y] else None,
                )
            )
    _write_rows(args.out, ["x", "y", "d", "gromov_product", "d_eps", "upper_slack", "lower_slack"], rows)
    bad = any(r[5] < -1e-9 * upper.max() or (r[6] is not None and r[6] < -1e-9 * max(r[4], 1e-300)) for r in rows)
    return 1 if bad else 0


def cmd_bundle_verify(args) -> int:
    if args.mode == "sampled":
        _need_seed(args, "sampled curvature checks")
    g, _ = _load_graph(args)
    d = all_pairs_distances(g)
    o = g.vertex(args.base) if args.base is not None else 0
    delta, dmode, lower = _delta(g, d, "exact", 0, None, o)
    pseudo = PseudoParams.default(delta, args.D) if args.epsilon is None else PseudoParams(args.epsilon, args.D, delta)
    params = BundleParams(pseudo, args.p, o, growth_profile(g, o, d))
    bundle = GraphBundle(g, d, params)
    orbits = vertex_orbits(g)
    norm = verify_norm_bound(bundle, orbits)
    curv = verify_curvature(
        bundle, args.curvature_C, args.mode, n_samples=args.samples, seed=args.seed, orbits=orbits, n_jobs=args.jobs
    )
    consts = PropernessConstants.from_bundle(bundle, args.C)
    prop = verify_properness(bundle, consts, n_jobs=args.jobs)
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": TOOL_VERSION,
        "graph": {"vertices": g.n, "edges": g.m, "basepoint": g.labels[o], "delta": delta, "delta_mode": dmode},
        "params": params.as_dict(),
        "constants": {"E": params.E, "D_C": curv.D_C, **consts.as_dict()},
        "norm_bound": norm.as_dict(),
        "curvature": curv.as_dict(),
        "properness": prop.as_dict(),
        "passed": norm.passed and curv.passed and prop.passed,
    }
    _write_text(args.out, dumps(_clean(report)))
    return 0 if report["passed"] else 1


def _cocycle_words(args, k):
    if args.words:
        out = []
        for line in Path(args.words).read_text(encoding="utf-8").splitlines():
            text = line.strip()
            if text and not text.startswith("#"):
                out.append(text)
        return out
    if args.random is None:
        raise TangentLpError("give --words FILE or --random N")
    _need_seed(args, "--random")
    rng = np.random.default_rng(args.seed)
    if k is None:
        raise TangentLpError("--random needs a free:k action")
    return [fg.random_word(k, int(rng.integers(0, args.max_length + 1)), rng) for _ in range(args.random)]


def cmd_cocycle(args) -> int:
    # norm_p is ||c(g)||_p^p, the quantity both bounds are stated for; norm is its p-th root
    header = ["word", "length", "d_o_go", "norm_p", "tail_bound", "lower_bound", "upper_bound", "norm"]
    rows = []
    ok = True
    if args.action.startswith("free:"):
        k = int(args.action.split(":", 1)[1])
        act = FreeGroupAction(k, args.radius)
        frame = TreeFrame.build(act, args.epsilon, args.p, args.D)
        consts = free_constants(frame, args.C)
        for w in _cocycle_words(args, k):
            res = cocycle_norm(frame, w, R=args.norm_radius, consts=consts)
            ok &= res.passed
            rows.append((fg.label(res.word), res.length, res.length, res.norm_p, res.tail_bound, res.lower_bound, res.upper_bound, res.norm))
    else:
        g, _ = _load_graph(args)
        d = all_pairs_distances(g)
        o = g.vertex(args.base) if args.base is not None else 0
        act = PermutationAction.from_json(g, args.action)
        delta, _, _ = _delta(g, d, "exact", 0, None, o)
        pseudo = PseudoParams.default(delta, args.D) if args.epsilon is None else PseudoParams(args.epsilon, args.D, delta)
        frame = GraphFrame(act, GraphBundle(g, d, BundleParams(pseudo, args.p, o, growth_profile(g, o, d))))
        for w in _cocycle_words(args, None):
            x = act.apply(w, o)
            npow = cocycle_norm_graph(frame, w)
            rows.append((w, None, int(d(o, x)), npow, 0.0, None, None, npow ** (1.0 / args.p)))
    _write_rows(args.out, header, rows)
    return 0 if ok else 1


def _config_from_args(args) -> RunConfig:
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        cfg = RunConfig.from_dict(data.get("config", data))
    else:
        cfg = RunConfig()
    overrides = {
        "graph": args.graph,
        "measure": args.measure,
        "action": args.action,
        "radius": args.radius,
        "basepoint": args.base,
        "epsilon": args.epsilon,
        "D": args.D,
        "p": args.p,
        "C": args.C,
        "curvature_C": args.curvature_C,
        "delta_mode": args.delta_mode,
        "curvature_mode": args.curvature_mode,
        "seed": args.seed,
        "word_pairs": args.pairs,
        "cocycle_radius": args.cocycle_radius,
        "jobs": args.jobs,
    }
    for key, val in overrides.items():
        if val is not None:
            setattr(cfg, key, val)
    return cfg


def cmd_run(args) -> int:
    if args.seed is None and not args.config:
        raise TangentLpError("--seed is required for run (word pairs and samples are seeded)")
    cfg = _config_from_args(args)
    report, timings = run_pipeline(cfg)
    _write_text(args.out, dumps(report))
    if args.csv_dir:
        emit_csv_tables(report, args.csv_dir)
    if args.timings:
        Path(args.timings).write_text(json.dumps(timings, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if "error" in report:
        sys.stderr.write(json.dumps({"error": report["error"]}, sort_keys=True) + "\n")
        return 2
    return 0 if report["passed"] else 1


# -- parser ------------------------------------------------------------------


def _graph_opts(p, action=True):
    p.add_argument("--graph", help="edge list, one 'u<TAB>v' per line")
    p.add_argument("--measure", help="optional 'v<TAB>weight' file")
    if action:
        p.add_argument("--action", help="free:k or a JSON file of generator permutations")
    p.add_argument("--radius", type=int, default=8, help="ball radius for free:k (default 8)")
    p.add_argument("--base", help="basepoint label (default: first vertex)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tangentlp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"tangentlp {TOOL_VERSION} (schema {SCHEMA_VERSION})")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="hyperbolicity, growth, entropy and p*")
    _graph_opts(p)
    p.add_argument("--delta-mode", default="auto", choices=["auto", "exact", "fixed_basepoint", "sampled"])
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--C", type=float, default=1.0, help="non-collapsing radius")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("pseudometric", help="pseudo-distance table with bound slacks")
    _graph_opts(p)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--D", type=float, default=1.0)
    p.add_argument("--delta", type=float, help="delta used for the admissibility check with --epsilon")
    p.add_argument("--sources", help="comma-separated source labels (default: all)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pseudometric)

    p = sub.add_parser("bundle", help="tangent bundle checks")
    bsub = p.add_subparsers(dest="bundle_command", required=True, parser_class=_Parser)
    p = bsub.add_parser("verify", help="norm bound, curvature and properness")
    _graph_opts(p)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--D", type=float, default=1.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--C", type=float, help="properness slack (default: smallest admissible integer)")
    p.add_argument("--curvature-C", type=float, default=2.0)
    p.add_argument("--mode", default="exhaustive", choices=["exhaustive", "sampled"])
    p.add_argument("--samples", type=int, default=20_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bundle_verify)

    p = sub.add_parser("cocycle", help="cocycle norms with their bounds")
    _graph_opts(p, action=False)
    p.add_argument("--action", required=True)
    p.set_defaults(radius=16)
    p.add_argument("--words", help="file with one word per line")
    p.add_argument("--random", type=int, help="number of random reduced words")
    p.add_argument("--max-length", type=int, default=12)
    p.add_argument("--norm-radius", type=int, help="summation radius (default |g| + 4C' + 2C + 2)")
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--D", type=float, default=1.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--C", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cocycle)

    p = sub.add_parser("run", help="full pipeline")
    p.add_argument("--config", help="JSON RunConfig (or a previous report)")
    p.add_argument("--graph")
    p.add_argument("--measure")
    p.add_argument("--action")
    p.add_argument("--radius", type=int)
    p.add_argument("--base")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--D", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--C", type=float)
    p.add_argument("--curvature-C", type=float)
    p.add_argument("--delta-mode", choices=["auto", "exact", "fixed_basepoint", "sampled"])
    p.add_argument("--curvature-mode", choices=["auto", "exhaustive", "sampled"])
    p.add_argument("--pairs", type=int, help="random word pairs for the cocycle identity")
    p.add_argument("--cocycle-radius", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.add_argument("--csv-dir")
    p.add_argument("--timings", help="write wall-clock timings here (kept out of the report)")
    p.set_defaults(func=cmd_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TangentLpError as exc:
        _fail(error_object(exc))
    except OSError as exc:
        _fail({"type": type(exc).__name__, "message": str(exc)})
    return 2


if __name__ == "__main__":
    sys.exit(main())
