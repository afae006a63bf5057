"""End-to-end certification run: metric -> pseudo-distance -> bundle -> cocycle.

The report is a plain dict with a stable key schema. It carries every derived
constant needed to re-check an inequality by hand. Wall-clock timings are kept
out of the report so identical inputs give byte-identical JSON; they are
returned separately and written only on request.
"""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import freegroup as fg
from .action import (
    FreeGroupAction,
    GraphFrame,
    PermutationAction,
    TreeFrame,
    cocycle_norm,
    cocycle_norm_graph,
    free_constants,
    random_section,
    verify_closed_form,
    verify_cocycle_identity,
    verify_representation,
)
from .bundle import (
    BundleParams,
    GraphBundle,
    PropernessConstants,
    verify_curvature,
    verify_norm_bound,
    verify_properness,
)
from .config import (
    AGREEMENT_ATOL,
    BOUND_RTOL,
    DEFAULT_DELTA_CAP,
    DEFAULT_FIBER_RADIUS,
    IDENTITY_ATOL,
    SCHEMA_VERSION,
    TOOL_VERSION,
)
from .exceptions import TangentLpError
from .graph import MetricGraph, read_graph
from .metric import (
    all_pairs_distances,
    bfs_distances,
    growth_profile,
    hyperbolicity_delta,
    p_threshold,
)
from .oracles import brute_force_check
from .pseudometric import PseudoParams, check_pseudometric_axioms, pseudo_field, random_path_oracle, verify_bounds
from .symmetry import vertex_orbits


@dataclass
class RunConfig:
    """Everything a run depends on besides the input files themselves."""

    graph: str | None = None
    measure: str | None = None
    action: str | None = None
    radius: int = 8
    basepoint: str | None = None
    epsilon: float | None = None
    D: float = 1.0
    p: float = 2.0
    C: float | None = None
    curvature_C: float = 2.0
    delta_mode: str = "auto"
    delta_samples: int = 100_000
    curvature_mode: str = "auto"
    curvature_samples: int = 20_000
    seed: int = 0
    path_samples: int = 1000
    word_pairs: int = 100
    max_word_length: int = 6
    cocycle_radius: int = 16
    fiber_radius: int = DEFAULT_FIBER_RADIUS
    max_cert_vertices: int = 2000
    jobs: int = 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = sorted(set(data) - known)
        if extra:
            raise TangentLpError(f"unknown config keys {extra}")
        return cls(**data)

    def echo(self) -> dict:
        """Config as recorded in the report; ``jobs`` is left out because it must not change results."""
        out = self.to_dict()
        out.pop("jobs")
        return out


def _f(x):
    """JSON-safe float (finite or None)."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _f(obj)
    return obj


class _Timer:
    def __init__(self):
        self.times: dict[str, float] = {}

    def stage(self, name):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t = time.perf_counter()

            def __exit__(self, *exc):
                timer.times[name] = time.perf_counter() - self.t

        return _Ctx()


def error_object(exc: Exception) -> dict:
    """Machine-readable error, with the extra fields some errors carry."""
    out = {"type": type(exc).__name__, "message": str(exc)}
    for attr, key in (("line_no", "line"), ("path", "path"), ("required_radius", "required_radius"), ("minimal_p", "minimal_p")):
        val = getattr(exc, attr, None)
        if val is not None:
            out[key] = val
    return out


def load_input(cfg: RunConfig):
    """The graph, its action (or None) and whether it is a free-group ball."""
    if cfg.action and cfg.action.startswith("free:"):
        k = int(cfg.action.split(":", 1)[1])
        g = fg.cayley_ball(k, cfg.radius)
        return g, FreeGroupAction(k, cfg.cocycle_radius), k
    if not cfg.graph:
        raise TangentLpError("a graph file or a free:k action is required")
    g = read_graph(cfg.graph, cfg.measure)
    act = PermutationAction.from_json(g, cfg.action) if cfg.action else None
    return g, act, None


def ball_subgraph(g: MetricGraph, o: int, limit: int):
    """Largest ball B(o, r) with at most ``limit`` vertices, as an induced subgraph."""
    dist = bfs_distances(g, o)
    counts = np.cumsum(np.bincount(dist))
    r = int(np.searchsorted(counts, limit, side="right")) - 1
    r = max(r, 0)
    keep = np.flatnonzero(dist <= r)
    pos = -np.ones(g.n, dtype=np.int64)
    pos[keep] = np.arange(len(keep))
    mask = (pos[g.edges[:, 0]] >= 0) & (pos[g.edges[:, 1]] >= 0)
    sub = MetricGraph(pos[g.edges[mask]], g.weight[keep], tuple(g.labels[i] for i in keep))
    return sub, r, int(pos[o])


def _metric_stage(cfg: RunConfig, g: MetricGraph, o: int, free_k) -> tuple[dict, float, bool, object]:
    prof = growth_profile(g, o)
    if g.is_tree():
        delta, mode, lower = 0.0, "tree", False
        witness = None
    else:
        mode = cfg.delta_mode
        if mode == "auto":
            mode = "exact" if g.n <= DEFAULT_DELTA_CAP else "sampled"
        est = hyperbolicity_delta(
            all_pairs_distances(g), mode, basepoint=o, n_samples=cfg.delta_samples, seed=cfg.seed
        )
        delta, lower, witness = est.value, est.is_lower_bound, est.witness
    if free_k is not None:
        h_entropy = math.log(2 * free_k - 1)
    else:
        h_entropy = None
    out = {
        "vertices": g.n,
        "edges": g.m,
        "basepoint": g.labels[o],
        "delta": delta,
        "delta_mode": mode,
        "delta_is_lower_bound": lower,
        "delta_witness": None if witness is None else [g.labels[i] for i in witness],
        "growth": [float(v) for v in prof.f],
        "h_prime": prof.h_prime,
        "entropy": prof.entropy,
        "entropy_window": list(prof.window),
        "entropy_degenerate": prof.degenerate,
        "entropy_reference": h_entropy,
        "p_star": p_threshold(prof.entropy, delta),
    }
    return out, delta, lower, prof


def run_pipeline(cfg: RunConfig) -> tuple[dict, dict]:
    """Run every stage; returns (report, timings).

    A precondition failure stops the run and is recorded under ``error``
    together with everything computed so far.
    """
    timer = _Timer()
    report: dict = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": TOOL_VERSION,
        "config": cfg.echo(),
        "tolerances": {
            "bound_rtol": BOUND_RTOL,
            "identity_atol": IDENTITY_ATOL,
            "agreement_atol": AGREEMENT_ATOL,
        },
    }
    checks: dict[str, bool] = {}
    try:
        with timer.stage("load"):
            g, act, free_k = load_input(cfg)
            o = g.vertex(cfg.basepoint) if cfg.basepoint is not None else 0

        with timer.stage("metric"):
            metric, delta, delta_lower, prof = _metric_stage(cfg, g, o, free_k)
        report["metric"] = metric
        report["p_star"] = metric["p_star"]

        # certification graph: the whole graph, or a ball around o when too large
        with timer.stage("certification_graph"):
            if g.n <= cfg.max_cert_vertices:
                cg, co, cr = g, o, None
            else:
                cg, cr, co = ball_subgraph(g, o, cfg.max_cert_vertices)
            cd = all_pairs_distances(cg)
            if cg.is_tree():
                cdelta, cmode = 0.0, "tree"
            elif cg.n <= DEFAULT_DELTA_CAP:
                cdelta, cmode = hyperbolicity_delta(cd).value, "exact"
            else:
                cdelta, cmode = delta, metric["delta_mode"]
            pseudo = (
                PseudoParams.default(cdelta, cfg.D)
                if cfg.epsilon is None
                else PseudoParams(cfg.epsilon, cfg.D, cdelta)
            )
            cprof = growth_profile(cg, co, cd)
            params = BundleParams(pseudo, cfg.p, co, cprof)
        report["certification_graph"] = {
            "vertices": cg.n,
            "ball_radius": cr,
            "delta_bound": cdelta,
            "delta_bound_mode": cmode,
            "delta_bound_is_upper": cmode in ("tree", "exact"),
        }
        report["params"] = params.as_dict()

        with timer.stage("pseudometric"):
            report["pseudometric"] = _pseudo_stage(cfg, cg, cd, co, pseudo, checks)

        with timer.stage("bundle"):
            bundle = GraphBundle(cg, cd, params)
            report["bundle"] = _bundle_stage(cfg, bundle, checks)

        c = report["bundle"]["constants"]
        report["metric"]["non_collapsing"] = {"C": c["C"] / 2, "v": c["v"]}

        with timer.stage("action"):
            if isinstance(act, FreeGroupAction):
                report["action"] = _free_action_stage(cfg, act, checks)
            elif isinstance(act, PermutationAction):
                if cg is not g:
                    report["action"] = {"skipped": "permutation actions need the full graph to fit the certification limit"}
                else:
                    report["action"] = _graph_action_stage(cfg, act, bundle, checks)
            else:
                report["action"] = {"skipped": "no action given"}
    except TangentLpError as exc:
        report["error"] = error_object(exc)
    report["checks"] = dict(sorted(checks.items()))
    report["passed"] = "error" not in report and all(checks.values())
    return _clean(report), timer.times


def _pseudo_stage(cfg, g, d, o, pseudo, checks) -> dict:
    rng = np.random.default_rng(cfg.seed)
    others = rng.choice(g.n, size=min(4, g.n), replace=False)
    basepoints = list(dict.fromkeys([o, *map(int, others)]))
    bounds = []
    axioms_ok = True
    worst_excess = 0.0
    for a in basepoints:
        fld = pseudo_field(g, d, a, pseudo)
        rep = verify_bounds(fld, d).as_dict()
        rep["basepoint"] = g.labels[a]
        rep["worst_upper_pair"] = [g.labels[i] for i in rep["worst_upper_pair"]]
        if rep["worst_lower_pair"] is not None:
            rep["worst_lower_pair"] = [g.labels[i] for i in rep["worst_lower_pair"]]
        bounds.append(rep)
        ax = check_pseudometric_axioms(fld)
        axioms_ok &= ax["passed"]
        worst_excess = max(worst_excess, ax["max_triangle_excess"])
    fld = pseudo_field(g, d, o, pseudo)
    oracle = random_path_oracle(g, d, fld, cfg.path_samples, cfg.seed).as_dict()
    checks["pseudometric.bounds"] = all(b["passed"] for b in bounds)
    checks["pseudometric.axioms"] = bool(axioms_ok)
    checks["pseudometric.path_oracle"] = oracle["passed"]
    return {
        "bounds": bounds,
        "axioms": {"passed": bool(axioms_ok), "max_triangle_excess": worst_excess},
        "path_oracle": oracle,
    }


def _bundle_stage(cfg, bundle: GraphBundle, checks) -> dict:
    g = bundle.g
    orbits = vertex_orbits(g)
    norm = verify_norm_bound(bundle, orbits).as_dict()
    mode = cfg.curvature_mode
    if mode == "auto":
        mode = "exhaustive" if orbits.count * g.n <= 400_000 else "sampled"
    curv = verify_curvature(
        bundle,
        cfg.curvature_C,
        mode,
        n_samples=cfg.curvature_samples,
        seed=cfg.seed,
        orbits=orbits,
        n_jobs=cfg.jobs,
    )
    consts = PropernessConstants.from_bundle(bundle, cfg.C)
    prop = verify_properness(bundle, consts, n_jobs=cfg.jobs)
    checks["bundle.norm_bound"] = norm["passed"]
    checks["bundle.curvature"] = curv.passed
    checks["bundle.properness"] = prop.passed
    return {
        "orbits": {"method": orbits.method, "count": orbits.count},
        "norm_bound": norm,
        "curvature": curv.as_dict(),
        "curvature_decay": [list(r) for r in curv.decay],
        "constants": {
            "E": bundle.params.E,
            "D_C": curv.D_C,
            **consts.as_dict(),
        },
        "properness": prop.as_dict(),
        "properness_rows": [[g.labels[r[0]], g.labels[r[1]], *r[2:]] for r in prop.rows],
    }


def _word_pairs(k: int, n: int, max_len: int, seed: int):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        g = fg.random_word(k, int(rng.integers(0, max_len + 1)), rng)
        h = fg.random_word(k, int(rng.integers(0, max_len + 1)), rng)
        out.append((g, h))
    return out


def growth_lengths(threshold: float) -> list[int]:
    t = int(math.ceil(threshold))
    return list(range(0, 13)) + [t, t + 5, t + 10]


def _free_action_stage(cfg, act: FreeGroupAction, checks) -> dict:
    frame = TreeFrame.build(act, cfg.epsilon, cfg.p, cfg.D, cfg.fiber_radius)
    iso = act.check_isometry().as_dict()
    pairs = _word_pairs(act.k, cfg.word_pairs, cfg.max_word_length, cfg.seed)
    ident, closed, rep = [], [], []
    for i, (g, h) in enumerate(pairs):
        ident.append(verify_cocycle_identity(frame, g, h, seed=cfg.seed + i))
        if i < 20:
            closed.append(verify_closed_form(frame, g, seed=cfg.seed + i))
            rep.append(verify_representation(frame, g, h, random_section(frame, cfg.seed + i), seed=cfg.seed + i))
    worst_id = max(ident, key=lambda r: r.max_residual)
    worst_cf = max(closed, key=lambda r: r.max_residual)
    consts = free_constants(frame, cfg.C)
    norms = []
    for L in growth_lengths(consts.threshold):
        word = ("ab" * L)[:L]
        norms.append(cocycle_norm(frame, word, consts=consts).as_dict())
    # along one geodesic with a common truncation, the norm must not decrease
    Lmax = growth_lengths(consts.threshold)[-1]
    R = int(Lmax + consts.threshold + 2)
    along = [cocycle_norm(frame, ("ab" * Lmax)[:L], R=R, consts=consts).norm_p for L in range(0, 13)]
    monotone = all(b >= a - 1e-12 for a, b in zip(along, along[1:]))
    oracle_rows = [brute_force_check(act.k, w).as_dict() for L in range(0, 5) for w in fg.words_of_length(act.k, L)]
    checks["action.isometry"] = iso["passed"]
    checks["action.cocycle_identity"] = all(r.passed for r in ident)
    checks["action.closed_form"] = all(r.passed for r in closed)
    checks["action.representation"] = all(r["passed"] for r in rep)
    checks["action.growth_envelope"] = all(n["passed"] for n in norms)
    checks["action.monotone_prefixes"] = monotone
    checks["action.oracles"] = all(r["passed"] for r in oracle_rows)
    return {
        "kind": f"free:{act.k}",
        "truncation_radius": act.radius,
        "fiber_radius": frame.fiber_radius,
        "isometry": iso,
        "cocycle_identity": {"pairs": len(ident), "worst": worst_id.as_dict()},
        "closed_form": {"words": len(closed), "worst": worst_cf.as_dict()},
        "representation": {
            "checks": len(rep),
            "max_isometry_error": max(r["isometry_error"] for r in rep),
            "max_homomorphism_error": max(r["homomorphism_error"] for r in rep),
        },
        "constants": consts.as_dict(),
        "cocycle_norms": norms,
        "prefix_norms": {"radius": R, "norm_p": along, "nondecreasing": monotone},
        "oracles": {
            "words": len(oracle_rows),
            "passed": all(r["passed"] for r in oracle_rows),
            "double_norm_note": "nested 2-of-1 norm is sqrt(4|g| - 2), square-root growth",
        },
    }


def _graph_action_stage(cfg, act: PermutationAction, bundle: GraphBundle, checks) -> dict:
    frame = GraphFrame(act, bundle)
    iso = act.check_isometry().as_dict()
    if not iso["passed"]:
        checks["action.isometry"] = False
        return {"kind": "permutation", "isometry": iso}
    gens = list(act.generators)
    rng = np.random.default_rng(cfg.seed)

    def rand_word():
        n = int(rng.integers(0, cfg.max_word_length + 1))
        toks = " ".join(
            gens[int(rng.integers(len(gens)))] + ("^-1" if rng.integers(2) else "") for _ in range(n)
        )
        return toks or "1"

    pairs = [(rand_word(), rand_word()) for _ in range(cfg.word_pairs)]
    ident = [verify_cocycle_identity(frame, g, h) for g, h in pairs]
    closed = [verify_closed_form(frame, g) for g, _ in pairs[:20]]
    rep = [verify_representation(frame, g, h, random_section(frame, cfg.seed + i)) for i, (g, h) in enumerate(pairs[:20])]
    norms = [
        {"word": w, "norm_p": n, "norm": n ** (1.0 / cfg.p)} for w in gens for n in [cocycle_norm_graph(frame, w)]
    ]
    checks["action.isometry"] = iso["passed"]
    checks["action.cocycle_identity"] = all(r.passed for r in ident)
    checks["action.closed_form"] = all(r.passed for r in closed)
    checks["action.representation"] = all(r["passed"] for r in rep)
    return {
        "kind": "permutation",
        "isometry": iso,
        "cocycle_identity": {"pairs": len(ident), "worst": max(ident, key=lambda r: r.max_residual).as_dict()},
        "closed_form": {"words": len(closed), "worst": max(closed, key=lambda r: r.max_residual).as_dict()},
        "representation": {
            "checks": len(rep),
            "max_isometry_error": max(r["isometry_error"] for r in rep),
            "max_homomorphism_error": max(r["homomorphism_error"] for r in rep),
        },
        "cocycle_norms": norms,
    }


# -- emission ----------------------------------------------------------------


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def emit_json(report: dict, path) -> None:
    Path(path).write_text(dumps(report), encoding="utf-8")


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])


def emit_csv_tables(report: dict, directory) -> list[Path]:
    """One file per plot series; properness rows are kept even when skipped."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    bundle = report.get("bundle")
    if bundle:
        p = out / "curvature_decay.csv"
        _write_csv(p, ["d_a_x", "triples", "mean_diff_norm", "max_diff_norm"], bundle["curvature_decay"])
        written.append(p)
        p = out / "properness.csv"
        _write_csv(p, ["x", "y", "d_xy", "S", "lower_bound", "witness_measure", "status"], bundle["properness_rows"])
        written.append(p)
    action = report.get("action") or {}
    if action.get("cocycle_norms"):
        p = out / "cocycle_norms.csv"
        keys = ["word", "length", "norm_p", "tail_bound", "lower_bound", "upper_bound", "norm"]
        _write_csv(p, keys, [[n.get(k) for k in keys] for n in action["cocycle_norms"]])
        written.append(p)
    return written
