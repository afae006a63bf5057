import json
import math


from tangentlp.graph import path_graph, write_graph
from tangentlp.pipeline import RunConfig, ball_subgraph, dumps, run_pipeline
from tangentlp import freegroup as fg


def test_path_graph_run(tmp_path):
    write_graph(path_graph(120), tmp_path / "p.tsv")
    rep, times = run_pipeline(RunConfig(graph=str(tmp_path / "p.tsv"), basepoint="0"))
    assert rep["metric"]["delta"] == 0.0
    assert rep["metric"]["entropy"] < 0.2
    assert rep["p_star"] == 1.0
    prop = rep["bundle"]["properness"]
    assert prop["in_scope"] > 0 and prop["passed"] and prop["skipped_reason"] is None
    endpoint = [r for r in rep["bundle"]["properness_rows"] if {r[0], r[1]} == {"0", "119"}]
    assert len(endpoint) == 1 and endpoint[0][-1] == "ok"
    assert rep["action"] == {"skipped": "no action given"}
    assert rep["passed"]
    assert set(times) >= {"metric", "pseudometric", "bundle"}


def test_partial_report_on_error(tmp_path):
    (tmp_path / "bad.tsv").write_text("a\tb\nbroken\n")
    rep, _ = run_pipeline(RunConfig(graph=str(tmp_path / "bad.tsv")))
    assert rep["error"]["type"] == "GraphParseError" and rep["error"]["line"] == 2
    assert not rep["passed"] and "metric" not in rep
    rep, _ = run_pipeline(RunConfig(action="free:2", radius=3, epsilon=5.0))
    assert rep["error"]["type"] == "AdmissibilityError"
    assert "metric" in rep and "bundle" not in rep


def test_certification_sub_ball():
    g = fg.cayley_ball(2, 7)
    sub, r, o = ball_subgraph(g, 0, 2000)
    assert r == 6 and sub.n == fg.ball_size(2, 6) and sub.is_tree()
    assert sub.labels[o] == g.labels[0]


def test_report_numbers_are_finite():
    rep, _ = run_pipeline(RunConfig(action="free:2", radius=3, cocycle_radius=10, word_pairs=5))
    text = dumps(rep)
    assert "NaN" not in text and "Infinity" not in text
    c = rep["bundle"]["constants"]
    for key in ("E", "D_C", "C", "C_prime", "K", "K_prime", "v"):
        assert math.isfinite(c[key])
    for key in ("alpha", "beta", "epsilon"):
        assert key in json.dumps(rep["params"])
