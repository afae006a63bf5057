import csv
import io
import json

import pytest

from tangentlp.cli import main
from tangentlp.config import SCHEMA_VERSION, TOOL_VERSION
from tangentlp.pipeline import RunConfig, dumps, emit_csv_tables, run_pipeline


def run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    (tmp_path / "c6.tsv").write_text("".join(f"{i}\t{(i + 1) % 6}\n" for i in range(6)))
    (tmp_path / "path.tsv").write_text("".join(f"v{i}\tv{i + 1}\n" for i in range(99)))
    (tmp_path / "bad.tsv").write_text("a\tb\nb\tc\nc d\n")
    (tmp_path / "rot.json").write_text(json.dumps({"r": [str((i + 1) % 6) for i in range(6)]}))
    (tmp_path / "flip.json").write_text(json.dumps({"s": ["1", "0", "2", "3", "4", "5"]}))
    (tmp_path / "words.txt").write_text("ab\n# comment\naBBa\n1\n")
    return tmp_path


def test_version(capsys):
    code, out, _ = run(["--version"], capsys)
    assert code == 0 and TOOL_VERSION in out and SCHEMA_VERSION in out


def test_analyze(files, capsys):
    code, out, _ = run(["analyze", "--graph", str(files / "c6.tsv")], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["metric"]["delta"] == 1.0 and rep["metric"]["p_star"] == 1.0
    code, out, _ = run(["analyze", "--action", "free:2", "--radius", "6"], capsys)
    assert json.loads(out)["metric"]["delta_mode"] == "tree"


def test_parse_error_exit_code(files, capsys):
    code, _, err = run(["analyze", "--graph", str(files / "bad.tsv")], capsys)
    obj = json.loads(err)["error"]
    assert code == 2 and obj["type"] == "GraphParseError" and obj["line"] == 3


def test_usage_error_is_json(capsys):
    code, _, err = run(["analyze", "--delta-mode", "bogus"], capsys)
    assert code == 2 and json.loads(err)["error"]["type"] == "UsageError"


def test_sampled_modes_need_seed(files, capsys):
    code, _, err = run(["analyze", "--graph", str(files / "c6.tsv"), "--delta-mode", "sampled"], capsys)
    assert code == 2 and "--seed" in json.loads(err)["error"]["message"]
    code, _, _ = run(["cocycle", "--action", "free:2", "--random", "3"], capsys)
    assert code == 2
    code, _, _ = run(["bundle", "verify", "--graph", str(files / "c6.tsv"), "--mode", "sampled"], capsys)
    assert code == 2


def test_pseudometric_csv(files, capsys):
    code, out, _ = run(["pseudometric", "--graph", str(files / "path.tsv"), "--base", "v0", "--sources", "v3,v10"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 200
    assert list(rows[0]) == ["x", "y", "d", "gromov_product", "d_eps", "upper_slack", "lower_slack"]
    assert all(float(r["upper_slack"]) >= 0 for r in rows)
    assert all(r["lower_slack"] == "" or float(r["lower_slack"]) >= 0 for r in rows)


def test_admissibility_error(files, capsys):
    code, _, err = run(["pseudometric", "--graph", str(files / "path.tsv"), "--base", "v0", "--epsilon", "2"], capsys)
    assert code == 2 and json.loads(err)["error"]["type"] == "AdmissibilityError"


def test_bundle_verify(files, capsys, tmp_path):
    out = tmp_path / "b.json"
    code, _, _ = run(["bundle", "verify", "--graph", str(files / "path.tsv"), "--out", str(out)], capsys)
    rep = json.loads(out.read_text())
    assert code == 0 and rep["passed"]
    for key in ("alpha", "beta"):
        assert key in rep["params"]
    for key in ("E", "D_C", "C", "C_prime", "K", "K_prime", "v"):
        assert key in rep["constants"]
    assert rep["properness"]["in_scope"] > 0


def test_cocycle_csv(files, capsys):
    code, out, _ = run(["cocycle", "--action", "free:2", "--words", str(files / "words.txt")], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["word"] for r in rows] == ["ab", "aBBa", "1"]
    assert rows[2]["norm_p"] == "0.0"
    assert float(rows[0]["norm_p"]) <= float(rows[0]["upper_bound"])
    code, out, _ = run(["cocycle", "--action", "free:2", "--random", "4", "--seed", "1", "--max-length", "5"], capsys)
    assert code == 0 and len(list(csv.DictReader(io.StringIO(out)))) == 4


def test_cocycle_on_finite_graph(files, capsys):
    code, out, _ = run(
        ["cocycle", "--graph", str(files / "c6.tsv"), "--action", str(files / "rot.json"), "--words", str(files / "words.txt")],
        capsys,
    )
    assert code == 2  # "ab" uses generators the action does not have
    (files / "w2.txt").write_text("r\nr r\nr r r r r r\n")
    code, out, _ = run(
        ["cocycle", "--graph", str(files / "c6.tsv"), "--action", str(files / "rot.json"), "--words", str(files / "w2.txt")],
        capsys,
    )
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and float(rows[2]["norm_p"]) < 1e-20


def test_run_and_config_round_trip(files, capsys, tmp_path):
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    args = ["run", "--graph", str(files / "c6.tsv"), "--action", str(files / "rot.json"), "--seed", "3", "--pairs", "20"]
    code, _, _ = run(args + ["--out", str(out1), "--csv-dir", str(tmp_path / "csv"), "--timings", str(tmp_path / "t.json")], capsys)
    assert code == 0
    rep = json.loads(out1.read_text())
    assert rep["passed"] and "error" not in rep
    assert sorted(p.name for p in (tmp_path / "csv").iterdir()) == ["cocycle_norms.csv", "curvature_decay.csv", "properness.csv"]
    assert "bundle" in json.loads((tmp_path / "t.json").read_text())
    cfg = RunConfig.from_dict(rep["config"])
    assert cfg.echo() == rep["config"]
    code, _, _ = run(["run", "--config", str(out1), "--out", str(out2)], capsys)
    assert code == 0 and out1.read_bytes() == out2.read_bytes()


def test_run_reports_violations_with_exit_1(files, capsys, tmp_path):
    out = tmp_path / "v.json"
    code, _, _ = run(["run", "--graph", str(files / "c6.tsv"), "--action", str(files / "flip.json"), "--seed", "0", "--out", str(out)], capsys)
    rep = json.loads(out.read_text())
    assert code == 1 and not rep["passed"] and rep["checks"]["action.isometry"] is False
    assert rep["action"]["isometry"]["witness"] is not None


def test_run_needs_seed(files, capsys):
    code, _, _ = run(["run", "--graph", str(files / "c6.tsv")], capsys)
    assert code == 2


def test_skipped_properness_rows_are_emitted(tmp_path):
    rep, _ = run_pipeline(RunConfig(graph=None, action="free:2", radius=3, cocycle_radius=8, word_pairs=5, max_word_length=3))
    rows = rep["bundle"]["properness_rows"]
    assert rows and all(r[-1] == "skipped" for r in rows)
    emit_csv_tables(rep, tmp_path)
    lines = (tmp_path / "properness.csv").read_text().splitlines()
    assert lines[0].startswith("x,y,d_xy") and len(lines) == len(rows) + 1
    assert dumps(rep) == dumps(json.loads(dumps(rep)))


def test_pseudometric_defaults_to_first_vertex(capsys):
    code, out, _ = run(["pseudometric", "--action", "free:2", "--radius", "2"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["x"] == "1" and len(rows) == 17 * 17
