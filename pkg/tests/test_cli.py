import csv
import json
import shutil
import subprocess
from pathlib import Path

import pytest

from qndlab import experiments
from qndlab.cli import main
from qndlab.errors import ConfigError
from qndlab.experiments import ReportRow, parse_config, run_experiment

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def read_rows(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_minimal_goodness(tmp_path):
    cfg = write(tmp_path, "kind: goodness\npolynomials: [[0, 1]]\nintervals: [[0, 1]]\n")
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rows = read_rows(tmp_path / "o" / "report.csv")
    assert len(rows) == 1 and rows[0]["status"] == "pass"


def test_theorem11_parabolic_config(tmp_path):
    assert main(["run", str(CONFIGS / "theorem11_parabolic.yaml"), "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "report.csv")
    assert len(rows) == 4
    assert all(r["pass"] == "true" for r in rows)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["totals"]["pass"] == 4
    assert summary["config"]["kind"] == "theorem11"


def test_negative_T_names_the_field(tmp_path, capsys):
    cfg = write(tmp_path, (CONFIGS / "theorem11_parabolic.yaml").read_text().replace("T: 50", "T: -5"))
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "trajectory.T" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize("text, field", [
    ("kind: nonsense\n", "kind"),
    ("kind: bad_set\ntrajectory: {T: 1}\n", "group"),
    ("kind: theorem11\ngroup: sl2z\ntrajectory: {T: 1}\nsweep: {eps: [2.0]}\n", "sweep.eps[0]"),
    ("kind: theorem11\ngroup: nope\ntrajectory: {T: 1}\nsweep: {eps: [0.5]}\n", "unknown group"),
    ("kind: goodness\npolynomials: []\nintervals: [[0, 1]]\n", "polynomials"),
    ("kind: goodness\npolynomials: [[1]]\nintervals: [[1, 0]]\n", "intervals[0]"),
    (": : :\n", "YAML"),
])
def test_config_errors(text, field):
    with pytest.raises(ConfigError, match=field.replace("[", r"\[").replace("]", r"\]")):
        parse_config(text)


def test_list_specs(capsys):
    assert main(["list-specs"]) == 0
    out = capsys.readouterr().out
    assert "sl2r" in out
    cat = json.loads(out)
    assert cat["groups"]["schottky"]["torsion_free"] is True
    assert cat["groups"]["sl2z"]["torsion_free"] is False
    assert cat["groups"]["sl2z"]["torsion_found"] is True
    assert cat["groups"]["sl2z"]["condition_star_on_ball"] is False


def test_version(capsys):
    assert main(["version"]) == 0
    assert "0.1.0" in capsys.readouterr().out


def _strip_wall_time(path):
    return [{k: v for k, v in r.items() if k != "wall_time"} for r in read_rows(path)]


def test_determinism_across_threads(tmp_path):
    cfg = str(CONFIGS / "km_bound.yaml")
    assert main(["run", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["run", cfg, "--out", str(tmp_path / "b"), "--threads", "3"]) == 0
    assert _strip_wall_time(tmp_path / "a" / "report.csv") == _strip_wall_time(tmp_path / "b" / "report.csv")


def test_seed_changes_random_instances(tmp_path):
    cfg = str(CONFIGS / "km_bound.yaml")
    main(["run", cfg, "--out", str(tmp_path / "a"), "--seed", "1"])
    main(["run", cfg, "--out", str(tmp_path / "b"), "--seed", "2"])
    assert _strip_wall_time(tmp_path / "a" / "report.csv") != _strip_wall_time(tmp_path / "b" / "report.csv")


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.yaml")))
def test_shipped_configs_pass_and_flags_rederive(name, tmp_path):
    code = main(["run", str(CONFIGS / name), "--out", str(tmp_path)])
    assert code == 0
    for r in read_rows(tmp_path / "report.csv"):
        assert r["schema_version"] == "1"
        if r["relation"]:
            m, b = float(r["measured"]), float(r["bound"])
            ok = m <= b if r["relation"] == "<=" else m >= b
            assert r["pass"] == str(ok).lower()
            assert r["status"] == ("pass" if ok else "fail")


def test_budget_exceeded_exit_code(tmp_path):
    cfg = str(CONFIGS / "dichotomy.yaml")
    assert main(["run", cfg, "--out", str(tmp_path / "o"), "--budget", "2"]) == 3
    rows = read_rows(tmp_path / "o" / "report.csv")
    assert "partial" in {r["status"] for r in rows}


def test_failed_check_exit_code(tmp_path, monkeypatch):
    def failing(cfg, pt, rng):
        return experiments._judged(ReportRow(cfg.id, 0, cfg.kind, {}, "", 2.0, "<=", 1.0))

    monkeypatch.setitem(experiments._RUNNERS, "goodness", failing)
    cfg = write(tmp_path, "kind: goodness\npolynomials: [[0, 1]]\nintervals: [[0, 1]]\n")
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert read_rows(tmp_path / "o" / "report.csv")[0]["pass"] == "false"


@pytest.mark.skipif(shutil.which("git") is None, reason="git not available")
def test_input_hash_is_git_blob_hash(tmp_path):
    src = CONFIGS / "goodness.yaml"
    res = run_experiment(parse_config(src.read_bytes()))
    want = subprocess.run(["git", "hash-object", str(src)], capture_output=True, text=True).stdout.strip()
    assert res.summary["input_hash"] == want


def _doc_examples():
    text = (Path(__file__).resolve().parents[1] / "docs" / "config_schema.md").read_text()
    return [block.split("```", 1)[0] for block in text.split("```yaml\n")[1:]]


@pytest.mark.parametrize("block", _doc_examples())
def test_documented_examples_parse(block):
    parse_config(block)
