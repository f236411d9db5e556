import csv
import json

import pytest
from click.testing import CliRunner

from robustim.cli import main
from robustim.harness import SUMMARY_COLUMNS, SWEEP_COLUMNS
from robustim.robust import GREEDY_FACTOR


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def star(tmp_path, runner):
    out = tmp_path / "star"
    res = runner.invoke(main, ["gen", "star-forest", "--k-pairs", "2", "--leaves", "3", "--out-dir", str(out)])
    assert res.exit_code == 0, res.output
    return out


def test_gen_kinds(tmp_path, runner):
    for kind in ("star-forest", "two-cluster", "wc"):
        res = runner.invoke(main, ["gen", kind, "--out-dir", str(tmp_path / kind), "--n", "40", "--half-size", "3"])
        assert res.exit_code == 0, res.output
        info = json.loads(res.output)
        assert (tmp_path / kind / "graph.tsv").exists() and (tmp_path / kind / "space.tsv").exists()
        assert info["m"] > 0


def test_spread_exact(star, runner):
    res = runner.invoke(main, ["spread", "--graph", str(star / "graph.tsv"), "--seeds", "0", "--exact"])
    assert res.exit_code == 0, res.output
    assert json.loads(res.output)["mean"] == pytest.approx(1 + 3 * 0.5)


def test_greedy_exact(star, runner):
    res = runner.invoke(main, ["greedy", "--graph", str(star / "graph.tsv"), "--k", "2", "--exact"])
    assert json.loads(res.output)["seed_set"] == [0, 4]


def test_certify_example(star, runner, tmp_path):
    out = tmp_path / "cert.json"
    res = runner.invoke(main, ["certify", "--graph", str(star / "graph.tsv"), "--space", str(star / "space.tsv"),
                               "--k", "2", "--exact", "--out", str(out)])
    assert res.exit_code == 0, res.output
    cert = json.loads(out.read_text())
    assert cert["alpha"] == pytest.approx(8 / 17)
    assert cert["lower_bound"] == pytest.approx(8 / 17 * GREEDY_FACTOR)
    assert cert["alpha_bar"] == pytest.approx(8 / 17)


def test_certify_point_space(tmp_path, runner):
    (tmp_path / "g.tsv").write_text("0\t1\t0.5\n1\t2\t0.5\n")
    (tmp_path / "s.tsv").write_text("0\t0.5\t0.5\n1\t0.5\t0.5\n")
    res = runner.invoke(main, ["certify", "--graph", str(tmp_path / "g.tsv"), "--space", str(tmp_path / "s.tsv"),
                               "--k", "1", "--exact"])
    assert json.loads(res.output)["alpha"] == pytest.approx(1.0)


def test_certify_min_bound_exit(star, runner):
    res = runner.invoke(main, ["certify", "--graph", str(star / "graph.tsv"), "--space", str(star / "space.tsv"),
                               "--k", "2", "--exact", "--min-bound", "0.5"])
    assert res.exit_code == 3


def test_certify_malformed_space(star, runner, tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("0\t0.9\t0.1\n")
    out = tmp_path / "cert.json"
    res = runner.invoke(main, ["certify", "--graph", str(star / "graph.tsv"), "--space", str(bad),
                               "--k", "2", "--exact", "--out", str(out)])
    assert res.exit_code != 0
    assert res.stdout == "" and not out.exists()


def test_env_var_override(star, runner):
    res = runner.invoke(main, ["spread", "--graph", str(star / "graph.tsv"), "--seeds", "0"],
                        env={"ROBUSTIM_SPREAD_NUM_SIMS": "123"})
    assert json.loads(res.output)["num_sims"] == 123


def test_width_sweep_outputs(tmp_path, runner):
    out = tmp_path / "ws"
    res = runner.invoke(main, ["width-sweep", "--fixture", "wc:n=60,links=2", "--k", "2", "--widths", "0,0.2",
                               "--num-sims", "300", "--cascades", "20", "--out-dir", str(out)])
    assert res.exit_code == 0, res.output
    rows = list(csv.DictReader(open(out / "width_sweep.csv")))
    assert tuple(rows[0]) == SWEEP_COLUMNS and len(rows) == 2
    for r in rows:
        assert float(r["alpha_bar"]) >= float(r["alpha"]) * GREEDY_FACTOR
    meta = json.loads((out / "meta.json").read_text())
    assert meta["config"]["seed"] == 0 and "width_interval" in meta["conventions"]


def test_sampler_compare_outputs(tmp_path, runner):
    out = tmp_path / "sc"
    res = runner.invoke(main, ["sampler-compare", "--fixture", "star-forest:k_pairs=1,t=3", "--k", "1",
                               "--num-sims", "200", "--max-iters", "3", "--out-dir", str(out)])
    assert res.exit_code == 0, res.output
    summary = list(csv.DictReader(open(out / "summary.csv")))
    assert tuple(summary[0]) == SUMMARY_COLUMNS
    assert [r["sampler"] for r in summary] == ["US", "ICS", "OES"]
    firsts = {open(out / f"trace_{s}.csv").read().splitlines()[1].split(",")[2] for s in ("US", "ICS", "OES")}
    assert len(firsts) == 1  # shared initial samples -> same iteration-0 alpha


def test_sampler_compare_rejects_unknown(runner, tmp_path):
    res = runner.invoke(main, ["sampler-compare", "--fixture", "star-forest", "--roster", "US,XYZ",
                               "--out-dir", str(tmp_path)])
    assert res.exit_code != 0


def test_width_sweep_needs_one_source(runner, tmp_path):
    res = runner.invoke(main, ["width-sweep", "--out-dir", str(tmp_path)])
    assert res.exit_code != 0
