import csv
import io
import json

import pytest

from honeycomb_rg import cli
from honeycomb_rg.sectors import sector_count


def test_config_precedence(tmp_path):
    f = tmp_path / "run.ini"
    f.write_text("[run]\ngamma = 12\nseed = 4\nlam = 2e-3\n")
    cfg = cli.load_config(f, env={"HONEYCOMB_RG_SEED": "7"}, overrides={"lam": 5e-4})
    assert cfg.gamma == 12.0 and cfg.seed == 7 and cfg.lam == 5e-4


def test_config_temperature_list(tmp_path):
    cfg = cli.load_config(None, env={"HONEYCOMB_RG_TEMPERATURES": "0.2, 0.02"})
    assert cfg.temperatures == (0.2, 0.02)


@pytest.mark.parametrize("env", [{"HONEYCOMB_RG_GAMMA": "5"}, {"HONEYCOMB_RG_GEVREY_H": "1"},
                                 {"HONEYCOMB_RG_TEMPERATURE": "2"},
                                 {"HONEYCOMB_RG_SEED": "abc"}])
def test_config_validation(env):
    with pytest.raises(cli.ConfigError):
        cli.load_config(None, env=env)


def test_unknown_key_rejected(tmp_path):
    f = tmp_path / "run.ini"
    f.write_text("[run]\nbogus = 1\n")
    with pytest.raises(cli.ConfigError):
        cli.load_config(f, env={})


def test_hash_ignores_workers_and_paths():
    a = cli.RunConfig(workers=1, output_dir="a")
    b = cli.RunConfig(workers=3, output_dir="b")
    assert a.hash() == b.hash()
    assert a.hash() != cli.RunConfig(seed=1).hash()


def test_float_format_roundtrip():
    for x in (0.1, 1 / 3, 1e-300, 2.5e17):
        assert float(cli.fmt(x)) == x
    assert cli.fmt(float("inf")) == "inf" and cli.fmt(True) == "true"


def test_bad_usage_exit_code(monkeypatch, tmp_path):
    monkeypatch.setenv("HONEYCOMB_RG_GAMMA", "3")
    assert cli.main(["check", "cutoffs"]) == cli.EXIT_USAGE


def test_size_refusal_exit_code():
    assert cli.main(["expand", "jungles", "--n", "9"]) == cli.EXIT_REFUSAL


def test_domain_refusal_exit_code(monkeypatch, tmp_path):
    monkeypatch.setenv("HONEYCOMB_RG_LAM", "0.5")
    code = cli.main(["check", "bounds", "--suite", "renorm", "--out-dir", str(tmp_path)])
    assert code == cli.EXIT_REFUSAL


def test_sectors_listing(tmp_path, monkeypatch):
    monkeypatch.delenv("HONEYCOMB_RG_GAMMA", raising=False)
    out = tmp_path / "s.csv"
    assert cli.main(["sectors", "--j", "4", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == sector_count(4)
    assert {r["class"] for r in rows} >= {"corner", "diagonal"}


def test_dump_surface(tmp_path):
    out = tmp_path / "f.csv"
    assert cli.main(["dump-surface", "--n", "5", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 6 * 3 * 5
    assert max(abs(float(r["e"])) for r in rows) < 1e-12


def test_expand_jungles_and_arches(tmp_path):
    out = tmp_path / "j.csv"
    assert cli.main(["expand", "jungles", "--n", "3", "--m", "2", "--connected",
                     "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 3 * 2 ** 2
    assert all(r["induction_pass"] == "true" for r in rows)
    tree = tmp_path / "t.json"
    tree.write_text(json.dumps({"n_vertices": 4, "edges": [[0, 1], [1, 2], [2, 3]],
                                "y": 0, "z": 3}))
    out = tmp_path / "a.csv"
    assert cli.main(["expand", "arches", "--tree", str(tree), "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert rows and all(r["minimal"] == "true" and r["is_1pi"] == "true" for r in rows)
    tree.write_text("{}")
    assert cli.main(["expand", "arches", "--tree", str(tree)]) == cli.EXIT_USAGE


def test_selfenergy_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert cli.main(["selfenergy", "sunshine", "--T-list", "0.1", "0.01", "--N", "8",
                     "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [float(r["T"]) for r in rows] == [0.1, 0.01]
    assert set(rows[0]) == {"T", "abs_sigma", "d1", "d2_k0", "d2_spatial", "slope_fit"}


def test_check_cutoffs_json(capsys):
    assert cli.main(["check", "cutoffs"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["test"] == "cutoffs" and rep["pass"] and rep["max_error"] < 1e-12


def test_suite_deterministic_across_workers(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["check", "bounds", "--suite", "arch", "--out-dir", str(a)]) == 0
    cli.main(["check", "bounds", "--suite", "counting", "--out-dir", str(a)])
    cli.main(["check", "bounds", "--suite", "counting", "--out-dir", str(b), "--workers", "2"])
    assert (a / "counting.csv").read_bytes() == (b / "counting.csv").read_bytes()
    assert (a / "counting.json").read_bytes() == (b / "counting.json").read_bytes()


def test_report_merge(tmp_path):
    rep = {"suite": "x", "config_hash": "h1", "config": {}, "pass": True,
           "rows": [{"suite": "x", "tag": "t", "passed": True}]}
    p1, p2, p3 = tmp_path / "1.json", tmp_path / "2.json", tmp_path / "3.json"
    p1.write_text(json.dumps(rep))
    p2.write_text(json.dumps(dict(rep, suite="y")))
    p3.write_text(json.dumps(dict(rep, config_hash="h2")))
    out = tmp_path / "m.json"
    assert cli.main(["report", "merge", str(p1), str(p2), "--out", str(out)]) == 0
    merged = json.loads(out.read_text())
    assert merged["suites"] == ["x", "y"] and merged["tags"]["t"]["rows"] == 2
    assert cli.main(["report", "merge", str(p1), str(p3)]) == cli.EXIT_USAGE
