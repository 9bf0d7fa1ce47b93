import json

import numpy as np
import pytest

from gestlex import FeatureDataset, best_lexicon
from gestlex import cli
from gestlex.cli import RunConfig, load_matrix_csv, main, run
from gestlex.data import write_features

RATINGS = {"a": 0.9, "b": 0.2, "c": 0.7, "d": 0.5}


@pytest.fixture
def abcd(tmp_path):
    rng = np.random.default_rng(0)
    centers = {"a": (0, 0), "b": (6, 0), "c": (0, 6), "d": (6, 6)}
    ds = FeatureDataset(list(centers), [rng.standard_normal((12, 2)) + c for c in centers.values()])
    feats = tmp_path / "feats.csv"
    write_features(ds, feats)
    ratings = tmp_path / "ratings.csv"
    ratings.write_text("class,rating\n" + "".join(f"{k},{v}\n" for k, v in RATINGS.items()))
    return feats, ratings


def test_fig1_both_modes_agree_at_two(tmp_path):
    out = tmp_path / "r.json"
    assert main(["--preset", "fig1", "--sizes", "2", "--mode", "both", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    lex = rep["lexicons"]["2"]
    assert lex["exact"]["members"] == lex["greedy"]["members"]
    for name in ("edrm", "tm"):
        assert (tmp_path / f"r_{name}.csv").is_file()
    assert not (tmp_path / "r_sm.csv").exists()


def test_subjective_only_pair(abcd, tmp_path):
    feats, ratings = abcd
    out = tmp_path / "t.json"
    code = main(["--input", str(feats), "--ratings", str(ratings), "--alpha", "1",
                 "--sizes", "2,3", "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["lexicons"]["2"]["exact"]["members"] == ["a", "c"]
    assert rep["lexicons"]["2"]["exact"]["score"] == 0.8
    assert rep["lexicons"]["3"]["exact"]["members"] == ["a", "c", "d"]


def test_alpha_sweep_is_convex_combination(abcd):
    feats, ratings = abcd
    tm = {a: run(RunConfig(input=str(feats), ratings=str(ratings), alpha=a)) for a in
          (0.0, 0.25, 0.5, 0.75, 1.0)}
    E = np.array(tm[0.0]["matrices"]["tm"])
    S = np.array(tm[1.0]["matrices"]["tm"])
    for a in (0.25, 0.5, 0.75):
        np.testing.assert_allclose(tm[a]["matrices"]["tm"], a * S + (1 - a) * E, atol=1e-15)


def test_byte_identical_reruns(tmp_path):
    args = ["--preset", "fig1", "--sizes", "2-3", "--mode", "both", "--seed", "2"]
    for k in (1, 2):
        assert main([*args, "--out", str(tmp_path / f"run{k}" / "r.json")]) == 0
    for name in ("r.json", "r_edrm.csv", "r_tm.csv"):
        assert (tmp_path / "run1" / name).read_bytes() == (tmp_path / "run2" / name).read_bytes()


def test_stdout_when_no_out(capsys):
    assert main(["--preset", "fig1", "--sizes", "2"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["dataset"]["classes"] == ["0", "a", "e", "u", "v"]


def test_matrix_csv_roundtrip_reproduces_lexicons(abcd, tmp_path):
    feats, ratings = abcd
    out = tmp_path / "m.json"
    main(["--input", str(feats), "--ratings", str(ratings), "--alpha", "0.5",
          "--sizes", "2-4", "--out", str(out)])
    rep = json.loads(out.read_text())
    labels, tm = load_matrix_csv(tmp_path / "m_tm.csv")
    assert labels == rep["matrices"]["labels"]
    for n in (2, 3, 4):
        r = best_lexicon(tm, labels, n)
        assert list(r.members) == rep["lexicons"][str(n)]["exact"]["members"]
        assert r.score == pytest.approx(rep["lexicons"][str(n)]["exact"]["score"], rel=1e-10)


def test_fsw_pruning_recorded(tmp_path):
    rng = np.random.default_rng(1)
    # column 1 is pure noise shared by both classes
    ds = FeatureDataset(["p", "q"], [np.c_[rng.normal(0, 1, 20), rng.normal(0, 1, 20)],
                                     np.c_[rng.normal(8, 1, 20), rng.normal(0, 1, 20)]])
    feats = tmp_path / "f.csv"
    write_features(ds, feats)
    rep = run(RunConfig(input=str(feats), fsw_top_k=1, sizes=[2]))
    assert rep["fsw"]["kept_features"] == [0]
    assert set(rep["fsw"]["before"]) == {"0", "1"} and set(rep["fsw"]["after"]) == {"0"}


def test_config_file_merged_and_flags_win(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"preset": "fig1", "sizes": "2", "mode": "greedy", "seed": 1}))
    assert main(["--config", str(cfg), "--mode", "exact"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["config"]["mode"] == "exact" and rep["config"]["seed"] == 1
    assert list(rep["lexicons"]["2"]) == ["exact"]


def test_synthetic_spec_from_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"synthetic": {"classes": [
        {"label": "x", "mean": [0, 0], "cov": [[1, 0], [0, 1]], "count": 10},
        {"label": "y", "mean": [9, 0], "cov": [[1, 0], [0, 1]], "count": 10},
        {"label": "z", "mean": [0, 9], "cov": [[1, 0], [0, 1]], "count": 10}]}, "sizes": [2]}))
    assert main(["--config", str(cfg)]) == 0
    assert len(json.loads(capsys.readouterr().out)["lexicons"]["2"]["exact"]["members"]) == 2


# -- exit codes ---------------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["--preset", "fig1", "--alpha", "2"],
    ["--preset", "fig1", "--alpha", "0.5"],           # no ratings
    ["--preset", "fig1", "--sizes", "1"],
    ["--preset", "fig1", "--sizes", "x"],
    ["--preset", "fig1", "--sizes", "2", "--include", "a", "--exclude", "a"],
    ["--preset", "fig1", "--sizes", "9"],
    ["--sizes", "2"],                                   # no data source
])
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err.startswith("gestlex:")


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"preset": "fig1", "bogus": 1}')
    assert main(["--config", str(cfg)]) == 2
    assert main(["--config", str(tmp_path / "missing.json")]) == 2


def test_data_errors_exit_3(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("class,image,f1\na,1,1\na,2,oops\n")
    assert main(["--input", str(bad)]) == 3
    err = capsys.readouterr().err
    assert "core-data" in err and "line 3" in err
    assert main(["--input", str(tmp_path / "absent.csv")]) == 3


def test_unrated_class_is_reported(abcd, tmp_path, capsys):
    feats, _ = abcd
    partial = tmp_path / "p.csv"
    partial.write_text("class,rating\na,0.9\nb,0.2\nc,0.7\n")
    assert main(["--input", str(feats), "--ratings", str(partial), "--alpha", "1"]) == 2
    assert "'d'" in capsys.readouterr().err


def test_solver_failure_exit_4(capsys):
    assert main(["--preset", "fig1", "--strict-solver", "--max-iter", "1"]) == 4
    assert "edrm" in capsys.readouterr().err


def test_lenient_solver_scores_failed_pairs_zero(caplog):
    rep = run(RunConfig(preset="fig1", max_iter=1, sizes=[2]))
    assert rep["failed_pairs"]
    labels = rep["matrices"]["labels"]
    for a, b in rep["failed_pairs"]:
        assert rep["matrices"]["edrm"][labels.index(a)][labels.index(b)] == 0.0


def test_enumeration_cap_exit_5(monkeypatch, capsys):
    monkeypatch.setattr(cli, "ENUMERATION_CAP", 5)
    assert main(["--preset", "fig1", "--sizes", "2"]) == 5
    assert "selection" in capsys.readouterr().err
    assert main(["--preset", "fig1", "--sizes", "2", "--force-enumeration"]) == 0
