"""
End-to-end tests of the command-line interface and its exit codes
"""

import os

import pytest

from oob_forest.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main, parse_config
from oob_forest.models import CiResult
from oob_forest.tasks.task_ci import cmd_ci


@pytest.fixture
def friedman_csv(tmp_path):
    path = tmp_path / "friedman.csv"
    assert main(["datagen", "--process", "friedman", "--n", "150", "--seed", "7", "--out", str(path)]) == EXIT_OK
    return str(path)


@pytest.fixture
def spheres_csv(tmp_path):
    path = tmp_path / "spheres.csv"
    assert main(["datagen", "--process", "spheres", "--n", "200", "--seed", "3", "--out", str(path)]) == EXIT_OK
    return str(path)


def test_datagen_is_reproducible(tmp_path, friedman_csv):
    again = tmp_path / "again.csv"
    main(["datagen", "--process", "friedman", "--n", "150", "--seed", "7", "--out", str(again)])
    assert open(friedman_csv).read() == again.read_text()


def test_train_prints_estimate_and_saves_model(tmp_path, friedman_csv, capsys):
    model = tmp_path / "model.json"
    code = main([
        "train", "--data", friedman_csv, "--target", "y", "--task", "regression",
        "--trees", "20", "--seed", "1", "--model-out", str(model),
    ])
    assert code == EXIT_OK
    assert model.exists()
    assert (tmp_path / "model.json.schema.txt").exists()
    line = [l for l in capsys.readouterr().out.splitlines() if l.startswith("OOB estimate")][0]
    assert float(line.rsplit("=", 1)[1]) > 0


def test_train_missing_file():
    code = main(["train", "--data", "/nonexistent/data.csv", "--target", "y", "--task", "regression"])
    assert code == EXIT_DATA


def test_zero_trees_fails_before_reading():
    # the data file does not exist; validation must stop first
    code = main(["train", "--data", "/nonexistent/data.csv", "--target", "y", "--task", "regression", "--trees", "0"])
    assert code == EXIT_USAGE


def test_unknown_flag():
    assert main(["train", "--bogus"]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE


def test_help_exits_cleanly(capsys):
    assert main(["ci", "--help"]) == EXIT_OK
    assert "--levels" in capsys.readouterr().out


def test_ci_single_bootstrap_replicate_rejected(friedman_csv):
    code = main(["ci", "--data", friedman_csv, "--target", "y", "--task", "regression", "--boot", "1"])
    assert code == EXIT_USAGE


def test_ci_levels_nested_from_saved_model(tmp_path, spheres_csv, capsys):
    model = tmp_path / "spheres.json.gz"
    main(["train", "--data", spheres_csv, "--target", "y", "--task", "classification",
          "--trees", "25", "--model-out", str(model)])
    records = tmp_path / "ci.txt"
    code = main(["ci", "--model", str(model), "--levels", "0.90,0.95,0.99", "--boot", "300",
                 "--seed", "11", "--out", str(records), "--csv", str(tmp_path / "ci.csv")])
    assert code == EXIT_OK
    assert "confidence level" in capsys.readouterr().out
    cis = [CiResult.from_record(line) for line in records.read_text().splitlines()]
    assert [c.level for c in cis] == [0.90, 0.95, 0.99]
    for inner, outer in zip(cis, cis[1:]):
        assert outer.lower <= inner.lower <= inner.upper <= outer.upper
    assert all(c.seed == 11 and c.M == 300 for c in cis)


def test_ci_is_reproducible(tmp_path, friedman_csv):
    outputs = []
    for k in range(2):
        out = tmp_path / f"ci{k}.txt"
        main(["ci", "--data", friedman_csv, "--target", "y", "--task", "regression", "--trees", "15",
              "--boot", "100", "--seed", "4", "--rmse", "--out", str(out)])
        outputs.append(out.read_text())
    assert outputs[0] == outputs[1]


def test_rmse_needs_regression(spheres_csv):
    code = main(["ci", "--data", spheres_csv, "--target", "y", "--task", "classification",
                 "--trees", "10", "--boot", "50", "--rmse"])
    assert code == EXIT_USAGE


def test_simulate_single_level(tmp_path):
    code = main([
        "simulate", "--process", "spheres", "--n", "60", "--n-test", "300", "--trees", "10",
        "--boot", "30", "--replications", "3", "--levels", "0.9", "--out-dir", str(tmp_path),
    ])
    assert code == EXIT_OK
    lines = (tmp_path / "coverage_spheres.csv").read_text().splitlines()
    assert lines[0].startswith("# process=spheres")
    assert lines[1] == "process,n,level,coverage,avg_width"
    assert len(lines) == 3
    assert (tmp_path / "coverage_spheres.txt").exists()


def test_simulate_zero_replications():
    assert main(["simulate", "--process", "friedman", "--replications", "0"]) == EXIT_USAGE


def test_simulate_defaults():
    config = parse_config(["simulate", "--process", "friedman"])
    assert config.sizes == [200, 500]
    assert len(config.levels) == 19
    assert (config.n_trees, config.n_boot, config.n_replications, config.n_test) == (300, 500, 200, 20_000)


@pytest.mark.skipif(not os.getenv("OOBF_TELCO_CSV"), reason="OOBF_TELCO_CSV not set")
def test_telco_interval_is_tight():
    config = parse_config([
        "ci", "--data", os.environ["OOBF_TELCO_CSV"], "--target", os.getenv("OOBF_TELCO_TARGET", "Churn"),
        "--task", "classification", "--trees", "1000", "--boot", "1000", "--levels", "0.95",
    ])
    ci = cmd_ci(config)[0]
    assert 0.02 <= ci.lower <= ci.upper <= 0.07
    assert ci.width < 0.025


@pytest.mark.skipif(not os.getenv("OOBF_AMES_CSV"), reason="OOBF_AMES_CSV not set")
def test_ames_interval_in_dollars():
    config = parse_config([
        "ci", "--data", os.environ["OOBF_AMES_CSV"], "--target", os.getenv("OOBF_AMES_TARGET", "SalePrice"),
        "--task", "regression", "--trees", "1000", "--boot", "1000", "--rmse", "--levels", "0.95",
    ])
    ci = cmd_ci(config)[0]
    assert ci.width / ci.point_estimate < 0.40


def test_simulate_pdf_is_reproducible(tmp_path):
    outputs = []
    for run in ("a", "b"):
        out_dir = tmp_path / run
        code = main([
            "simulate", "--process", "friedman", "--n", "40,60", "--n-test", "200", "--trees", "8",
            "--boot", "20", "--replications", "2", "--levels", "0.5,0.9", "--out-dir", str(out_dir), "--pdf",
        ])
        assert code == EXIT_OK
        outputs.append({name: (out_dir / name).read_bytes() for name in
                        ("coverage_friedman.csv", "coverage_friedman.txt", "coverage_friedman.pdf")})
    assert outputs[0] == outputs[1]


def test_datagen_single_row_rejected(tmp_path):
    out = tmp_path / "one.csv"
    assert main(["datagen", "--process", "friedman", "--n", "1", "--out", str(out)]) == EXIT_USAGE
    assert not out.exists()
    assert main(["simulate", "--process", "spheres", "--n", "1,200"]) == EXIT_USAGE
