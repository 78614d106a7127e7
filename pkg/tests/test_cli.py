import csv

import numpy as np
import pytest

from hamball import cli
from hamball.cli import main
from hamball.engine import SamplerStepError
from hamball.errors import NumericalDegeneracyError
from hamball.models import read_dataset


def rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def summary(path):
    return {r["key"]: r["value"] for r in rows(path)}


@pytest.fixture
def regression_data(tmp_path):
    out = tmp_path / "reg"
    assert main(["simulate", "regression", "--n", "30", "--d", "20", "--seed", "4",
                 "--out", str(out)]) == 0
    return out


def test_simulate_fhmm_dimensions(tmp_path):
    out = tmp_path / "fhmm"
    assert main(["simulate", "fhmm", "--n", "1000", "--k", "10", "--sigma2", "0.01",
                 "--seed", "7", "--out", str(out)]) == 0
    assert len(rows(out / "data.csv")) == 1000
    ds = read_dataset(out)
    assert ds.truth["x"].shape == (10, 1000)


def test_simulate_regression_confounders(tmp_path):
    out = tmp_path / "reg"
    assert main(["simulate", "regression", "--n", "100", "--d", "1200", "--seed", "1",
                 "--out", str(out)]) == 0
    Z = read_dataset(out).data["Z"]
    np.testing.assert_array_equal(Z[:, 10], Z[:, 610])


def test_simulate_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["simulate", "tumor", "--seed", "3", "--replicates", "2",
                     "--out", str(tmp_path / name)]) == 0
    for f in ("meta.csv", "data.csv", "truth.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_run_reports_evaluations_per_sweep(regression_data, tmp_path):
    out = tmp_path / "run"
    assert main(["run", "--data", str(regression_data), "--scheme", "hb-block", "--m", "1",
                 "--K", "10", "--iters", "50", "--seed", "1", "--out", str(out)]) == 0
    s = summary(out / "summary.csv")
    assert s["candidate_evaluations_per_sweep"] == str(11 * 2)
    assert int(s["total_candidate_evaluations"]) == 11 * 2 * 50
    assert s["move_bound_violations"] == "0"
    header = (out / "trace.csv").read_text().splitlines()[0]
    assert header == "iter,log_joint,elapsed_ms,state"


def _trace_without_timing(out):
    return [{k: v for k, v in r.items() if k != "elapsed_ms"} for r in rows(out / "trace.csv")]


def test_block_gibbs_flag_equals_full_radius_sweep(regression_data, tmp_path):
    common = ["run", "--data", str(regression_data), "--K", "2", "--iters", "80", "--seed", "9"]
    assert main(common + ["--scheme", "block-gibbs", "--out", str(tmp_path / "bg")]) == 0
    assert main(common + ["--scheme", "hb-block", "--m", "2", "--out", str(tmp_path / "hb")]) == 0
    assert _trace_without_timing(tmp_path / "bg") == _trace_without_timing(tmp_path / "hb")


def test_rerun_gives_identical_trace(tmp_path):
    data = tmp_path / "tumor"
    main(["simulate", "tumor", "--seed", "2", "--out", str(data)])
    cfg = tmp_path / "run.txt"
    cfg.write_text(f"model.name = tumor\nmodel.n_clones = 3\nio.data = {data}\n"
                   "sampler.iterations = 60\nsampler.seed = 5\nio.timing = false\n")
    for name in ("a", "b"):
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a" / "trace.csv").read_bytes() == (tmp_path / "b" / "trace.csv").read_bytes()
    saved = (tmp_path / "a" / "config.txt").read_text()
    assert "sampler.seed = 5" in saved


def test_oracle_flat_model(tmp_path, capsys):
    cfg = tmp_path / "flat.txt"
    cfg.write_text("model.name = flat\nmodel.shape = 3\n")
    assert main(["oracle", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert "marginals 0.5 0.5 0.5" in capsys.readouterr().out
    table = rows(tmp_path / "exact_table.csv")
    assert len(table) == 8
    assert len({r["log_density"] for r in table}) == 1


def test_oracle_refuses_large_model(tmp_path, capsys):
    cfg = tmp_path / "flat.txt"
    cfg.write_text("model.name = flat\nmodel.shape = 30\noracle.bound = 4096\n")
    assert main(["oracle", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "exceeds the bound" in capsys.readouterr().err


def test_oracle_compares_a_trace(tmp_path):
    data = tmp_path / "reg"
    main(["simulate", "regression", "--n", "30", "--d", "6", "--seed", "2", "--out", str(data)])
    out = tmp_path / "run"
    assert main(["run", "--data", str(data), "--scheme", "hb-block", "--m", "1", "--K", "3",
                 "--iters", "20000", "--seed", "3", "--out", str(out)]) == 0
    cfg = tmp_path / "oracle.txt"
    cfg.write_text(f"io.data = {data}\noracle.trace = {out / 'trace.csv'}\n")
    assert main(["oracle", "--config", str(cfg), "--out", str(tmp_path / "oracle")]) == 0
    report = summary(tmp_path / "oracle" / "oracle_report.csv")
    assert int(report["records"]) == 18000
    assert float(report["max_abs_deviation"]) < 0.02


def test_grid_writes_csv(regression_data, tmp_path, capsys):
    cfg = tmp_path / "grid.txt"
    cfg.write_text(f"io.data = {regression_data}\ngrid.budget = 3000\ngrid.min_iterations = 20\n"
                   "grid.block_sizes = 1,2\n")
    assert main(["grid", "--config", str(cfg), "--out", str(tmp_path / "g")]) == 0
    grid = rows(tmp_path / "g" / "grid.csv")
    assert [(r["m"], r["K"], r["complexity"]) for r in grid] == \
        [("1", "1", "40"), ("1", "2", "30"), ("2", "2", "40")]
    assert "best cell" in capsys.readouterr().out


def test_diag_on_trace(regression_data, tmp_path):
    out = tmp_path / "run"
    main(["run", "--data", str(regression_data), "--iters", "300", "--K", "5",
          "--scheme", "hb-block", "--out", str(out)])
    assert main(["diag", str(out / "trace.csv"), "--out", str(tmp_path / "d")]) == 0
    d = summary(tmp_path / "d" / "diagnostics.csv")
    assert d["records"] == "270"
    assert float(d["ess_log_joint"]) <= 270


@pytest.mark.parametrize("argv", [
    ["run", "--scheme", "gibbs"],
    ["run", "--m", "-2"],
    ["run", "--K", "0", "--scheme", "hb-block"],
    ["diag", "/nonexistent/trace.csv"],
])
def test_config_errors_exit_2(argv, tmp_path, regression_data):
    if argv[0] == "run":
        argv = argv + ["--data", str(regression_data), "--out", str(tmp_path)]
    assert main(argv) == 2


def test_run_without_model_exit_2(tmp_path):
    assert main(["run", "--out", str(tmp_path)]) == 2


def test_unknown_config_key_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.txt"
    cfg.write_text("sampler.colour = red\n")
    assert main(["run", "--config", str(cfg)]) == 2
    assert "sampler.colour" in capsys.readouterr().err


def test_invalid_model_option_exit_2(tmp_path):
    out = tmp_path / "tumor"
    main(["simulate", "tumor", "--seed", "1", "--out", str(out)])
    cfg = tmp_path / "run.txt"
    cfg.write_text(f"model.name = tumor\nmodel.error_rate = 0\nio.data = {out}\n"
                   "sampler.iterations = 5\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 2


def test_numerical_failure_exit_3(regression_data, tmp_path, monkeypatch, capsys):
    def failing(*args, **kwargs):
        raise SamplerStepError(4, NumericalDegeneracyError(0))

    monkeypatch.setattr(cli, "run_chain", failing)
    assert main(["run", "--data", str(regression_data), "--out", str(tmp_path)]) == 3
    assert "iteration 4" in capsys.readouterr().err
