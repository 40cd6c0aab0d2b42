import json

import numpy as np
import pytest
from pipeline import TRAIN_END, full_pipeline, output_digests, run_cli

from consensus_kinetics.cli import main
from consensus_kinetics.timeseries import load_csv, synth_gbm, write_csv


def test_synth_gbm_repeatable(tmp_path):
    for d in ("a", "b"):
        assert main(["synth", "gbm", "--n", "10", "--seed", "1", "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a/index.csv").read_bytes() == (tmp_path / "b/index.csv").read_bytes()
    manifest = json.loads((tmp_path / "a/manifest_synth_gbm.json").read_text())
    assert manifest["argv"][:2] == ["synth", "gbm"]
    assert set(manifest["outputs"]) == {"index.csv"}


def test_missing_required_flag_is_usage_error(tmp_path, capsys):
    assert main(["synth", "gbm", "--out", str(tmp_path)]) == 1
    assert main(["synth", "pair", "--out", str(tmp_path)]) == 1


def test_synth_pair_exact_relation(tmp_path):
    assert main(["synth", "pair", "--slope", "1", "--sigma-u", "0", "--n", "50", "--out", str(tmp_path)]) == 0
    y, z = load_csv(tmp_path / "pair_y.csv"), load_csv(tmp_path / "pair_z.csv")
    assert np.array_equal(y.values, z.values)


def test_halflife_command(capsys):
    assert main(["econ", "halflife", "--gamma", "-0.0047212"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["half_life"] == pytest.approx(146.47, abs=0.01)
    assert doc["half_life_ceiling"] == 147
    assert main(["econ", "halflife", "--gamma", "0.5"]) == 1


def test_adf_constant_input_exits_two(tmp_path, capsys):
    ts = synth_gbm(100.0, 0.0, 0.1, 40, seed=1)
    write_csv(ts.with_values(np.full(40, 5.0)), tmp_path / "c.csv")
    assert main(["econ", "adf", "--input", str(tmp_path / "c.csv"), "--spec", "none"]) == 2
    assert "ConstantSeries" in capsys.readouterr().err


def test_econ_commands_on_synthetic_pair(tmp_path, capsys):
    main(["synth", "pair", "--slope", "1", "--intercept", "0.2", "--sigma-u", "0.05", "--sigma-z", "0.02",
          "--n", "1000", "--seed", "2", "--out", str(tmp_path)])
    capsys.readouterr()
    y, z = str(tmp_path / "pair_y.csv"), str(tmp_path / "pair_z.csv")
    assert main(["econ", "eg", "--consensus", y, "--index", z]) == 0
    assert json.loads(capsys.readouterr().out)["cointegrated"] is True
    for kind in ("johansen", "vecm", "diagnose", "lags"):
        assert main(["econ", kind, "--consensus", y, "--index", z, "--out", str(tmp_path)]) == 0
        json.loads(capsys.readouterr().out)
    assert main(["econ", "adf", "--input", y, "--table"]) == 0
    assert "statistic" in capsys.readouterr().out


def test_eg_exact_pair_exits_two(tmp_path):
    main(["synth", "pair", "--slope", "1", "--sigma-u", "0", "--n", "60", "--out", str(tmp_path)])
    assert main(["econ", "eg", "--consensus", str(tmp_path / "pair_y.csv"), "--index", str(tmp_path / "pair_z.csv")]) == 2


def test_forecast_without_parameters_is_usage_error(tmp_path):
    main(["synth", "gbm", "--n", "20", "--out", str(tmp_path)])
    assert main(["forecast", "--index", str(tmp_path / "index.csv"), "--out", str(tmp_path)]) == 1


def test_end_to_end_noiseless(tmp_path):
    full_pipeline(tmp_path)
    cal = json.loads((tmp_path / "calibration.json").read_text())
    assert cal["params"]["k"] == pytest.approx(0.28 * 6.05, rel=1e-3)
    assert "ridge_note" in cal
    rep = json.loads((tmp_path / "report/report.json").read_text())
    assert rep["model_errors"]["max_abs"] < 1e-4
    forecast = load_csv(tmp_path / "forecast.csv")
    assert str(forecast.dates[0]) > TRAIN_END
    assert rep["model_errors"]["n"] == len(forecast)


def test_simulate_particle_repeatable(tmp_path):
    args = ["simulate", "--engine", "particle", "--seed", "7", "--n-particles", "2000", "--horizon", "0.2",
            "--q", "0.28", "--beta", "6.05", "--delta", "0.143"]
    for d in ("a", "b"):
        assert main(args + ["--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a/moments.csv").read_bytes() == (tmp_path / "b/moments.csv").read_bytes()
    meta = json.loads((tmp_path / "a/final_ensemble.csv.json").read_text())
    assert meta["seed"] == 7


@pytest.mark.parametrize("engine", ["closed-form", "neumann"])
def test_simulate_other_engines(tmp_path, engine):
    args = ["simulate", "--engine", engine, "--horizon", "0.5", "--q", "0.28", "--beta", "6.05", "--delta", "0.143",
            "--grid-points", "1024", "--out", str(tmp_path)]
    assert main(args) == 0
    rows = (tmp_path / "moments.csv").read_text().splitlines()
    assert len(rows) > 2


def test_replay_reproduces_outputs(tmp_path):
    out = tmp_path / "run"
    assert main(["synth", "gbm", "--n", "30", "--seed", "4", "--out", str(out)]) == 0
    first = (out / "index.csv").read_bytes()
    (out / "index.csv").unlink()
    assert main(["replay", str(out / "manifest_synth_gbm.json")]) == 0
    assert (out / "index.csv").read_bytes() == first


def test_module_entry_point(tmp_path):
    proc = run_cli(["econ", "halflife", "--gamma", "-0.5"])
    assert json.loads(proc.stdout)["half_life"] == 1.0
    assert run_cli(["synth", "gbm"], check=False).returncode == 1
