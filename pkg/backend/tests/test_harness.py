import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from repmix import harness
from repmix.cli import main
from repmix.errors import DatasetNotFoundError, InputError
from repmix.schemas import McmcConfig, RunConfig, ScenarioId, ScenarioSpec
from repmix.validator import check_outputs

TINY_MCMC = McmcConfig(iterations=40, burn_in=20, thin=2, seed=5)
TINY_FLAGS = ["--scenario", "IIb", "--n", "60", "--k", "3", "--tau", "1.0", "--iterations", "40", "--burnin", "20", "--thin", "2"]


def _tiny_run(out_dir: Path, **overrides) -> RunConfig:
    values = {
        "scenario": ScenarioSpec(id="IIb", n=60, seed=1),
        "k": 3,
        "tau": 1.0,
        "mcmc": TINY_MCMC,
        "jobs": 1,
        "out_dir": out_dir,
    }
    values.update(overrides)
    return RunConfig(**values)


def _manifest(out_dir: Path) -> dict:
    payload = json.loads((out_dir / "manifest.json").read_text(encoding="utf-8"))
    payload.pop("created_at")
    payload.pop("wall_time_s")
    return payload


def test_derive_seed_lanes():
    assert harness.derive_seed(0, 1) == harness.derive_seed(0, 1)
    assert harness.derive_seed(0, 1) != harness.derive_seed(0, 2)
    assert harness.derive_seed(0, 2, 0) != harness.derive_seed(0, 2, 1)
    assert harness.derive_seed(0, 2, 0) != harness.derive_seed(1, 2, 0)
    assert 0 <= harness.derive_seed(123, 3, 7) < 2**32


def test_fit_writes_valid_artifacts(tmp_path):
    manifest = harness.cmd_fit(_tiny_run(tmp_path))
    for name in ("draws.csv", "summary.json", "density_grid.csv", "clusters.csv", "manifest.json"):
        assert (tmp_path / name).exists(), name
    assert not (tmp_path / "calibration.json").exists()
    assert check_outputs(tmp_path)["valid"]

    draws = pd.read_csv(tmp_path / "draws.csv")
    assert len(draws) == TINY_MCMC.retained * 3
    assert set(draws["component"]) == {1, 2, 3}
    clusters = pd.read_csv(tmp_path / "clusters.csv")
    assert len(clusters) == 60
    assert clusters["cluster"].between(1, 3).all()

    assert manifest.repulsion.tau == 1.0
    assert manifest.calibration is None
    assert set(manifest.files) >= {"draws.csv", "summary.json", "clusters.csv"}
    summary = json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))
    assert summary["k0"] == 2
    assert summary["misclass"] is not None


def test_rerun_is_byte_identical(tmp_path):
    harness.cmd_fit(_tiny_run(tmp_path))
    first = {name: (tmp_path / name).read_bytes() for name in ("draws.csv", "summary.json", "clusters.csv")}
    first_manifest = _manifest(tmp_path)
    harness.cmd_fit(_tiny_run(tmp_path))
    for name, content in first.items():
        assert (tmp_path / name).read_bytes() == content, name
    assert _manifest(tmp_path) == first_manifest


def test_non_repulsive_fit(tmp_path):
    run = _tiny_run(tmp_path, mcmc=TINY_MCMC.model_copy(update={"repulsive": False}))
    outcome = harness.fit(run)
    assert outcome.spec is None and outcome.calibration is None
    assert np.all(outcome.draws.log_h == 0.0)


def test_fewer_components_than_truth(tmp_path):
    with pytest.raises(InputError):
        harness.fit(_tiny_run(tmp_path, k=1))


def test_auto_tau_records_calibration(tmp_path):
    manifest = harness.cmd_fit(_tiny_run(tmp_path, k=2, tau="auto", separation_c=1.0, calibration_mc=1000))
    calibration = json.loads((tmp_path / "calibration.json").read_text(encoding="utf-8"))
    assert calibration["separated"]
    assert calibration["tau_star"] == pytest.approx(manifest.repulsion.tau)
    assert calibration["seed"] == harness.derive_seed(TINY_MCMC.seed, 1)
    assert check_outputs(tmp_path)["valid"]


def test_generate_round_trip(tmp_path):
    path = harness.cmd_generate(ScenarioSpec(id="IV", n=50, seed=3), tmp_path)
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["y1", "y2", "label"]
    assert len(frame) == 50
    scenario = json.loads((tmp_path / "scenario.json").read_text(encoding="utf-8"))
    assert scenario["k0"] == 2
    assert check_outputs(tmp_path)["valid"]


def test_fit_from_input_file(tmp_path):
    path = harness.cmd_generate(ScenarioSpec(id="IIb", n=60, seed=1), tmp_path / "data")
    outcome = harness.fit(RunConfig(input=path, k=3, tau=1.0, k0=2, mcmc=TINY_MCMC, jobs=1, out_dir=tmp_path))
    assert outcome.truth is None
    assert outcome.summary.kl_mean is None
    assert outcome.summary.misclass is not None


def test_prior_grid(tmp_path):
    paths = harness.cmd_prior_grid(tmp_path, nodes=11)
    assert sorted(p.name for p in paths) == sorted(
        ["prior_grid_tau1_nu2.csv", "prior_grid_tau1_nu4.csv", "prior_grid_tau5_nu2.csv", "prior_grid_tau5_nu4.csv"]
    )
    frame = pd.read_csv(paths[0])
    assert len(frame) == 121
    diagonal = frame[frame["mu1"] == frame["mu2"]]
    assert len(diagonal) == 11
    assert np.all(np.isneginf(diagonal["log_prior"]))
    assert np.all(np.isfinite(frame.loc[frame["mu1"] != frame["mu2"], "log_prior"]))


def test_iris_from_scikit_learn():
    iris = harness.load_real_dataset("iris")
    assert (iris.n, iris.m) == (150, 4)
    assert set(np.unique(iris.labels)) == {0, 1, 2}


def test_missing_real_dataset(tmp_path):
    with pytest.raises(DatasetNotFoundError) as info:
        harness.load_real_dataset("galaxy", tmp_path / "galaxy.csv")
    assert info.value.exit_code == 2
    assert "hint" in info.value.details


def test_unknown_real_dataset():
    with pytest.raises(InputError):
        harness.load_real_dataset("wine")


def test_extra_weight_density_point_mass():
    frames = {
        "spread": pd.DataFrame({"extra_weight": [0.1, 0.2, 0.15, 0.3]}),
        "spike": pd.DataFrame({"extra_weight": [0.0, 0.0, 0.0]}),
    }
    density = harness._extra_weight_density(frames)
    assert list(density.columns) == ["extra_weight", "spread", "spike"]
    assert density["spike"].iloc[0] == pytest.approx(200.0)
    assert density["spike"].iloc[1:].eq(0.0).all()
    assert np.trapezoid(density["spread"], density["extra_weight"]) == pytest.approx(1.0, abs=0.05)


def test_check_reports_problems(tmp_path):
    (tmp_path / "summary.json").write_text("{not json", encoding="utf-8")
    with pytest.raises(InputError) as info:
        harness.cmd_check(tmp_path)
    assert info.value.details["errors"][0]["validator"] == "json"


def test_cli_fit_and_rerun_from_manifest(tmp_path, capsys):
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["fit", *TINY_FLAGS, "--seed", "4", "--out", str(first)]) == 0
    assert "fit finished." in capsys.readouterr().out
    assert main(["fit", "--config", str(first / "manifest.json"), "--out", str(second)]) == 0
    assert (first / "draws.csv").read_bytes() == (second / "draws.csv").read_bytes()
    assert main(["check", "--out", str(second)]) == 0


def test_cli_rejects_bad_burn_in(tmp_path, capsys):
    code = main(["fit", *TINY_FLAGS[:-4], "--burnin", "40", "--out", str(tmp_path)])
    assert code == 2
    error = json.loads(capsys.readouterr().err)
    assert error["message"] == "invalid configuration"


def test_cli_missing_config(tmp_path, capsys):
    assert main(["fit", "--config", str(tmp_path / "nope.json")]) == 2
    assert "config file not found" in capsys.readouterr().err


def test_cli_rejects_text_labels(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("y1,label\n0.5,setosa\n1.0,virginica\n", encoding="utf-8")
    code = main(["fit", "--input", str(path), "--k", "2", "--tau", "1.0", "--out", str(tmp_path / "out")])
    assert code == 2
    assert json.loads(capsys.readouterr().err)["error"] == "InputError"


def test_paired_arms_share_seeds():
    plain = harness._scenario_run(ScenarioId.IIB, 100, 1, False, "location", TINY_MCMC, seed=7)
    repulsive = harness._scenario_run(ScenarioId.IIB, 100, 1, True, "location", TINY_MCMC, seed=7)
    assert plain.scenario.seed == repulsive.scenario.seed
    assert plain.mcmc.seed == repulsive.mcmc.seed
    assert not plain.mcmc.repulsive and repulsive.mcmc.repulsive
    other = harness._scenario_run(ScenarioId.IIB, 100, 2, True, "location", TINY_MCMC, seed=7)
    assert other.mcmc.seed != repulsive.mcmc.seed


def test_cli_generate_needs_scenario(tmp_path):
    assert main(["generate", "--out", str(tmp_path)]) == 2


def test_cli_check_exit_code(tmp_path):
    (tmp_path / "manifest.json").write_text("[]", encoding="utf-8")
    assert main(["check", "--out", str(tmp_path)]) == 2


@pytest.mark.slow
def test_emptying_suite(tmp_path):
    mcmc = McmcConfig(iterations=400, burn_in=200, thin=2)
    report = harness.cmd_emptying(tmp_path, replicates=2, mcmc=mcmc, sizes=(50, 300), calibration_mc=1000)
    assert report["replicates"] == 2
    assert 0.0 <= report["fraction_smaller"] <= 1.0
    assert (tmp_path / "emptying.csv").exists()
    assert check_outputs(tmp_path)["valid"]


@pytest.mark.slow
def test_table2_pairs_share_data(tmp_path):
    mcmc = McmcConfig(iterations=300, burn_in=100, thin=2)
    table = harness.cmd_table2(tmp_path, replicates=2, mcmc=mcmc, scenarios=[ScenarioId.IIB], sizes=(100,), calibration_mc=1000)
    assert list(table["prior"]) == ["N-R", "R"]
    assert table["kl_mean"].ge(0).all()
    plain = json.loads((tmp_path / "replicates/IIb_n100_N-R_r01/summary.json").read_text(encoding="utf-8"))
    repulsive = json.loads((tmp_path / "replicates/IIb_n100_R_r01/summary.json").read_text(encoding="utf-8"))
    assert plain["k"] == repulsive["k"] == 6
    assert plain["draws"] == repulsive["draws"] == mcmc.retained
