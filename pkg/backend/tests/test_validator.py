import json

import pytest

from repmix.schemas import ComponentSummary, ScenarioSpec, SummaryReport
from repmix.synthdata import describe
from repmix.validator import check_outputs, load_schema, validate_artifact


@pytest.fixture
def summary() -> SummaryReport:
    component = ComponentSummary(
        label=1,
        weight_mean=1.0,
        weight_sd=0.0,
        mean_mean=[0.0],
        mean_sd=[0.0],
        sigma_mean=[1.0],
        sigma_sd=[0.0],
    )
    return SummaryReport(draws=10, k=1, m=1, components=[component])


def test_valid_summary(summary):
    result = validate_artifact("summary", summary.model_dump(mode="json"))
    assert result == {"valid": True, "errors": []}


def test_summary_missing_field(summary):
    payload = summary.model_dump(mode="json")
    del payload["components"]
    result = validate_artifact("summary", payload)
    assert not result["valid"]
    assert any("components" in error["message"] for error in result["errors"])


def test_summary_bad_range(summary):
    payload = summary.model_dump(mode="json")
    payload["misclass"] = 1.5
    result = validate_artifact("summary", payload)
    assert not result["valid"]
    assert result["errors"][0]["path"] == "misclass"


def test_unknown_kind_is_reported():
    result = validate_artifact("nonsense", {})
    assert not result["valid"]
    assert result["errors"][0]["validator"] == "kind"


def test_schema_is_cached():
    assert load_schema("scenario") is load_schema("scenario")


def test_check_outputs_walks_tree(tmp_path, summary):
    run = tmp_path / "run-1"
    run.mkdir()
    (run / "summary.json").write_text(summary.model_dump_json(), encoding="utf-8")
    scenario = describe(ScenarioSpec(id="Ia", n=10, seed=0))
    (run / "scenario.json").write_text(scenario.model_dump_json(), encoding="utf-8")
    (run / "draws.csv").write_text("chain,iter,component,h,log_h,weight,mean_1,var_1\n0,1,1,1,0,1,0.1,1.2\n", encoding="utf-8")
    (run / "notes.txt").write_text("ignored", encoding="utf-8")
    report = check_outputs(tmp_path)
    assert report == {"valid": True, "errors": [], "files": 3}


def test_check_outputs_reports_bad_files(tmp_path, summary):
    payload = summary.model_dump(mode="json")
    payload["draws"] = 0
    (tmp_path / "summary.json").write_text(json.dumps(payload), encoding="utf-8")
    (tmp_path / "broken.json").write_text("{not json", encoding="utf-8")
    (tmp_path / "draws.csv").write_text("iter,weight\n1,1.0\n", encoding="utf-8")
    report = check_outputs(tmp_path)
    assert not report["valid"]
    validators = sorted(error["validator"] for error in report["errors"])
    assert validators == ["header", "json", "minimum"]
    assert any(error["path"].startswith("summary.json:") for error in report["errors"])


def test_check_outputs_missing_directory(tmp_path):
    report = check_outputs(tmp_path / "absent")
    assert not report["valid"] and report["files"] == 0
