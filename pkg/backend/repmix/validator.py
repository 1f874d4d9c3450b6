"""Validation of emitted artifacts against JSON Schemas derived from the report models."""

from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List

import pandas as pd
from jsonschema import Draft202012Validator

from .errors import InputError
from .schemas import CalibrationResult, Manifest, ScenarioMetadata, SummaryReport

SCHEMAS = {
    "manifest": Manifest,
    "summary": SummaryReport,
    "calibration": CalibrationResult,
    "scenario": ScenarioMetadata,
}

# JSON artifacts recognized by file name inside an output directory.
ARTIFACT_KINDS = {
    "manifest.json": "manifest",
    "summary.json": "summary",
    "calibration.json": "calibration",
    "scenario.json": "scenario",
}

# Leading columns every CSV artifact of a given name must carry.
CSV_HEADERS = {
    "draws.csv": ["chain", "iter", "component", "h", "log_h", "weight"],
    "density_grid.csv": ["density", "lower", "upper"],
    "data.csv": ["y1"],
    "similarity.csv": [],
    "clusters.csv": ["index", "cluster"],
}


@lru_cache(maxsize=None)
def load_schema(kind: str) -> Dict[str, Any]:
    model = SCHEMAS.get(kind)
    if model is None:
        raise InputError(f"unknown artifact kind '{kind}'", details={"choices": sorted(SCHEMAS)})
    return model.model_json_schema(mode="serialization")


def validate_artifact(kind: str, payload: Dict[str, Any]) -> Dict[str, Any]:
    """Validate one JSON payload and return ``{"valid", "errors"}``; never raises."""

    try:
        schema = load_schema(kind)
    except InputError as exc:
        return {"valid": False, "errors": [{"path": "", "message": exc.message, "validator": "kind"}]}

    validator = Draft202012Validator(schema)
    errors: List[Dict[str, Any]] = []
    for error in validator.iter_errors(payload):
        errors.append(
            {
                "path": ".".join(str(segment) for segment in error.absolute_path),
                "message": error.message,
                "validator": error.validator,
            }
        )
    return {"valid": not errors, "errors": errors}


def _check_csv(path: Path) -> List[Dict[str, Any]]:
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        return [{"path": path.name, "message": f"unparseable CSV: {exc}", "validator": "csv"}]
    expected = next((cols for suffix, cols in CSV_HEADERS.items() if path.name.endswith(suffix)), [])
    missing = [col for col in expected if col not in frame.columns]
    if missing:
        return [{"path": path.name, "message": f"missing columns {missing}", "validator": "header"}]
    return []


def check_outputs(out_dir: Path | str) -> Dict[str, Any]:
    """Parse every JSON and CSV artifact under ``out_dir`` (recursively)."""

    root = Path(out_dir)
    if not root.is_dir():
        return {"valid": False, "errors": [{"path": str(root), "message": "not a directory", "validator": "path"}], "files": 0}

    errors: List[Dict[str, Any]] = []
    files = 0
    for path in sorted(root.rglob("*")):
        if not path.is_file():
            continue
        relative = str(path.relative_to(root))
        if path.suffix == ".json":
            files += 1
            try:
                payload = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                errors.append({"path": relative, "message": f"invalid JSON: {exc}", "validator": "json"})
                continue
            kind = ARTIFACT_KINDS.get(path.name)
            if kind is None:
                continue
            for error in validate_artifact(kind, payload)["errors"]:
                errors.append({**error, "path": f"{relative}:{error['path']}"})
        elif path.suffix == ".csv":
            files += 1
            for error in _check_csv(path):
                errors.append({**error, "path": relative})
    return {"valid": not errors, "errors": errors, "files": files}


__all__ = [
    "load_schema",
    "validate_artifact",
    "check_outputs",
]
