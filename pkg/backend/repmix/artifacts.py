"""Serialized, byte-reproducible writing of run artifacts."""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable

import pandas as pd
from pydantic import BaseModel

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
TRACKED_PACKAGES = ("numpy", "scipy", "pandas", "pydantic", "scikit-learn", "repulsive-mixtures")


def _jsonable(payload: BaseModel | Dict[str, Any] | list) -> Any:
    if isinstance(payload, BaseModel):
        return payload.model_dump(mode="json")
    return payload


def canonical_json(payload: BaseModel | Dict[str, Any] | list) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=True, allow_nan=True) + "\n"


def config_hash(payload: BaseModel | Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form."""

    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def package_versions(names: Iterable[str] = TRACKED_PACKAGES) -> Dict[str, str]:
    versions: Dict[str, str] = {}
    for name in names:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


class ArtifactWriter:
    """The one writer of an output directory; every file goes through its lock."""

    def __init__(self, out_dir: Path | str):
        self.out_dir = Path(out_dir)
        self.files: Dict[str, str] = {}
        self._lock = threading.Lock()

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def _record(self, name: str, text: str) -> Path:
        target = self.path(name)
        with self._lock:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text, encoding="utf-8", newline="\n")
            self.files[name] = hashlib.sha256(text.encode("utf-8")).hexdigest()
        logger.debug("wrote %s", target)
        return target

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return self._record(name, text)

    def write_json(self, name: str, payload: BaseModel | Dict[str, Any] | list) -> Path:
        return self._record(name, canonical_json(payload))


__all__ = [
    "ArtifactWriter",
    "canonical_json",
    "config_hash",
    "package_versions",
]
