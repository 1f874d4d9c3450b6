import json

import pandas as pd

from repmix.artifacts import ArtifactWriter, canonical_json, config_hash, package_versions
from repmix.schemas import McmcConfig


def test_canonical_json_sorts_keys():
    text = canonical_json({"b": 1, "a": [1.5, 2]})
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")
    assert json.loads(text) == {"a": [1.5, 2], "b": 1}


def test_config_hash_tracks_content():
    first = McmcConfig(iterations=100, burn_in=10, thin=1, seed=3)
    assert config_hash(first) == config_hash(McmcConfig(iterations=100, burn_in=10, thin=1, seed=3))
    assert config_hash(first) != config_hash(first.model_copy(update={"seed": 4}))
    assert len(config_hash(first)) == 64


def test_writer_records_digests(tmp_path):
    writer = ArtifactWriter(tmp_path / "out")
    frame = pd.DataFrame({"x": [0.1, 1 / 3], "y": [1, 2]})
    csv_path = writer.write_csv("nested/table.csv", frame)
    json_path = writer.write_json("meta.json", {"k": 2})
    assert csv_path.read_text(encoding="utf-8").splitlines()[1] == "0.10000000000000001,1"
    assert json.loads(json_path.read_text(encoding="utf-8")) == {"k": 2}
    assert set(writer.files) == {"nested/table.csv", "meta.json"}


def test_floats_round_trip_exactly(tmp_path):
    writer = ArtifactWriter(tmp_path)
    values = [1 / 3, 2.0**-40, 1e300]
    path = writer.write_csv("values.csv", pd.DataFrame({"v": values}))
    assert pd.read_csv(path, float_precision="round_trip")["v"].tolist() == values


def test_rewrite_is_byte_identical(tmp_path):
    frame = pd.DataFrame({"v": [0.25, 0.5]})
    first = ArtifactWriter(tmp_path / "a")
    second = ArtifactWriter(tmp_path / "b")
    first.write_csv("v.csv", frame)
    second.write_csv("v.csv", frame)
    assert first.files == second.files


def test_package_versions_unknown():
    versions = package_versions(["numpy", "definitely-not-installed-xyz"])
    assert versions["definitely-not-installed-xyz"] == "unknown"
    assert versions["numpy"] != "unknown"
