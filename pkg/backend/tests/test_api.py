import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from repmix import main as api
from repmix import settings
from repmix.errors import CalibrationError, DatasetNotFoundError, SamplerError
from repmix.store import run_store

STANDARD_PRIOR = {"m0": [0.0], "v0": [1.0], "a0": 2.0, "b0": [1.0]}
LOCATION = {"case": "location", "tau": 1.0, "nu": 1}


@pytest.fixture
def client(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "OUT_DIR", tmp_path)
    run_store.clear()
    with TestClient(api.app) as test_client:
        yield test_client
    run_store.clear()


def _fit_payload(**overrides):
    rng = np.random.default_rng(3)
    values = np.concatenate([rng.normal(-5.0, 1.0, 30), rng.normal(5.0, 1.0, 30)])[:, None]
    payload = {"values": values.tolist(), "k": 2, "tau": 1.0, "iterations": 40, "burn_in": 20, "thin": 2, "seed": 1}
    payload.update(overrides)
    return payload


def test_root_and_health(client):
    assert client.get("/health").json() == {"ok": True}
    body = client.get("/").json()
    assert body["status"] == "running"
    assert "fit" in body["endpoints"]


def test_density(client):
    response = client.post(
        "/density",
        json={"weights": [1.0], "means": [[0.0]], "variances": [[1.0]], "points": [[0.0], [1.0]]},
    )
    assert response.status_code == 200
    values = response.json()["density"]
    assert values[0] == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert values[1] == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi))


def test_density_normalizes_weights(client):
    response = client.post(
        "/density",
        json={"weights": [2.0, 2.0], "means": [[0.0], [0.0]], "variances": [[1.0], [1.0]], "points": [[0.0]]},
    )
    assert response.json()["density"][0] == pytest.approx(1 / math.sqrt(2 * math.pi))


def test_density_rejects_bad_points(client):
    response = client.post(
        "/density",
        json={"weights": [1.0], "means": [[0.0]], "variances": [[1.0]], "points": [[0.0, 1.0]]},
    )
    assert response.status_code == 400
    assert response.json()["detail"]["error"] == "InputError"


def test_repulsion(client):
    response = client.post(
        "/repulsion",
        json={"spec": LOCATION, "means": [[0.0], [2.0]], "variances": [[1.0], [1.0]], "prior": STANDARD_PRIOR},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["distances"] == [[0.0, 2.0], [2.0, 0.0]]
    assert body["log_h"] == pytest.approx(-0.5)
    assert body["h"] == pytest.approx(math.exp(-0.5))
    assert body["log_prior"] is not None


def test_repulsion_of_coincident_components(client):
    response = client.post("/repulsion", json={"spec": LOCATION, "means": [[1.0], [1.0]], "variances": [[1.0], [1.0]]})
    body = response.json()
    assert body["log_h"] is None
    assert body["h"] == 0.0


def test_repulsion_prior_dimension_mismatch(client):
    response = client.post(
        "/repulsion",
        json={"spec": LOCATION, "means": [[0.0, 0.0], [2.0, 2.0]], "variances": [[1.0, 1.0], [1.0, 1.0]], "prior": STANDARD_PRIOR},
    )
    assert response.status_code == 400


def test_calibrate(client):
    response = client.post("/calibrate", json={"prior": STANDARD_PRIOR, "k": 2, "c": 0.0, "n_mc": 1000, "seed": 4})
    assert response.status_code == 200
    body = response.json()
    assert body["tau_star"] > 0
    assert body["path"][-1]["tau"] == pytest.approx(body["tau_star"])


def test_calibrate_validation(client):
    assert client.post("/calibrate", json={"prior": STANDARD_PRIOR, "k": 1}).status_code == 422
    assert client.post("/calibrate", json={"prior": STANDARD_PRIOR, "n_mc": 10}).status_code == 422


def test_calibration_failure_maps_to_422(client, monkeypatch):
    def fail(*args, **kwargs):
        raise CalibrationError("no tau below tau_max reaches the separation")

    monkeypatch.setattr(api, "calibrate_tau", fail)
    response = client.post("/calibrate", json={"prior": STANDARD_PRIOR, "k": 2})
    assert response.status_code == 422
    assert response.json()["detail"]["exit_code"] == 4


def test_fit_and_runs(client, tmp_path):
    response = client.post("/fit", json=_fit_payload())
    assert response.status_code == 200
    body = response.json()
    run_id = body["run_id"]
    assert body["summary"]["k"] == 2
    assert body["calibration"] is None
    assert (tmp_path / "api" / run_id / "manifest.json").exists()

    listing = client.get("/runs").json()
    assert [(row["id"], row["n"], row["k"]) for row in listing] == [(run_id, 60, 2)]
    record = client.get(f"/runs/{run_id}").json()
    assert record["request"]["k"] == 2
    assert record["response"]["run_id"] == run_id

    assert client.delete(f"/runs/{run_id}").json() == {"message": "Run deleted successfully"}
    assert client.get(f"/runs/{run_id}").status_code == 404
    assert client.delete(f"/runs/{run_id}").status_code == 404


def test_fit_rejects_burn_in(client):
    response = client.post("/fit", json=_fit_payload(burn_in=40))
    assert response.status_code == 400
    assert client.get("/runs").json() == []


def test_fit_rejects_excess_k0(client):
    assert client.post("/fit", json=_fit_payload(k0=3)).status_code == 400


def test_sampler_failure_maps_to_500(client, monkeypatch):
    def fail(run):
        raise SamplerError("slice region numerically empty")

    monkeypatch.setattr(api.harness, "fit", fail)
    response = client.post("/fit", json=_fit_payload())
    assert response.status_code == 500
    assert response.json()["detail"]["error"] == "SamplerError"


def test_missing_dataset_maps_to_404(client, monkeypatch):
    def fail(run):
        raise DatasetNotFoundError("No dataset found")

    monkeypatch.setattr(api.harness, "fit", fail)
    assert client.post("/fit", json=_fit_payload()).status_code == 404


def test_invalid_run_id(client):
    assert client.get("/runs/bad.id").status_code == 400
    assert client.get("/runs/unknownrun").status_code == 404


def test_validate(client):
    response = client.post("/validate", json={"kind": "summary", "payload": {"draws": 0}})
    body = response.json()
    assert response.status_code == 200
    assert not body["valid"] and body["errors"]
    unknown = client.post("/validate", json={"kind": "nope", "payload": {}}).json()
    assert unknown["errors"][0]["validator"] == "kind"
