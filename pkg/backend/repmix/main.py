"""FastAPI application exposing density, repulsion, calibration and fitting endpoints."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, List, NoReturn

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import ValidationError

from . import harness, schemas, settings, validator
from .artifacts import ArtifactWriter
from .calibration import calibrate_tau
from .errors import CalibrationError, DatasetNotFoundError, InputError, RepmixError
from .model import Component, Dataset, MixtureState, mixture_log_density
from .repulsion import distance_matrix, log_h, log_prior_unnormalized
from .store import run_store

logger = logging.getLogger(__name__)

app = FastAPI(title="Repulsive Mixtures", version="0.1.0")

allow_all = settings.FRONTEND_ORIGIN == "*"
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"] if allow_all else [settings.FRONTEND_ORIGIN],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.on_event("startup")
def _startup() -> None:
    settings.ensure_directories()


def _raise_http(exc: RepmixError) -> NoReturn:
    if isinstance(exc, DatasetNotFoundError):
        status = 404
    elif isinstance(exc, InputError):
        status = 400
    elif isinstance(exc, CalibrationError):
        status = 422
    else:
        status = 500
    logger.warning("request failed: %s", exc.message)
    raise HTTPException(status_code=status, detail=exc.to_dict())


def _state(payload: schemas.StateReq) -> MixtureState:
    if not (len(payload.weights) == len(payload.means) == len(payload.variances)):
        raise InputError("weights, means and variances must list the same components")
    total = float(np.sum(payload.weights))
    if total <= 0 or any(w < 0 for w in payload.weights):
        raise InputError("weights must be non-negative with a positive sum")
    components = [Component(np.asarray(mu), np.asarray(var)) for mu, var in zip(payload.means, payload.variances)]
    return MixtureState.from_components(np.asarray(payload.weights) / total, components)


@app.get("/")
def root() -> Dict[str, Any]:
    return {
        "title": "Repulsive Mixtures API",
        "version": "0.1.0",
        "status": "running",
        "description": "Bayesian finite mixtures with repulsive priors on the component parameters",
        "endpoints": {
            "health": "/health",
            "density": "POST /density",
            "repulsion": "POST /repulsion",
            "calibrate": "POST /calibrate",
            "fit": "POST /fit",
            "runs": "GET /runs",
            "run": "GET|DELETE /runs/{id}",
            "validate": "POST /validate",
            "docs": "/docs",
        },
    }


@app.get("/health")
def health() -> Dict[str, bool]:
    return {"ok": True}


@app.post("/density")
def density(payload: schemas.DensityReq) -> Dict[str, List[float]]:
    try:
        state = _state(payload)
        points = np.asarray(payload.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != state.m:
            raise InputError(f"points must be rows of length {state.m}")
    except RepmixError as exc:
        _raise_http(exc)
    values = np.exp(mixture_log_density(state.weights, state.means, state.variances, points))
    return {"density": values.tolist()}


@app.post("/repulsion")
def repulsion(payload: schemas.RepulsionReq) -> Dict[str, Any]:
    try:
        components = [Component(np.asarray(mu), np.asarray(var)) for mu, var in zip(payload.means, payload.variances)]
        if not components or len(payload.means) != len(payload.variances):
            raise InputError("means and variances must list the same non-empty set of components")
        means = np.stack([c.mean for c in components])
        variances = np.stack([c.var for c in components])
        value = float(log_h(payload.spec, means, variances))
        response: Dict[str, Any] = {
            "distances": distance_matrix(payload.spec, means, variances).tolist(),
            "log_h": value if np.isfinite(value) else None,
            "h": float(np.exp(value)),
        }
        if payload.prior is not None:
            if payload.prior.dim != means.shape[1]:
                raise InputError(f"prior dimension {payload.prior.dim} does not match components ({means.shape[1]})")
            log_prior = log_prior_unnormalized(payload.spec, payload.prior, components)
            response["log_prior"] = log_prior if np.isfinite(log_prior) else None
    except RepmixError as exc:
        _raise_http(exc)
    return response


@app.post("/calibrate", response_model=schemas.CalibrationResult)
def calibrate(payload: schemas.CalibrateReq) -> schemas.CalibrationResult:
    try:
        return calibrate_tau(
            payload.prior,
            payload.case,
            payload.k,
            c=payload.c,
            nu=payload.nu,
            seed=payload.seed,
            combiner=payload.combiner,
            n_mc=payload.n_mc,
        )
    except RepmixError as exc:
        _raise_http(exc)


@app.post("/fit", response_model=schemas.FitResp)
def fit(payload: schemas.FitReq) -> schemas.FitResp:
    """Short synchronous fit; artifacts land under ``OUT_DIR/api/<run id>``."""

    run_id = run_store.new_id()
    out_dir = Path(settings.OUT_DIR) / "api" / run_id
    try:
        if payload.burn_in >= payload.iterations:
            raise InputError("burn_in must be smaller than iterations")
        dataset = Dataset(values=np.asarray(payload.values, dtype=float), name=f"api-{run_id}")
        settings.ensure_directories([out_dir])
        data_path = ArtifactWriter(out_dir).write_csv("data.csv", dataset.to_frame())
        run = schemas.RunConfig(
            input=data_path,
            k=payload.k,
            case=payload.case,
            combiner=payload.combiner,
            tau=payload.tau,
            nu=payload.nu,
            k0=payload.k0,
            calibration_mc=settings.MIN_CALIBRATION_MC,
            mcmc=schemas.McmcConfig(
                iterations=payload.iterations,
                burn_in=payload.burn_in,
                thin=payload.thin,
                seed=payload.seed,
                repulsive=payload.repulsive,
            ),
            jobs=1,
            out_dir=out_dir,
        )
        outcome = harness.fit(run)
        harness.write_fit(outcome, ArtifactWriter(out_dir))
    except ValidationError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    except RepmixError as exc:
        _raise_http(exc)
    response = schemas.FitResp(run_id=run_id, summary=outcome.summary, calibration=outcome.calibration)
    run_store.add(run_id, payload, response)
    return response


@app.get("/runs")
def list_runs() -> List[schemas.RunListing]:
    return run_store.list()


@app.get("/runs/{run_id}")
def get_run(run_id: str) -> schemas.RunRecord:
    try:
        record = run_store.get(run_id)
    except InputError as exc:
        _raise_http(exc)
    if record is None:
        raise HTTPException(status_code=404, detail="Run not found")
    return record


@app.delete("/runs/{run_id}")
def delete_run(run_id: str) -> Dict[str, str]:
    try:
        deleted = run_store.delete(run_id)
    except InputError as exc:
        _raise_http(exc)
    if not deleted:
        raise HTTPException(status_code=404, detail="Run not found")
    return {"message": "Run deleted successfully"}


@app.post("/validate")
def validate(payload: schemas.ValidateReq) -> Dict[str, Any]:
    return validator.validate_artifact(payload.kind, payload.payload)


__all__ = ["app"]
