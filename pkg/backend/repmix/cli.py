"""Command-line entry point: ``python main.py <verb> [flags]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

from pydantic import ValidationError

from . import harness, settings
from .errors import InputError, RepmixError
from .model import Dataset
from .schemas import (
    BasePrior,
    Combiner,
    McmcConfig,
    RepulsionCase,
    RunConfig,
    ScenarioId,
    ScenarioSpec,
)
from .synthdata import generate

logger = logging.getLogger(__name__)

VERBS = ("fit", "calibrate", "table1", "table2", "realdata", "generate", "emptying", "precision", "prior-grid", "check", "serve")


def _tau(value: str) -> str | float:
    if value == "auto":
        return value
    try:
        return float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--tau must be 'auto' or a number, got {value!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="repmix", description="Bayesian finite mixtures with repulsive priors.")
    parser.add_argument("verb", choices=VERBS, help="What to run.")
    parser.add_argument("--config", type=Path, default=None, help="RunConfig JSON, or a manifest.json to re-run.")
    parser.add_argument("--input", type=Path, default=None, help="Dataset CSV (fit, calibrate, realdata).")
    parser.add_argument("--scenario", type=str, default=None, choices=[s.value for s in ScenarioId], help="Synthetic scenario.")
    parser.add_argument("--n", type=int, default=None, help="Scenario sample size.")
    parser.add_argument("--dataset", type=str, default=None, choices=harness.REAL_DATASETS, help="Real dataset for realdata.")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--k", type=int, default=None, help="Number of mixture components.")
    parser.add_argument("--k0", type=int, default=None, help="True number of components, for extra weights.")
    parser.add_argument("--case", type=str, default=None, choices=[c.value for c in RepulsionCase])
    parser.add_argument("--combiner", type=str, default=None, choices=[c.value for c in Combiner])
    parser.add_argument("--tau", type=_tau, default=None, help="'auto' calibrates tau.")
    parser.add_argument("--nu", type=int, default=None)
    parser.add_argument("--c", type=float, default=None, help="Separation constant of the tau calibration.")
    parser.add_argument("--dirichlet-c", type=float, default=None, help="Dirichlet precision; alpha_h = c / k.")
    parser.add_argument("--n-mc", type=int, default=None, help="Monte Carlo size of the tau calibration.")
    parser.add_argument("--iterations", type=int, default=None)
    parser.add_argument("--burnin", type=int, default=None)
    parser.add_argument("--thin", type=int, default=None)
    parser.add_argument("--chains", type=int, default=None)
    parser.add_argument("--jobs", type=int, default=None)
    parser.add_argument("--replicates", type=int, default=settings.REPLICATES)
    parser.add_argument("--non-repulsive", action="store_true", help="Fit the plain g0 comparator.")
    parser.add_argument("--debug", action="store_true", help="Assert slice validity every iteration.")
    parser.add_argument("--dump-similarity", action="store_true")
    parser.add_argument("--out", type=Path, default=None, help="Output directory.")
    parser.add_argument("--host", type=str, default="0.0.0.0")
    parser.add_argument("--port", type=int, default=8000)
    return parser


def _load_config(path: Optional[Path]) -> Dict[str, Any]:
    if path is None:
        return {}
    if not path.exists():
        raise InputError(f"config file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"config file {path} is not valid JSON: {exc}") from exc
    if isinstance(payload, dict) and "run" in payload and "run_hash" in payload:
        return payload["run"]
    return payload


def _mcmc(ns: argparse.Namespace, base: Optional[Dict[str, Any]] = None) -> McmcConfig:
    values = dict(base or {})
    for flag, name in (("seed", "seed"), ("iterations", "iterations"), ("burnin", "burn_in"), ("thin", "thin")):
        if getattr(ns, flag) is not None:
            values[name] = getattr(ns, flag)
    if ns.non_repulsive:
        values["repulsive"] = False
    if ns.debug:
        values["debug"] = True
    return McmcConfig(**values)


def run_config(ns: argparse.Namespace) -> RunConfig:
    """Config file first, then flags on top."""

    values = _load_config(ns.config)
    if ns.input is not None:
        values["input"] = ns.input
        values.pop("scenario", None)
    if ns.scenario is not None:
        values["scenario"] = {"id": ns.scenario, "n": ns.n or 1000, "seed": ns.seed if ns.seed is not None else 0}
        values.pop("input", None)
    overrides = {
        "k": ns.k,
        "k0": ns.k0,
        "case": ns.case,
        "combiner": ns.combiner,
        "tau": ns.tau,
        "nu": ns.nu,
        "separation_c": ns.c,
        "dirichlet_c": ns.dirichlet_c,
        "calibration_mc": ns.n_mc,
        "chains": ns.chains,
        "jobs": ns.jobs,
        "out_dir": ns.out,
    }
    values.update({key: value for key, value in overrides.items() if value is not None})
    if ns.dump_similarity:
        values["dump_similarity"] = True
    values["mcmc"] = _mcmc(ns, values.get("mcmc"))
    return RunConfig.model_validate(values)


def _out(ns: argparse.Namespace, name: str) -> Path:
    return ns.out or settings.OUT_DIR / name


def dispatch(ns: argparse.Namespace) -> Any:
    seed = ns.seed if ns.seed is not None else 0
    jobs = ns.jobs or settings.JOBS
    n_mc = ns.n_mc or settings.CALIBRATION_MC
    if ns.verb == "fit":
        return harness.cmd_fit(run_config(ns))
    if ns.verb == "calibrate":
        if ns.input is not None:
            prior = BasePrior.empirical(Dataset.from_csv(ns.input).values)
        elif ns.scenario is not None:
            prior = BasePrior.empirical(generate(ScenarioSpec(id=ns.scenario, n=ns.n or 1000, seed=seed))[0].values)
        else:
            prior = BasePrior.standard(1)
        return harness.cmd_calibrate(
            _out(ns, "calibration"),
            prior,
            case=RepulsionCase(ns.case or RepulsionCase.LOCATION.value),
            k=ns.k or 6,
            c=ns.c if ns.c is not None else settings.SEPARATION_C,
            nu=ns.nu,
            seed=seed,
            combiner=Combiner(ns.combiner or Combiner.MIN.value),
            n_mc=n_mc,
        )
    if ns.verb == "generate":
        if ns.scenario is None:
            raise InputError("generate needs --scenario")
        return harness.cmd_generate(ScenarioSpec(id=ns.scenario, n=ns.n or 1000, seed=seed), _out(ns, f"data_{ns.scenario}"))
    experiment = {"replicates": ns.replicates, "seed": seed, "jobs": jobs, "mcmc": _mcmc(ns), "calibration_mc": n_mc}
    if ns.verb == "table1":
        return harness.cmd_table1(_out(ns, "table1"), **experiment)
    if ns.verb == "table2":
        return harness.cmd_table2(_out(ns, "table2"), **experiment)
    if ns.verb == "emptying":
        return harness.cmd_emptying(_out(ns, "emptying"), **experiment)
    if ns.verb == "precision":
        return harness.cmd_precision(_out(ns, "precision"), **experiment)
    if ns.verb == "realdata":
        if ns.dataset is None:
            raise InputError("realdata needs --dataset", details={"choices": list(harness.REAL_DATASETS)})
        return harness.cmd_realdata(
            ns.dataset,
            _out(ns, ns.dataset),
            path=ns.input,
            seed=seed,
            mcmc=_mcmc(ns),
            ks=[ns.k] if ns.k else None,
            chains=ns.chains or 1,
            jobs=jobs,
            calibration_mc=n_mc,
        )
    if ns.verb == "prior-grid":
        return harness.cmd_prior_grid(_out(ns, "prior_grid"))
    if ns.verb == "check":
        return harness.cmd_check(_out(ns, ""))
    if ns.verb == "serve":
        import uvicorn

        uvicorn.run("repmix.main:app", host=ns.host, port=ns.port)
        return None
    raise InputError(f"unknown verb {ns.verb}")


def main(args: Iterable[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(list(args) if args is not None else None)
    settings.configure_logging()
    try:
        dispatch(ns)
    except ValidationError as exc:
        error = InputError("invalid configuration", details={"errors": json.loads(exc.json())})
        print(json.dumps(error.to_dict(), sort_keys=True), file=sys.stderr)
        return error.exit_code
    except RepmixError as exc:
        logger.debug("command failed", exc_info=True)
        print(json.dumps(exc.to_dict(), sort_keys=True, default=str), file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        logger.debug("command failed", exc_info=True)
        error = InputError(str(exc))
        print(json.dumps(error.to_dict(), sort_keys=True), file=sys.stderr)
        return error.exit_code
    print(f"{ns.verb} finished.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
