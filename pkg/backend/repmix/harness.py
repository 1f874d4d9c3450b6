"""Fitting pipeline and experiment suites behind the CLI verbs."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import gaussian_kde
from tqdm import tqdm

from . import settings
from .artifacts import ArtifactWriter, config_hash, package_versions
from .calibration import calibrate_tau
from .errors import DatasetNotFoundError, InputError
from .model import Dataset, PosteriorDraws, validate_config
from .postprocess import (
    RelabeledDraws,
    density_grid,
    point_allocation,
    posterior_similarity,
    relabel_stephens,
    sum_extra_weights,
    summarize,
)
from .repulsion import prior_surface
from .sampler import chain_seeds, run_chains
from .schemas import (
    BasePrior,
    CalibrationResult,
    Combiner,
    Manifest,
    McmcConfig,
    MixtureConfig,
    RepulsionCase,
    RepulsionSpec,
    RunConfig,
    ScenarioId,
    ScenarioSpec,
    SummaryReport,
    Violation,
)
from .synthdata import ScenarioTruth, describe, generate, true_k
from .validator import check_outputs

logger = logging.getLogger(__name__)

REAL_DATASETS = ("galaxy", "acidity", "iris")
PRIOR_GRID = ((1.0, 2), (1.0, 4), (5.0, 2), (5.0, 4))
TABLE1_SCENARIOS = (ScenarioId.IA, ScenarioId.IB)
TABLE2_SCENARIOS = (
    ScenarioId.IC,
    ScenarioId.IIA,
    ScenarioId.IIB,
    ScenarioId.IIIA,
    ScenarioId.IIIB,
    ScenarioId.IV,
)
TABLE2_SIZES = (100, 1000)
PRECISION_LEVELS = (1.0, 0.5, 0.1, 0.01)

TRUE_ROWS = {
    ScenarioId.IA: [(1.0, 0.0, 1.0)],
    ScenarioId.IB: [(0.7, 0.0, 0.2), (0.3, 0.0, 2.0)],
}


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic child seed of ``seed`` for the lane named by ``keys``."""

    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(keys))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


@dataclass
class FitOutcome:
    run: RunConfig
    dataset: Dataset
    truth: Optional[ScenarioTruth]
    prior: BasePrior
    mixture: MixtureConfig
    spec: Optional[RepulsionSpec]
    calibration: Optional[CalibrationResult]
    draws: PosteriorDraws
    relabeled: RelabeledDraws
    summary: SummaryReport
    seeds: List[int]
    violations: List[Violation]
    wall_time_s: float


def load_run_data(run: RunConfig) -> Tuple[Dataset, Optional[ScenarioTruth], Optional[int]]:
    """Dataset, truth oracle (scenarios only) and the true k0 when known."""

    if run.scenario is not None:
        dataset, truth = generate(run.scenario)
        return dataset, truth, run.k0 or true_k(run.scenario.id)
    return Dataset.from_csv(run.input), None, run.k0


def _repulsion(run: RunConfig, prior: BasePrior) -> Tuple[Optional[RepulsionSpec], Optional[CalibrationResult]]:
    if not run.mcmc.repulsive:
        return None, None
    nu = run.resolved_nu
    if run.tau != "auto":
        return RepulsionSpec(case=run.case, combiner=run.combiner, tau=float(run.tau), nu=nu), None
    if run.k < 2:
        # a single component has no pairs to repel
        return RepulsionSpec(case=run.case, combiner=run.combiner, tau=settings.TAU_START, nu=nu), None
    calibration = calibrate_tau(
        prior,
        run.case,
        run.k,
        c=run.separation_c,
        nu=nu,
        seed=derive_seed(run.mcmc.seed, 1),
        combiner=run.combiner,
        n_mc=run.calibration_mc,
    )
    return calibration.to_spec(), calibration


def fit(run: RunConfig) -> FitOutcome:
    """Calibrate (when tau is auto), sample, relabel and summarize one run."""

    started = time.perf_counter()
    dataset, truth, k0 = load_run_data(run)
    prior = BasePrior.empirical(dataset.values).with_overrides(run.prior)
    mixture = MixtureConfig.symmetric(run.k, dataset.m, run.dirichlet_c)
    violations = validate_config(mixture, prior)
    errors = [v for v in violations if v.severity == "error"]
    if errors:
        raise InputError("invalid model configuration", details={"violations": [v.model_dump() for v in errors]})
    for warning in violations:
        logger.warning("%s: %s", warning.code, warning.message)
    if k0 is not None and k0 > run.k:
        raise InputError(f"k0={k0} exceeds k={run.k}")

    spec, calibration = _repulsion(run, prior)
    draws = run_chains(dataset, run.mcmc, mixture, prior, spec, chains=run.chains, jobs=run.jobs)
    relabeled = relabel_stephens(draws, dataset)
    summary = summarize(relabeled, truth=truth, k0=k0, labels=dataset.labels)
    return FitOutcome(
        run=run,
        dataset=dataset,
        truth=truth,
        prior=prior,
        mixture=mixture,
        spec=spec,
        calibration=calibration,
        draws=draws,
        relabeled=relabeled,
        summary=summary,
        seeds=chain_seeds(run.mcmc.seed, run.chains),
        violations=violations,
        wall_time_s=time.perf_counter() - started,
    )


def _plot_box(values: np.ndarray) -> List[Tuple[float, float]]:
    lo, hi = values.min(axis=0), values.max(axis=0)
    pad = np.maximum(values.std(axis=0), 1e-3)
    return [(float(a - p), float(b + p)) for a, b, p in zip(lo, hi, pad)]


def _grid_nodes(m: int) -> Optional[int]:
    return {1: 400, 2: 80}.get(m)


def clusters_frame(outcome: FitOutcome) -> pd.DataFrame:
    frame = pd.DataFrame(
        {
            "index": np.arange(1, outcome.dataset.n + 1),
            "cluster": point_allocation(outcome.relabeled) + 1,
        }
    )
    if outcome.dataset.labels is not None:
        frame["label"] = outcome.dataset.labels
    return frame


def write_fit(outcome: FitOutcome, writer: ArtifactWriter, kde: bool = False) -> Manifest:
    """draws.csv, summary.json, density_grid.csv, clusters.csv and manifest.json."""

    run = outcome.run
    frame = outcome.relabeled.draws.to_frame()
    writer.write_csv("draws.csv", frame)
    writer.write_json("summary.json", outcome.summary)
    nodes = _grid_nodes(outcome.dataset.m)
    if nodes is not None:
        grid = density_grid(outcome.relabeled.draws, _plot_box(outcome.dataset.values), nodes, outcome.truth)
        if kde and outcome.dataset.n > 1:
            grid["kde"] = gaussian_kde(outcome.dataset.values.T)(grid[[f"y{d + 1}" for d in range(outcome.dataset.m)]].to_numpy().T)
        writer.write_csv("density_grid.csv", grid)
    else:
        logger.info("no density grid for dimension %d", outcome.dataset.m)
    writer.write_csv("clusters.csv", clusters_frame(outcome))
    if run.dump_similarity:
        similarity = posterior_similarity(outcome.relabeled.draws.allocations, outcome.mixture.k)
        writer.write_csv("similarity.csv", pd.DataFrame(similarity, columns=[f"i{j + 1}" for j in range(outcome.dataset.n)]))
    if outcome.calibration is not None:
        writer.write_json("calibration.json", outcome.calibration)

    data_block: Dict[str, Any] = {"name": outcome.dataset.name, "n": outcome.dataset.n, "m": outcome.dataset.m}
    if run.scenario is not None:
        data_block["scenario"] = describe(run.scenario).model_dump(mode="json")
    else:
        data_block["source"] = str(run.input)
    manifest = Manifest(
        run=run,
        run_hash=config_hash(run),
        repulsive=run.mcmc.repulsive,
        data=data_block,
        prior=outcome.prior,
        mixture=outcome.mixture,
        repulsion=outcome.spec,
        calibration=outcome.calibration,
        chain_seeds=outcome.seeds,
        violations=outcome.violations,
        files=dict(writer.files),
        versions=package_versions(),
        wall_time_s=round(outcome.wall_time_s, 3),
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    writer.write_json("manifest.json", manifest)
    return manifest


def cmd_fit(run: RunConfig) -> Manifest:
    settings.ensure_directories([run.out_dir])
    outcome = fit(run)
    manifest = write_fit(outcome, ArtifactWriter(run.out_dir))
    logger.info("fit finished in %.1fs, artifacts in %s", outcome.wall_time_s, run.out_dir)
    return manifest


def cmd_calibrate(
    out_dir: Path,
    prior: BasePrior,
    case: RepulsionCase = RepulsionCase.LOCATION,
    k: int = 6,
    c: float = settings.SEPARATION_C,
    nu: Optional[int] = None,
    seed: int = 0,
    combiner: Combiner = Combiner.MIN,
    n_mc: int = settings.CALIBRATION_MC,
) -> CalibrationResult:
    settings.ensure_directories([out_dir])
    result = calibrate_tau(prior, case, k, c=c, nu=nu, seed=seed, combiner=combiner, n_mc=n_mc)
    ArtifactWriter(out_dir).write_json("calibration.json", result)
    return result


def cmd_generate(spec: ScenarioSpec, out_dir: Path) -> Path:
    settings.ensure_directories([out_dir])
    dataset, _ = generate(spec)
    writer = ArtifactWriter(out_dir)
    path = writer.write_csv("data.csv", dataset.to_frame())
    writer.write_json("scenario.json", describe(spec))
    return path


# ---------------------------------------------------------------------------
# replicated experiments
# ---------------------------------------------------------------------------


def _summary_job(run: RunConfig) -> SummaryReport:
    return fit(run).summary


def run_replicates(runs: Sequence[RunConfig], jobs: int = 1, desc: str = "replicates") -> List[SummaryReport]:
    """Summaries in input order, fitted concurrently up to ``jobs`` workers."""

    if jobs > 1 and len(runs) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(runs))) as pool:
            return list(tqdm(pool.map(_summary_job, runs), total=len(runs), desc=desc, disable=not settings.PROGRESS))
    return [_summary_job(run) for run in tqdm(runs, desc=desc, disable=not settings.PROGRESS)]


def _scenario_run(
    scenario: ScenarioId,
    n: int,
    replicate: int,
    repulsive: bool,
    case: RepulsionCase,
    mcmc: McmcConfig,
    seed: int,
    k: int = 6,
    dirichlet_c: float = settings.DIRICHLET_C,
    calibration_mc: int = settings.CALIBRATION_MC,
) -> RunConfig:
    # both arms of a pair share the data seed and the MCMC seed
    data_seed = derive_seed(seed, 2, replicate)
    return RunConfig(
        scenario=ScenarioSpec(id=scenario, n=n, seed=data_seed),
        k=k,
        dirichlet_c=dirichlet_c,
        case=case,
        calibration_mc=calibration_mc,
        mcmc=mcmc.model_copy(update={"seed": derive_seed(seed, 3, replicate), "repulsive": repulsive}),
        jobs=1,
    )


def _arm(repulsive: bool) -> str:
    return "R" if repulsive else "N-R"


def _write_replicates(writer: ArtifactWriter, prefix: str, summaries: Sequence[SummaryReport]) -> None:
    for index, summary in enumerate(summaries):
        writer.write_json(f"replicates/{prefix}_r{index + 1:02d}/summary.json", summary)


def cmd_table1(
    out_dir: Path,
    replicates: int = settings.REPLICATES,
    seed: int = 0,
    jobs: int = 1,
    mcmc: Optional[McmcConfig] = None,
    n: int = 1000,
    components: int = 2,
    calibration_mc: int = settings.CALIBRATION_MC,
) -> pd.DataFrame:
    """Posterior means/sds of the top components for Ia and Ib, both priors, full-kernel repulsion."""

    settings.ensure_directories([out_dir])
    mcmc = mcmc or McmcConfig()
    writer = ArtifactWriter(out_dir)
    rows: List[Dict[str, Any]] = []
    for scenario in TABLE1_SCENARIOS:
        for rank, (p, mu, sigma) in enumerate(TRUE_ROWS[scenario], start=1):
            rows.append(_table1_row(scenario, "True", rank, [p], [mu], [sigma], [0.0], [0.0], [0.0]))
        for repulsive in (False, True):
            runs = [
                _scenario_run(scenario, n, r, repulsive, RepulsionCase.FULL, mcmc, seed, calibration_mc=calibration_mc)
                for r in range(replicates)
            ]
            summaries = run_replicates(runs, jobs, desc=f"{scenario.value} {_arm(repulsive)}")
            _write_replicates(writer, f"{scenario.value}_{_arm(repulsive)}", summaries)
            for rank in range(1, min(components, summaries[0].k) + 1):
                picked = [s.components[rank - 1] for s in summaries]
                rows.append(
                    _table1_row(
                        scenario,
                        _arm(repulsive),
                        rank,
                        [c.weight_mean for c in picked],
                        [c.mean_mean[0] for c in picked],
                        [c.sigma_mean[0] for c in picked],
                        [c.weight_sd for c in picked],
                        [c.mean_sd[0] for c in picked],
                        [c.sigma_sd[0] for c in picked],
                    )
                )
    table = pd.DataFrame(rows)
    writer.write_csv("table1.csv", table)
    return table


def _table1_row(scenario, arm, rank, p, mu, sigma, p_sd, mu_sd, sigma_sd) -> Dict[str, Any]:
    # replicate-averaged posterior means and posterior sds
    return {
        "scenario": scenario.value,
        "prior": arm,
        "component": rank,
        "p_mean": float(np.mean(p)),
        "p_sd": float(np.mean(p_sd)),
        "mu_mean": float(np.mean(mu)),
        "mu_sd": float(np.mean(mu_sd)),
        "sigma_mean": float(np.mean(sigma)),
        "sigma_sd": float(np.mean(sigma_sd)),
    }


def _metric_row(summaries: Sequence[SummaryReport]) -> Dict[str, float]:
    misclass = [s.misclass for s in summaries if s.misclass is not None]
    return {
        "kl_mean": float(np.mean([s.kl_mean for s in summaries])),
        "kl_sd": float(np.mean([s.kl_sd for s in summaries])),
        "misclass_mean": float(np.mean(misclass)) if misclass else float("nan"),
        "misclass_sd": float(np.std(misclass)) if misclass else float("nan"),
        "extra_weight_mean": float(np.mean([s.extra_weight_mean for s in summaries])),
        "extra_weight_sd": float(np.mean([s.extra_weight_sd for s in summaries])),
    }


def cmd_table2(
    out_dir: Path,
    replicates: int = settings.REPLICATES,
    seed: int = 0,
    jobs: int = 1,
    mcmc: Optional[McmcConfig] = None,
    scenarios: Sequence[ScenarioId] = TABLE2_SCENARIOS,
    sizes: Sequence[int] = TABLE2_SIZES,
    calibration_mc: int = settings.CALIBRATION_MC,
) -> pd.DataFrame:
    """KL divergence, misclassification and extra weights for both priors, location repulsion."""

    settings.ensure_directories([out_dir])
    mcmc = mcmc or McmcConfig()
    writer = ArtifactWriter(out_dir)
    rows: List[Dict[str, Any]] = []
    for scenario in scenarios:
        for n in sizes:
            for repulsive in (False, True):
                runs = [
                    _scenario_run(scenario, n, r, repulsive, RepulsionCase.LOCATION, mcmc, seed, calibration_mc=calibration_mc)
                    for r in range(replicates)
                ]
                summaries = run_replicates(runs, jobs, desc=f"{scenario.value} n={n} {_arm(repulsive)}")
                _write_replicates(writer, f"{scenario.value}_n{n}_{_arm(repulsive)}", summaries)
                rows.append({"scenario": scenario.value, "n": n, "prior": _arm(repulsive), **_metric_row(summaries)})
    table = pd.DataFrame(rows)
    writer.write_csv("table2.csv", table)
    return table


def cmd_emptying(
    out_dir: Path,
    replicates: int = settings.REPLICATES,
    seed: int = 0,
    jobs: int = 1,
    mcmc: Optional[McmcConfig] = None,
    sizes: Tuple[int, int] = (100, 1000),
    calibration_mc: int = settings.CALIBRATION_MC,
) -> Dict[str, Any]:
    """Extra weights on well separated data shrink as n grows (repulsive prior, paired replicates)."""

    settings.ensure_directories([out_dir])
    mcmc = mcmc or McmcConfig()
    small, large = sizes
    runs = [
        _scenario_run(ScenarioId.IIB, size, r, True, RepulsionCase.LOCATION, mcmc, seed, calibration_mc=calibration_mc)
        for r in range(replicates)
        for size in (small, large)
    ]
    summaries = run_replicates(runs, jobs, desc="emptying")
    pairs = pd.DataFrame(
        {
            "replicate": np.arange(1, replicates + 1),
            f"extra_n{small}": [summaries[2 * r].extra_weight_mean for r in range(replicates)],
            f"extra_n{large}": [summaries[2 * r + 1].extra_weight_mean for r in range(replicates)],
        }
    )
    smaller = pairs[f"extra_n{large}"] < pairs[f"extra_n{small}"]
    report = {
        "scenario": ScenarioId.IIB.value,
        "sizes": [small, large],
        "replicates": replicates,
        "fraction_smaller": float(smaller.mean()),
        "mean_extra": {str(small): float(pairs[f"extra_n{small}"].mean()), str(large): float(pairs[f"extra_n{large}"].mean())},
    }
    writer = ArtifactWriter(out_dir)
    writer.write_csv("emptying.csv", pairs)
    writer.write_json("emptying.json", report)
    return report


def cmd_precision(
    out_dir: Path,
    replicates: int = settings.REPLICATES,
    seed: int = 0,
    jobs: int = 1,
    mcmc: Optional[McmcConfig] = None,
    n: int = 1000,
    levels: Sequence[float] = PRECISION_LEVELS,
    calibration_mc: int = settings.CALIBRATION_MC,
) -> pd.DataFrame:
    """Smaller Dirichlet precision without repulsion, next to the repulsive prior at c = 1."""

    settings.ensure_directories([out_dir])
    mcmc = mcmc or McmcConfig()
    settings_grid = [(c, False) for c in levels] + [(settings.DIRICHLET_C, True)]
    rows: List[Dict[str, Any]] = []
    writer = ArtifactWriter(out_dir)
    for c, repulsive in settings_grid:
        runs = [
            _scenario_run(
                ScenarioId.IIA, n, r, repulsive, RepulsionCase.LOCATION, mcmc, seed, dirichlet_c=c, calibration_mc=calibration_mc
            )
            for r in range(replicates)
        ]
        summaries = run_replicates(runs, jobs, desc=f"c={c:g} {_arm(repulsive)}")
        _write_replicates(writer, f"c{c:g}_{_arm(repulsive)}", summaries)
        misclass = [s.misclass for s in summaries]
        rows.append(
            {
                "dirichlet_c": c,
                "prior": _arm(repulsive),
                "extra_weight_mean": float(np.mean([s.extra_weight_mean for s in summaries])),
                "extra_weight_sd": float(np.mean([s.extra_weight_sd for s in summaries])),
                "misclass_mean": float(np.mean(misclass)),
                "misclass_sd": float(np.std(misclass)),
            }
        )
    table = pd.DataFrame(rows)
    writer.write_csv("precision.csv", table)
    return table


# ---------------------------------------------------------------------------
# real data
# ---------------------------------------------------------------------------


def load_real_dataset(name: str, path: Optional[Path] = None) -> Dataset:
    """galaxy and acidity come from CSV files; iris falls back to scikit-learn's copy."""

    if name not in REAL_DATASETS:
        raise InputError(f"unknown dataset '{name}'", details={"choices": list(REAL_DATASETS)})
    if path is None and name == "iris":
        from sklearn.datasets import load_iris

        iris = load_iris()
        return Dataset(values=iris.data, labels=iris.target, name="iris")
    path = path or settings.DATA_DIR / f"{name}.csv"
    if not Path(path).exists():
        raise DatasetNotFoundError(
            f"No {name} dataset at {path}",
            details={
                "expected": "CSV with a header, one numeric column per dimension, optional final 'label' column",
                "hint": "run scripts/fetch_datasets.py or pass --input",
            },
        )
    return Dataset.from_csv(path, name=name)


def _extra_weight_frame(outcome: FitOutcome, k0: int) -> pd.DataFrame:
    extra = np.atleast_1d(sum_extra_weights(outcome.relabeled.draws.weights, k0))
    return pd.DataFrame({"iter": outcome.relabeled.draws.iterations, "extra_weight": extra})


def _extra_weight_density(frames: Dict[str, pd.DataFrame]) -> pd.DataFrame:
    grid = np.linspace(0.0, 1.0, 201)
    out = pd.DataFrame({"extra_weight": grid})
    for label, frame in frames.items():
        values = frame["extra_weight"].to_numpy()
        if np.ptp(values) > 0:
            out[label] = gaussian_kde(values)(grid)
        else:
            # point mass: all of it on the nearest node
            spike = np.zeros_like(grid)
            spike[np.argmin(np.abs(grid - values[0]))] = 1.0 / (grid[1] - grid[0])
            out[label] = spike
    return out


def cmd_realdata(
    name: str,
    out_dir: Path,
    path: Optional[Path] = None,
    seed: int = 0,
    mcmc: Optional[McmcConfig] = None,
    ks: Optional[Sequence[int]] = None,
    chains: int = 1,
    jobs: int = 1,
    calibration_mc: int = settings.CALIBRATION_MC,
) -> Dict[str, Any]:
    """Fit both priors to one of the real datasets and report the leading weights."""

    dataset = load_real_dataset(name, path)
    settings.ensure_directories([out_dir])
    writer = ArtifactWriter(out_dir)
    data_path = writer.write_csv("data.csv", dataset.to_frame())
    mcmc = mcmc or McmcConfig(seed=seed)
    if name == "iris":
        case, ks, k0 = RepulsionCase.LOCATION, tuple(ks or (6, 10)), 3
    else:
        case, ks, k0 = RepulsionCase.FULL, tuple(ks or (5,)), None

    report: Dict[str, Any] = {"dataset": name, "n": dataset.n, "m": dataset.m, "fits": []}
    extra_frames: Dict[str, pd.DataFrame] = {}
    for k in ks:
        for repulsive in (False, True):
            label = f"k{k}_{_arm(repulsive)}"
            run = RunConfig(
                input=data_path,
                k=k,
                case=case,
                k0=k0,
                calibration_mc=calibration_mc,
                mcmc=mcmc.model_copy(update={"repulsive": repulsive}),
                chains=chains,
                jobs=jobs,
                out_dir=Path(out_dir) / label,
            )
            outcome = fit(run)
            write_fit(outcome, ArtifactWriter(run.out_dir), kde=True)
            weights = outcome.summary.top_weights(3)
            report["fits"].append(
                {
                    "k": k,
                    "prior": _arm(repulsive),
                    "top_weights": weights,
                    "components_above_5pct": sum(c.weight_mean > 0.05 for c in outcome.summary.components),
                    "extra_weight_mean": outcome.summary.extra_weight_mean,
                }
            )
            if k0 is not None:
                extra_frames[label] = _extra_weight_frame(outcome, k0)
            logger.info("%s %s: top weights %s", name, label, ", ".join(f"{w:.3f}" for w in weights))
    if extra_frames:
        writer.write_csv("extra_weight_density.csv", _extra_weight_density(extra_frames))
    writer.write_json("realdata.json", report)
    return report


# ---------------------------------------------------------------------------
# prior surfaces and checks
# ---------------------------------------------------------------------------


def cmd_prior_grid(out_dir: Path, nodes: int = 121, half_width: float = 3.0) -> List[Path]:
    """Unnormalized log prior of two 1-D locations for each (tau, nu) illustration setting."""

    settings.ensure_directories([out_dir])
    writer = ArtifactWriter(out_dir)
    grid = np.linspace(-half_width, half_width, nodes)
    mu1, mu2 = np.meshgrid(grid, grid, indexing="ij")
    prior = BasePrior.standard(1)
    paths = []
    for tau, nu in PRIOR_GRID:
        spec = RepulsionSpec(case=RepulsionCase.LOCATION, tau=tau, nu=nu)
        surface = prior_surface(spec, prior, grid)
        frame = pd.DataFrame({"mu1": mu1.reshape(-1), "mu2": mu2.reshape(-1), "log_prior": surface.reshape(-1)})
        paths.append(writer.write_csv(f"prior_grid_tau{tau:g}_nu{nu}.csv", frame))
    return paths


def cmd_check(out_dir: Path) -> Dict[str, Any]:
    result = check_outputs(out_dir)
    if not result["valid"]:
        raise InputError(f"{len(result['errors'])} artifact problems in {out_dir}", details=result)
    return result


__all__ = [
    "FitOutcome",
    "derive_seed",
    "fit",
    "write_fit",
    "load_run_data",
    "load_real_dataset",
    "run_replicates",
    "cmd_fit",
    "cmd_calibrate",
    "cmd_generate",
    "cmd_table1",
    "cmd_table2",
    "cmd_realdata",
    "cmd_emptying",
    "cmd_precision",
    "cmd_prior_grid",
    "cmd_check",
]
