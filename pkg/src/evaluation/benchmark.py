# Monte-Carlo contamination benchmark and factor-count sweep.
#
# A task is one (noise std, noise level, trial) cell: draw the trial's
# synthetic data, contaminate the training inputs, fit every algorithm and
# score it on the clean test set. Tasks are independent and seeded only by
# (master seed, cell keys), so the output does not depend on job count or
# scheduling; rows are sorted canonically before they are returned.
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits

from src.data.dataset import ContaminationSpec, RegressionDataset, SyntheticSpec
from src.data.synthetic import contaminate, generate_synthetic
from src.errors import RobustPLSError, SpecificationError
from src.models.estimators import make_estimator
from src.models.factors import FactorModel, predict
from src.models.selection import select_num_factors
from src.utils.metrics import evaluate_all
from src.utils.seeding import derive_int_seed

logger = logging.getLogger(__name__)

COLUMNS = [
    "algorithm",
    "noise_level",
    "noise_std",
    "trial",
    "axis",
    "r",
    "rmse",
    "mae",
    "s_used",
    "seed",
    "status",
]
FLOAT_FORMAT = "%.10g"
ALGORITHMS = ("plsr", "pmcr")
FIT_ERRORS = (RobustPLSError, np.linalg.LinAlgError, FloatingPointError, ValueError)

PRESETS: dict[str, dict[str, Any]] = {
    "quick": {"levels": [0.0, 0.2, 0.5, 0.8], "stds": [100.0], "trials": 20},
    "full": {
        "levels": [round(0.05 * i, 2) for i in range(21)],
        "stds": [30.0, 100.0, 300.0],
        "trials": 100,
    },
}


def _check_common(algorithms, trials, jobs) -> None:
    unknown = set(algorithms) - set(ALGORITHMS)
    if unknown or not algorithms:
        raise SpecificationError(f"algorithms must be a non-empty subset of {ALGORITHMS}, got {algorithms!r}")
    if int(trials) != trials or trials < 1:
        raise SpecificationError(f"trials must be a positive integer, got {trials!r}")
    if jobs == 0:
        raise SpecificationError("jobs must be non-zero")


@dataclass(frozen=True)
class BenchmarkConfig:
    """Grid over noise levels x noise stds x trials.

    `factors` is a fixed count or "auto" (PLSR cross-validation once per
    cell, shared by every algorithm). With `redraw_transforms=False` all
    trials share one pair of transformation matrices.
    """

    levels: tuple[float, ...] = (0.0, 0.2, 0.5, 0.8)
    stds: tuple[float, ...] = (100.0,)
    trials: int = 20
    algorithms: tuple[str, ...] = ALGORITHMS
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)
    factors: int | str = "auto"
    s_max: int = 100
    folds: int = 5
    seed: int = 0
    jobs: int = 1
    redraw_transforms: bool = True
    relative: bool = False
    mae_l1: bool = False
    pmcr: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        object.__setattr__(self, "stds", tuple(float(v) for v in self.stds))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        _check_common(self.algorithms, self.trials, self.jobs)
        if not self.levels or not self.stds:
            raise SpecificationError("levels and stds must be non-empty")
        for level in self.levels:
            ContaminationSpec(level=level, noise_std=1.0)
        for std in self.stds:
            ContaminationSpec(level=0.0, noise_std=std)
        if self.factors != "auto":
            bound = min(self.synthetic.x_dim, self.synthetic.train_count)
            if int(self.factors) != self.factors or not 1 <= self.factors <= bound:
                raise SpecificationError(f"factors must be 'auto' or an integer in [1, {bound}], got {self.factors!r}")

    @classmethod
    def from_config(cls, cfg: Mapping[str, Any]) -> "BenchmarkConfig":
        """Build from a resolved run configuration (see src.utils.config)."""
        section = dict(cfg.get("benchmark", {}))
        preset = section.pop("preset", None)
        if preset is not None:
            if preset not in PRESETS:
                raise SpecificationError(f"unknown preset '{preset}', expected one of {sorted(PRESETS)}")
            section.update(PRESETS[preset])
        selection = cfg.get("selection", {})
        return cls(
            levels=tuple(section.get("levels", cls.levels)),
            stds=tuple(section.get("stds", cls.stds)),
            trials=section.get("trials", cls.trials),
            algorithms=tuple(section.get("algorithms", cls.algorithms)),
            synthetic=SyntheticSpec.from_mapping({**cfg.get("synthetic", {}), "seed": cfg.get("seed", 0)}),
            factors=section.get("factors", cls.factors),
            s_max=selection.get("s_max", cls.s_max),
            folds=selection.get("folds", cls.folds),
            seed=cfg.get("seed", 0),
            jobs=section.get("jobs", cls.jobs),
            redraw_transforms=section.get("redraw_transforms", cls.redraw_transforms),
            relative=cfg.get("contamination", {}).get("relative", cls.relative),
            mae_l1=section.get("mae_l1", cls.mae_l1),
            pmcr=dict(cfg.get("pmcr") or {}),
        )


@dataclass(frozen=True)
class SweepConfig:
    """Test metrics as a function of the factor count at one contamination setting."""

    level: float = 0.5
    noise_std: float = 100.0
    s_values: tuple[int, ...] = tuple(range(1, 101))
    trials: int = 10
    algorithms: tuple[str, ...] = ALGORITHMS
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)
    seed: int = 0
    jobs: int = 1
    redraw_transforms: bool = True
    relative: bool = False
    mae_l1: bool = False
    pmcr: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "s_values", tuple(sorted({int(s) for s in self.s_values})))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        _check_common(self.algorithms, self.trials, self.jobs)
        ContaminationSpec(level=self.level, noise_std=self.noise_std)
        bound = min(self.synthetic.x_dim, self.synthetic.train_count)
        if not self.s_values or self.s_values[0] < 1 or self.s_values[-1] > bound:
            raise SpecificationError(f"factor counts must lie in [1, {bound}], got {self.s_values!r}")

    @classmethod
    def from_config(cls, cfg: Mapping[str, Any]) -> "SweepConfig":
        section = cfg.get("sweep", {})
        return cls(
            level=section.get("level", cls.level),
            noise_std=section.get("noise_std", cls.noise_std),
            s_values=tuple(section.get("s_values", cls.s_values)),
            trials=section.get("trials", cls.trials),
            algorithms=tuple(section.get("algorithms", cls.algorithms)),
            synthetic=SyntheticSpec.from_mapping({**cfg.get("synthetic", {}), "seed": cfg.get("seed", 0)}),
            seed=cfg.get("seed", 0),
            jobs=section.get("jobs", cls.jobs),
            redraw_transforms=cfg.get("benchmark", {}).get("redraw_transforms", cls.redraw_transforms),
            relative=cfg.get("contamination", {}).get("relative", cls.relative),
            mae_l1=section.get("mae_l1", cls.mae_l1),
            pmcr=dict(cfg.get("pmcr") or {}),
        )


class Cell(NamedTuple):
    std_index: int
    level_index: int
    trial: int


def trial_datasets(
    synthetic: SyntheticSpec, seed: int, trial: int, redraw_transforms: bool = True
) -> tuple[RegressionDataset, RegressionDataset]:
    """Clean (train, test) of one trial; identical for every level and std."""
    if redraw_transforms:
        transform_seed = None
    else:
        transform_seed = synthetic.transform_seed if synthetic.transform_seed is not None else seed
    spec = replace(synthetic, seed=derive_int_seed(seed, "trial", trial), transform_seed=transform_seed)
    return generate_synthetic(spec)


def fit_algorithm(name: str, data: RegressionDataset, n_factors: int, pmcr: Mapping[str, Any]) -> FactorModel:
    return make_estimator(name, n_factors, **pmcr).fit(data.x, data.y).model_


def _metric_rows(base: dict, yhat, y, mae_l1: bool) -> list[dict]:
    metrics = evaluate_all(yhat, y, mae_l1=mae_l1)
    return [
        {
            **base,
            "axis": axis,
            "r": np.nan if metrics["r"][axis] is None else metrics["r"][axis],
            "rmse": metrics["rmse"][axis],
            "mae": metrics["mae"][axis],
            "status": "ok",
        }
        for axis in range(len(metrics["rmse"]))
    ]


def _failed_rows(base: dict, n_axes: int, error: BaseException) -> list[dict]:
    status = f"error:{type(error).__name__}"
    return [
        {**base, "axis": axis, "r": np.nan, "rmse": np.nan, "mae": np.nan, "status": status}
        for axis in range(n_axes)
    ]


def _contaminated_train(train: RegressionDataset, level: float, std: float, seed: int, relative: bool):
    x_bad, _ = contaminate(train.x, ContaminationSpec(level=level, noise_std=std, seed=seed, relative=relative))
    return train.with_x(x_bad)


def run_cell(cfg: BenchmarkConfig, cell: Cell) -> list[dict]:
    """All rows of one (std, level, trial) cell."""
    level = cfg.levels[cell.level_index]
    std = cfg.stds[cell.std_index]
    keys = (cell.trial, cell.level_index, cell.std_index)
    n_axes = cfg.synthetic.y_dim
    rows: list[dict] = []
    with threadpool_limits(limits=1):
        train, test = trial_datasets(cfg.synthetic, cfg.seed, cell.trial, cfg.redraw_transforms)
        data = _contaminated_train(
            train, level, std, derive_int_seed(cfg.seed, "contamination", *keys), cfg.relative
        )
        base = {"noise_level": level, "noise_std": std, "trial": cell.trial, "seed": cfg.seed}

        s_used: int | None = None
        selection_error: BaseException | None = None
        try:
            if cfg.factors == "auto":
                s_used = select_num_factors(
                    data, cfg.s_max, folds=cfg.folds, seed=derive_int_seed(cfg.seed, "folds", *keys)
                )
            else:
                s_used = int(cfg.factors)
        except FIT_ERRORS as e:
            selection_error = e
            logger.warning("Factor selection failed (level=%g, std=%g, trial=%d): %s", level, std, cell.trial, e)

        for algo in cfg.algorithms:
            algo_base = {**base, "algorithm": algo, "s_used": s_used}
            if selection_error is not None:
                rows.extend(_failed_rows(algo_base, n_axes, selection_error))
                continue
            try:
                model = fit_algorithm(algo, data, s_used, cfg.pmcr)
                rows.extend(_metric_rows(algo_base, predict(model, test.x), test.y, cfg.mae_l1))
            except FIT_ERRORS as e:
                logger.warning("%s fit failed (level=%g, std=%g, trial=%d): %s", algo, level, std, cell.trial, e)
                rows.extend(_failed_rows(algo_base, n_axes, e))
    return rows


def sweep_trial(cfg: SweepConfig, trial: int) -> list[dict]:
    """Rows of one trial for every algorithm and factor count."""
    n_axes = cfg.synthetic.y_dim
    rows: list[dict] = []
    with threadpool_limits(limits=1):
        train, test = trial_datasets(cfg.synthetic, cfg.seed, trial, cfg.redraw_transforms)
        data = _contaminated_train(
            train, cfg.level, cfg.noise_std, derive_int_seed(cfg.seed, "contamination", trial), cfg.relative
        )
        base = {"noise_level": cfg.level, "noise_std": cfg.noise_std, "trial": trial, "seed": cfg.seed}
        for algo in cfg.algorithms:
            try:
                # factors are extracted sequentially, so each s is a prefix of the largest fit
                full = fit_algorithm(algo, data, cfg.s_values[-1], cfg.pmcr)
            except FIT_ERRORS as e:
                logger.warning("%s sweep fit failed (trial=%d): %s", algo, trial, e)
                for s in cfg.s_values:
                    rows.extend(_failed_rows({**base, "algorithm": algo, "s_used": s}, n_axes, e))
                continue
            for s in cfg.s_values:
                model = full.truncate(s) if s < full.n_factors else full
                rows.extend(
                    _metric_rows({**base, "algorithm": algo, "s_used": s}, predict(model, test.x), test.y, cfg.mae_l1)
                )
    return rows


def _canonical_frame(rows: list[dict], algorithms: Sequence[str], by_factors: bool) -> pd.DataFrame:
    df = pd.DataFrame(rows, columns=COLUMNS)
    df["s_used"] = df["s_used"].astype("Int64")
    df["trial"] = df["trial"].astype(int)
    df["axis"] = df["axis"].astype(int)
    df["seed"] = df["seed"].astype(int)
    order = {name: i for i, name in enumerate(algorithms)}
    df["_algo"] = df["algorithm"].map(order)
    keys = ["noise_level", "noise_std", "trial", "_algo"] + (["s_used"] if by_factors else []) + ["axis"]
    df = df.sort_values(keys, kind="mergesort").drop(columns="_algo").reset_index(drop=True)
    return df


def _run_parallel(fn, cfg, items, jobs: int) -> list[dict]:
    results = Parallel(n_jobs=jobs)(delayed(fn)(cfg, item) for item in items)
    return [row for rows in results for row in rows]


def run_benchmark(cfg: BenchmarkConfig) -> pd.DataFrame:
    """Tidy benchmark result: one row per algorithm x level x std x trial x axis."""
    cells = [
        Cell(si, li, trial)
        for si in range(len(cfg.stds))
        for li in range(len(cfg.levels))
        for trial in range(cfg.trials)
    ]
    logger.info(
        "Benchmark: %d level(s) x %d std(s) x %d trial(s), algorithms %s, jobs=%d",
        len(cfg.levels), len(cfg.stds), cfg.trials, ",".join(cfg.algorithms), cfg.jobs,
    )
    df = _canonical_frame(_run_parallel(run_cell, cfg, cells, cfg.jobs), cfg.algorithms, by_factors=False)
    n_failed = int((df["status"] != "ok").sum())
    logger.info("Benchmark finished: %d rows, %d failed", len(df), n_failed)
    return df


def factor_sweep(cfg: SweepConfig) -> pd.DataFrame:
    """Tidy sweep result: one row per algorithm x s x trial x axis."""
    logger.info(
        "Factor sweep: s in [%d, %d] (%d values), %d trial(s), level=%g, std=%g",
        cfg.s_values[0], cfg.s_values[-1], len(cfg.s_values), cfg.trials, cfg.level, cfg.noise_std,
    )
    df = _canonical_frame(
        _run_parallel(sweep_trial, cfg, range(cfg.trials), cfg.jobs), cfg.algorithms, by_factors=True
    )
    logger.info("Factor sweep finished: %d rows, %d failed", len(df), int((df["status"] != "ok").sum()))
    return df


def summarize(result: pd.DataFrame, by_factors: bool = False) -> pd.DataFrame:
    """Mean over output axes, then mean and std over trials.

    Groups by (algorithm, noise_std, noise_level) and, with `by_factors`,
    also by s_used. Failed rows are left out.
    """
    ok = result[result["status"] == "ok"]
    keys = ["algorithm", "noise_std", "noise_level"] + (["s_used"] if by_factors else [])
    per_trial = ok.groupby(keys + ["trial"], sort=True)[["r", "rmse", "mae"]].mean().reset_index()
    summary = per_trial.groupby(keys, sort=True).agg(
        r_mean=("r", "mean"),
        r_std=("r", "std"),
        rmse_mean=("rmse", "mean"),
        rmse_std=("rmse", "std"),
        mae_mean=("mae", "mean"),
        mae_std=("mae", "std"),
        n_trials=("trial", "nunique"),
    )
    return summary.reset_index()


def write_benchmark_csv(result: pd.DataFrame, path: str | Path) -> Path:
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    result[COLUMNS].to_csv(
        out_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", na_rep="", encoding="utf-8"
    )
    logger.info("%s file has been saved (%d rows).", out_path, len(result))
    return out_path


def read_benchmark_csv(path: str | Path) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Benchmark file not found: {path}")
    df = pd.read_csv(path, dtype={"algorithm": str, "status": str, "s_used": "Int64"})
    if list(df.columns) != COLUMNS:
        raise SpecificationError(f"{path}: unexpected header {list(df.columns)}")
    return df
