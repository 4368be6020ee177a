import numpy as np
import pandas as pd
import pytest

import src.evaluation.benchmark as benchmark
from src.data.dataset import SyntheticSpec
from src.errors import DegenerateError, SpecificationError
from src.evaluation.benchmark import (
    COLUMNS,
    PRESETS,
    BenchmarkConfig,
    SweepConfig,
    factor_sweep,
    read_benchmark_csv,
    run_benchmark,
    summarize,
    trial_datasets,
    write_benchmark_csv,
)
from src.utils.config import DEFAULTS, apply_overrides

TINY = SyntheticSpec(train_count=40, test_count=20, latent_dim=3, x_dim=10, y_dim=2)


@pytest.fixture
def tiny_config():
    return BenchmarkConfig(
        levels=(0.0, 0.5),
        stds=(10.0,),
        trials=2,
        synthetic=TINY,
        factors=3,
        seed=4,
        pmcr={"max_hq_iters": 5},
    )


def test_result_rows_and_order(tiny_config):
    df = run_benchmark(tiny_config)
    assert list(df.columns) == COLUMNS
    # 2 algorithms x 2 levels x 1 std x 2 trials x 2 axes
    assert len(df) == 16
    assert (df["status"] == "ok").all()
    assert (df["s_used"] == 3).all()
    assert (df["seed"] == 4).all()

    first = df.iloc[:4]
    assert list(first["algorithm"]) == ["plsr", "plsr", "pmcr", "pmcr"]
    assert list(first["axis"]) == [0, 1, 0, 1]
    assert df["noise_level"].is_monotonic_increasing


def test_plsr_is_exact_on_clean_cells(tiny_config):
    df = run_benchmark(tiny_config)
    clean = df[(df["algorithm"] == "plsr") & (df["noise_level"] == 0.0)]
    assert (clean["rmse"] < 1e-6).all()
    assert (clean["r"] > 1 - 1e-9).all()


def test_job_count_does_not_change_results(tiny_config):
    one = run_benchmark(tiny_config)
    two = run_benchmark(BenchmarkConfig(**{**tiny_config.__dict__, "jobs": 2}))
    pd.testing.assert_frame_equal(one, two)


def test_trial_data_is_shared_across_levels():
    a_train, a_test = trial_datasets(TINY, seed=1, trial=0)
    b_train, _ = trial_datasets(TINY, seed=1, trial=0)
    c_train, _ = trial_datasets(TINY, seed=1, trial=1)
    assert np.array_equal(a_train.x, b_train.x)
    assert not np.array_equal(a_train.x, c_train.x)
    assert a_test.n_obs == 20


def test_fixed_transforms_across_trials():
    a, _ = trial_datasets(TINY, seed=1, trial=0, redraw_transforms=False)
    b, _ = trial_datasets(TINY, seed=1, trial=1, redraw_transforms=False)
    # same transforms, different latents: the row spaces coincide
    stacked = np.vstack([a.x, b.x])
    assert np.linalg.matrix_rank(stacked, tol=1e-8) == TINY.latent_dim


def test_failed_fit_becomes_error_rows(tiny_config, monkeypatch):
    real_fit = benchmark.fit_algorithm

    def flaky_fit(name, data, n_factors, pmcr):
        if name == "pmcr":
            raise DegenerateError("boom")
        return real_fit(name, data, n_factors, pmcr)

    monkeypatch.setattr(benchmark, "fit_algorithm", flaky_fit)
    df = run_benchmark(tiny_config)
    failed = df[df["algorithm"] == "pmcr"]
    assert (failed["status"] == "error:DegenerateError").all()
    assert failed["rmse"].isna().all()
    assert (df.loc[df["algorithm"] == "plsr", "status"] == "ok").all()

    summary = summarize(df)
    assert set(summary["algorithm"]) == {"plsr"}


def test_auto_factor_selection(tiny_config):
    cfg = BenchmarkConfig(**{**tiny_config.__dict__, "factors": "auto", "s_max": 6, "algorithms": ("plsr",)})
    df = run_benchmark(cfg)
    assert df["s_used"].between(1, 6).all()
    clean = df[df["noise_level"] == 0.0]
    assert (clean["s_used"] == 3).all()


def test_summarize(tiny_config):
    summary = summarize(run_benchmark(tiny_config))
    assert len(summary) == 4
    assert (summary["n_trials"] == 2).all()
    assert {"r_mean", "rmse_std", "mae_mean"} <= set(summary.columns)


def test_csv_round_trip(tmp_path, tiny_config):
    df = run_benchmark(tiny_config)
    path = write_benchmark_csv(df, tmp_path / "out" / "bench.csv")
    assert path.read_text().splitlines()[0] == ",".join(COLUMNS)

    back = read_benchmark_csv(path)
    assert len(back) == len(df)
    assert np.allclose(back["rmse"], df["rmse"], rtol=1e-9)

    path.write_text("a,b\n1,2\n")
    with pytest.raises(SpecificationError):
        read_benchmark_csv(path)
    with pytest.raises(FileNotFoundError):
        read_benchmark_csv(tmp_path / "nope.csv")


def test_factor_sweep():
    cfg = SweepConfig(level=0.2, noise_std=10.0, s_values=(3, 1), trials=2, synthetic=TINY, pmcr={"max_hq_iters": 3})
    assert cfg.s_values == (1, 3)
    df = factor_sweep(cfg)
    assert len(df) == 2 * 2 * 2 * 2
    assert set(df["s_used"]) == {1, 3}
    summary = summarize(df, by_factors=True)
    assert len(summary) == 4


def test_sweep_single_factor_matches_benchmark_fit():
    sweep = factor_sweep(
        SweepConfig(level=0.0, noise_std=1.0, s_values=(1,), trials=1, synthetic=TINY, algorithms=("plsr",))
    )
    bench = run_benchmark(
        BenchmarkConfig(levels=(0.0,), stds=(1.0,), trials=1, synthetic=TINY, factors=1, algorithms=("plsr",))
    )
    assert np.allclose(sweep["rmse"], bench["rmse"], rtol=1e-12)


def test_presets_and_config():
    cfg = apply_overrides(DEFAULTS, {"benchmark.preset": "full", "seed": 9})
    bench = BenchmarkConfig.from_config(cfg)
    assert len(bench.levels) == 21 and bench.levels[-1] == 1.0
    assert bench.stds == (30.0, 100.0, 300.0)
    assert bench.trials == 100
    assert bench.seed == 9 and bench.synthetic.seed == 9
    assert PRESETS["quick"]["trials"] == 20

    with pytest.raises(SpecificationError, match="preset"):
        BenchmarkConfig.from_config(apply_overrides(DEFAULTS, {"benchmark.preset": "huge"}))


@pytest.mark.parametrize(
    "params",
    [
        {"levels": (1.5,)},
        {"stds": (0.0,)},
        {"trials": 0},
        {"algorithms": ("ridge",)},
        {"factors": 500, "synthetic": TINY},
        {"jobs": 0},
    ],
)
def test_benchmark_config_validation(params):
    with pytest.raises(SpecificationError):
        BenchmarkConfig(**params)


def test_sweep_config_validation():
    with pytest.raises(SpecificationError):
        SweepConfig(s_values=(0, 2), synthetic=TINY)
    with pytest.raises(SpecificationError):
        SweepConfig(s_values=(11,), synthetic=TINY)


def _assert_pmcr_ahead(summary: pd.DataFrame) -> None:
    table = summary.set_index(["noise_std", "noise_level", "algorithm"])
    for (std, level), _ in summary.groupby(["noise_std", "noise_level"]):
        pmcr, plsr = table.loc[(std, level, "pmcr")], table.loc[(std, level, "plsr")]
        assert pmcr["rmse_mean"] < plsr["rmse_mean"], (std, level)
        assert pmcr["mae_mean"] < plsr["mae_mean"], (std, level)
        assert pmcr["r_mean"] > plsr["r_mean"], (std, level)


@pytest.mark.slow
def test_pmcr_ahead_of_plsr_on_quick_preset():
    cfg = BenchmarkConfig(levels=(0.2, 0.5, 0.8), stds=(100.0,), trials=PRESETS["quick"]["trials"], jobs=-1)
    df = run_benchmark(cfg)
    assert (df["status"] == "ok").all()
    # one cross-validated factor count per cell, shared by both algorithms
    per_cell = df.groupby(["noise_level", "trial"])["s_used"].nunique()
    assert (per_cell == 1).all()
    _assert_pmcr_ahead(summarize(df))


@pytest.mark.slow
def test_pmcr_ahead_of_plsr_across_noise_stds():
    df = run_benchmark(BenchmarkConfig(levels=(0.5,), stds=(30.0, 300.0), trials=10, jobs=-1))
    assert (df["status"] == "ok").all()
    summary = summarize(df)
    assert set(summary["noise_std"]) == {30.0, 300.0}
    _assert_pmcr_ahead(summary)


@pytest.mark.slow
def test_factor_sweep_shape():
    df = factor_sweep(SweepConfig(level=0.5, noise_std=100.0, s_values=range(1, 101), trials=10, jobs=-1))
    assert (df["status"] == "ok").all()
    per_trial = df.groupby(["algorithm", "s_used", "trial"])["rmse"].mean()

    pmcr = per_trial.loc["pmcr"].groupby(level="s_used").mean()
    best = pmcr.min()
    # rounding-level errors are treated as reaching the optimum
    assert (pmcr.loc[:20] <= max(1.05 * best, 1e-6)).any()

    plsr = per_trial.loc["plsr"].unstack("s_used")
    above_best = plsr[20] > 1.05 * plsr.min(axis=1)
    assert above_best.sum() > len(plsr) / 2
