# robustpls command line: synth → contaminate → fit → predict → eval, plus the bench / sweep-factors grids.
#
# Usage: python -m scripts.robustpls [--config FILE] [--log-level LEVEL] <command> [flags]
# Exit codes: 0 success, 1 fit or benchmark failure, 2 usage or validation error.

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from src import __version__
from src.data.dataset import ContaminationSpec, RegressionDataset, SyntheticSpec
from src.data.io_utils import save_matrix, write_json, write_jsonl
from src.data.load import load_matrix
from src.data.synthetic import contaminate, generate_synthetic
from src.errors import DomainError, RobustPLSError, SpecificationError
from src.evaluation.benchmark import (
    PRESETS,
    BenchmarkConfig,
    SweepConfig,
    factor_sweep,
    run_benchmark,
    summarize,
    write_benchmark_csv,
)
from src.features.contributions import contribution_weights, pattern_shift
from src.models.factors import predict
from src.models.plsr import plsr_fit
from src.models.pmcr import PmcrConfig, pmcr_fit
from src.models.registry import load_model, save_model
from src.models.selection import select_num_factors
from src.utils.config import apply_overrides, load_config
from src.utils.metrics import evaluate_all

logger = logging.getLogger("robustpls")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


# --- flag parsing helpers ------------------------------------------------------


def parse_grid(text: str) -> list[float]:
    """'start:stop:step' (stop included) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise SpecificationError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if not step > 0 or stop < start:
            raise SpecificationError(f"invalid grid {text!r}")
        n = int(round((stop - start) / step))
        return [round(start + i * step, 10) for i in range(n + 1)]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise SpecificationError(f"not a list of numbers: {text!r}") from None


def parse_int_grid(text: str) -> list[int]:
    """'start:stop[:step]' (stop included) or a comma-separated list of integers."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise SpecificationError(f"range must be start:stop[:step], got {text!r}")
            step = parts[2] if len(parts) == 3 else 1
            return list(range(parts[0], parts[1] + 1, step))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise SpecificationError(f"not a list of integers: {text!r}") from None


def parse_factors(text: str) -> int | str:
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise SpecificationError(f"--factors must be an integer or 'auto', got {text!r}") from None


def parse_axis_sizes(text: str) -> tuple[int, int, int]:
    """'channels,frequencies,lags' as three positive integers."""
    try:
        sizes = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise SpecificationError(f"--axis-sizes must be three integers, got {text!r}") from None
    if len(sizes) != 3 or min(sizes) < 1:
        raise SpecificationError(f"--axis-sizes must be three positive integers, got {text!r}")
    return sizes


def _names(text: str | None) -> list[str] | None:
    return None if text is None else [v.strip() for v in text.split(",") if v.strip()]


def _metadata(command: str, cfg: dict, **extra: Any) -> dict:
    return {"command": command, "version": __version__, "config": cfg, **extra}


def _meta_path(path: Path) -> Path:
    return path.with_name(path.stem + ".meta.json")


# --- commands --------------------------------------------------------------------


def cmd_synth(args, cfg: dict) -> int:
    cfg = apply_overrides(
        cfg,
        {
            "synthetic.train_count": args.train,
            "synthetic.test_count": args.test,
            "synthetic.latent_dim": args.latent,
            "synthetic.x_dim": args.xdim,
            "synthetic.y_dim": args.ydim,
            "synthetic.transform_seed": args.transform_seed,
        },
    )
    spec = SyntheticSpec.from_mapping({**cfg["synthetic"], "seed": cfg["seed"]})
    train, test = generate_synthetic(spec)

    out = Path(args.out)
    save_matrix(train.x, out / "train_x.csv")
    save_matrix(train.y, out / "train_y.csv")
    save_matrix(test.x, out / "test_x.csv")
    save_matrix(test.y, out / "test_y.csv")
    write_json(_metadata("synth", cfg, spec=spec.__dict__), out / "meta.json")
    print(f"[RESULT] synthetic data ({spec.train_count}/{spec.test_count} x {spec.x_dim}->{spec.y_dim}) written to {out}")
    return 0


def cmd_contaminate(args, cfg: dict) -> int:
    cfg = apply_overrides(
        cfg,
        {
            "contamination.level": args.level,
            "contamination.noise_std": args.std,
            "contamination.relative": True if args.relative else None,
        },
    )
    spec = ContaminationSpec.from_mapping({**cfg["contamination"], "seed": cfg["seed"]})
    x = load_matrix(args.input)
    x_bad, rows = contaminate(x, spec)

    out = Path(args.out)
    save_matrix(x_bad, out)
    write_json(_metadata("contaminate", cfg, input=args.input, rows=rows), _meta_path(out))
    print(f"[RESULT] {len(rows)} of {x.shape[0]} rows contaminated → {out}")
    return 0


def cmd_fit(args, cfg: dict) -> int:
    cfg = apply_overrides(
        cfg,
        {
            "selection.s_max": args.s_max,
            "selection.folds": args.folds,
            "pmcr.max_hq_iters": args.max_hq_iters,
            "pmcr.varsigma": args.varsigma,
            "pmcr.bandwidths": args.bandwidth,
            "pmcr.center": True if args.center else None,
        },
    )
    data = RegressionDataset(x=load_matrix(args.x), y=load_matrix(args.y))
    if args.reference_model and not args.axis_sizes:
        raise SpecificationError("--reference-model needs --axis-sizes")
    sizes = parse_axis_sizes(args.axis_sizes) if args.axis_sizes else None
    if sizes is not None and sizes[0] * sizes[1] * sizes[2] != data.n_inputs:
        raise SpecificationError(f"--axis-sizes {args.axis_sizes} does not match the {data.n_inputs} input columns")

    factors = parse_factors(args.factors)
    if factors == "auto":
        s_used = select_num_factors(
            data, cfg["selection"]["s_max"], folds=cfg["selection"]["folds"], seed=cfg["seed"]
        )
    else:
        s_used = factors

    if args.algo == "plsr":
        model = plsr_fit(data, s_used, center=bool(cfg["pmcr"].get("center", False)))
    else:
        model = pmcr_fit(data, PmcrConfig.from_mapping({**cfg["pmcr"], "n_factors": s_used, "seed": cfg["seed"]}))

    run = _metadata("fit", cfg, algorithm=args.algo, factors=args.factors, s_used=s_used, x=args.x, y=args.y)
    if sizes is not None:
        weights = contribution_weights(model.h, sizes)
        run["contributions"] = weights.as_dict()
        if args.reference_model:
            reference = contribution_weights(load_model(args.reference_model).h, sizes)
            run["reference_model"] = args.reference_model
            run["pattern_shift"] = pattern_shift(reference, weights)
            logger.info("Contribution pattern shift against %s: %s", args.reference_model, run["pattern_shift"])
    save_model(model, args.out, config=run)
    if args.diagnostics:
        write_jsonl((d.as_record() for d in model.diagnostics), args.diagnostics)
    print(f"[RESULT] {args.algo} model with {model.n_factors} factor(s) (requested {s_used}) → {args.out}")
    return 0


def cmd_predict(args, cfg: dict) -> int:
    model = load_model(args.model)
    yhat = predict(model, load_matrix(args.x))
    out = Path(args.out)
    save_matrix(yhat, out)
    write_json(_metadata("predict", cfg, model=args.model, x=args.x, shape=list(yhat.shape)), _meta_path(out))
    print(f"[RESULT] predictions {yhat.shape[0]} x {yhat.shape[1]} → {args.out}")
    return 0


def cmd_eval(args, cfg: dict) -> int:
    yhat = load_matrix(args.pred)
    y = load_matrix(args.y)
    metrics = evaluate_all(yhat, y, mae_l1=args.mae_l1)
    write_json(_metadata("eval", cfg, prediction=args.pred, target=args.y, metrics=metrics), args.out)
    shown = {k: (round(v, 6) if isinstance(v, float) else v) for k, v in metrics.items() if k.startswith("mean")}
    print("[RESULT] metrics:", shown)
    return 0


def _finish_grid(df, summary, out: Path, meta: dict) -> int:
    write_benchmark_csv(df, out)
    write_json(meta, _meta_path(out))
    print("[RESULT] summary:\n" + summary.to_string(index=False))
    n_ok = int((df["status"] == "ok").sum())
    if n_ok == 0:
        logger.error("Every benchmark row failed")
        return 1
    return 0


def cmd_bench(args, cfg: dict) -> int:
    if args.preset:
        cfg = apply_overrides(cfg, {"benchmark.preset": args.preset})
    preset = cfg["benchmark"].get("preset")
    if preset is not None:
        # expand into explicit keys so the echoed config is self-contained
        if preset not in PRESETS:
            raise SpecificationError(f"unknown preset '{preset}', expected one of {sorted(PRESETS)}")
        cfg = apply_overrides(cfg, {f"benchmark.{k}": v for k, v in PRESETS[preset].items()})
        cfg["benchmark"].pop("preset")
    # explicit grid flags win over a preset
    cfg = apply_overrides(
        cfg,
        {
            "benchmark.levels": parse_grid(args.levels) if args.levels else None,
            "benchmark.stds": parse_grid(args.stds) if args.stds else None,
            "benchmark.trials": args.trials,
            "benchmark.algorithms": _names(args.algos),
            "benchmark.jobs": args.jobs,
            "benchmark.factors": parse_factors(args.factors) if args.factors else None,
            "benchmark.redraw_transforms": False if args.reuse_transforms else None,
            "contamination.relative": True if args.relative else None,
        },
    )
    bench_cfg = BenchmarkConfig.from_config(cfg)
    df = run_benchmark(bench_cfg)
    return _finish_grid(df, summarize(df), Path(args.out), _metadata("bench", cfg))


def cmd_sweep(args, cfg: dict) -> int:
    cfg = apply_overrides(
        cfg,
        {
            "sweep.level": args.level,
            "sweep.noise_std": args.std,
            "sweep.s_values": parse_int_grid(args.s_range) if args.s_range else None,
            "sweep.trials": args.trials,
            "sweep.algorithms": _names(args.algos),
            "sweep.jobs": args.jobs,
            "contamination.relative": True if args.relative else None,
        },
    )
    sweep_cfg = SweepConfig.from_config(cfg)
    df = factor_sweep(sweep_cfg)
    return _finish_grid(
        df, summarize(df, by_factors=True), Path(args.out), _metadata("sweep-factors", cfg)
    )


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robustpls", description="PLSR / PMCR robust regression toolkit")
    ap.add_argument("--config", default=None, help="YAML run configuration")
    ap.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ...")
    ap.add_argument("--seed", type=int, default=None, help="master seed (overrides ROBUSTPLS_SEED)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic benchmark data")
    p.add_argument("--out", default="data/synthetic")
    p.add_argument("--train", type=int)
    p.add_argument("--test", type=int)
    p.add_argument("--latent", type=int)
    p.add_argument("--xdim", type=int)
    p.add_argument("--ydim", type=int)
    p.add_argument("--transform-seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("contaminate", help="replace a fraction of rows by Gaussian noise")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--level", type=float)
    p.add_argument("--std", type=float)
    p.add_argument("--relative", action="store_true", help="std relative to each column's std")
    p.set_defaults(func=cmd_contaminate)

    p = sub.add_parser("fit", help="fit a PLSR or PMCR model")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--algo", choices=["plsr", "pmcr"], default="pmcr")
    p.add_argument("--factors", default="auto", help="integer or 'auto' (PLSR cross-validation)")
    p.add_argument("--out", default="models/model.json")
    p.add_argument("--diagnostics", default=None, help="write per-factor PMCR diagnostics (JSON lines)")
    p.add_argument("--s-max", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--max-hq-iters", type=int)
    p.add_argument("--varsigma", type=float)
    p.add_argument("--bandwidth", type=float, help="use this bandwidth for all five kernels")
    p.add_argument("--center", action="store_true")
    p.add_argument("--axis-sizes", help="ch,freq,lag: record contribution weights of the fitted coefficients")
    p.add_argument("--reference-model", help="saved model to compare contribution weights against")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict responses with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="score predictions against targets")
    p.add_argument("--pred", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--out", default="metrics.json")
    p.add_argument("--mae-l1", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="contamination benchmark over noise levels and stds")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--levels", help="start:stop:step or comma list")
    p.add_argument("--stds", help="comma list")
    p.add_argument("--trials", type=int)
    p.add_argument("--algos", help="comma list of plsr,pmcr")
    p.add_argument("--factors", help="integer or 'auto'")
    p.add_argument("--jobs", type=int)
    p.add_argument("--reuse-transforms", action="store_true")
    p.add_argument("--relative", action="store_true")
    p.add_argument("--out", default="results/benchmark.csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep-factors", help="test metrics versus number of factors")
    p.add_argument("--level", type=float)
    p.add_argument("--std", type=float)
    p.add_argument("--s-range", help="start:stop[:step] or comma list")
    p.add_argument("--trials", type=int)
    p.add_argument("--algos")
    p.add_argument("--jobs", type=int)
    p.add_argument("--relative", action="store_true")
    p.add_argument("--out", default="results/factor_sweep.csv")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, {"seed": args.seed, "logging.level": args.log_level})
        logging.basicConfig(level=str(cfg["logging"]["level"]).upper(), format=LOG_FORMAT, force=True)
        return args.func(args, cfg)
    except (SpecificationError, DomainError, FileNotFoundError) as e:
        logger.error("%s", e)
        print(f"[ERROR] {e}", file=sys.stderr)
        return 2
    except RobustPLSError as e:
        logger.error("%s", e)
        print(f"[ERROR] {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
