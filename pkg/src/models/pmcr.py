# Partial maximum correntropy regression.
#
# Per factor: projectors start from the conventional PLSR solution, kernel
# bandwidths are estimated once from the PLSR-initialized errors and frozen,
# then a half-quadratic loop alternates closed-form auxiliary updates with a
# sphere-constrained quadratic ascent on the projectors until the correntropy
# objective stops changing. The regression step fits the input loading and
# the response loading by a correntropy fixed-point iteration, either with
# one shared set of observation weights ("shared") or block by block
# ("separate"), and the residuals are deflated as in PLSR.
from __future__ import annotations

import logging
import numbers
from dataclasses import asdict, dataclass
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp

from src.data.dataset import RegressionDataset
from src.errors import DegenerateError, DomainError, OptimizationError, SpecificationError
from src.models.correntropy import KernelBandwidths, gaussian_kernel, silverman_bandwidth
from src.models.factors import (
    FactorModel,
    LatentFactor,
    apply_sign_convention,
    assemble_coefficients,
)
from src.models.plsr import (
    RESIDUAL_RTOL,
    check_factor_count,
    deflate,
    plsr_factor,
    prepare,
    residual_exhausted,
)
from src.models.sphere import solve_sphere_quadratic

logger = logging.getLogger(__name__)

UNIT_NORM_TOL = 1e-8
VARSIGMA_PER_OBS = 1e-6
REGRESSION_MODES = ("shared", "separate")


def _coerce_bandwidths(value) -> KernelBandwidths | None:
    if value is None or isinstance(value, KernelBandwidths):
        return value
    if isinstance(value, Mapping):
        try:
            return KernelBandwidths(**value)
        except TypeError as e:
            raise SpecificationError(f"bandwidths: {e}") from e
    if isinstance(value, numbers.Real) and not isinstance(value, bool):
        return KernelBandwidths.uniform(float(value))
    raise SpecificationError(
        f"bandwidths must be a number, a mapping of sigma_* values or KernelBandwidths, got {type(value).__name__}"
    )


@dataclass(frozen=True)
class PmcrConfig:
    """Settings of one PMCR fit.

    `varsigma` is the absolute change of the correntropy projector objective
    below which the half-quadratic loop stops; None means 1e-6 * L.
    `bandwidths`, when given, replaces the per-factor Silverman estimates; a
    single number sets all five.
    `max_hq_iters = 0` keeps the PLSR projectors and only runs the
    correntropy regression step.
    `regression="shared"` weights each observation once for both loadings,
    so a noiseless linear relation between the residual blocks survives the
    reweighting; "separate" fits p and b independently with c kept.
    A fixed-point step whose kernel weights carry fewer effective
    observations than `min_effective_fraction * L` is not taken.
    """

    n_factors: int = 20
    varsigma: float | None = None
    max_hq_iters: int = 50
    max_fp_iters: int = 100
    fp_tol: float = 1e-8
    silverman_classic: bool = True
    regression: str = "shared"
    min_effective_fraction: float = 0.1
    bandwidths: KernelBandwidths | None = None
    center: bool = False
    seed: int = 0

    def __post_init__(self):
        if int(self.n_factors) != self.n_factors or self.n_factors < 1:
            raise SpecificationError(f"n_factors must be a positive integer, got {self.n_factors!r}")
        if self.varsigma is not None and not self.varsigma > 0:
            raise SpecificationError(f"varsigma must be positive, got {self.varsigma}")
        if self.max_hq_iters < 0:
            raise SpecificationError(f"max_hq_iters must be >= 0, got {self.max_hq_iters}")
        if self.max_fp_iters < 1:
            raise SpecificationError(f"max_fp_iters must be >= 1, got {self.max_fp_iters}")
        if not self.fp_tol > 0:
            raise SpecificationError(f"fp_tol must be positive, got {self.fp_tol}")
        if self.regression not in REGRESSION_MODES:
            raise SpecificationError(f"regression must be one of {REGRESSION_MODES}, got {self.regression!r}")
        if not 0.0 <= self.min_effective_fraction < 1.0:
            raise SpecificationError(
                f"min_effective_fraction must lie in [0, 1), got {self.min_effective_fraction}"
            )
        object.__setattr__(self, "bandwidths", _coerce_bandwidths(self.bandwidths))

    @classmethod
    def from_mapping(cls, cfg: Mapping[str, Any]) -> "PmcrConfig":
        keys = cls.__dataclass_fields__.keys()
        return cls(**{k: v for k, v in cfg.items() if k in keys})

    def as_dict(self) -> dict:
        out = asdict(self)
        out["bandwidths"] = self.bandwidths.as_dict() if self.bandwidths else None
        return out


@dataclass(frozen=True)
class HQState:
    """Half-quadratic auxiliaries for one expansion point (all in [-1, 0])."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    jp_value: float = float("nan")
    j_trace: tuple[float, ...] = ()


@dataclass(frozen=True)
class FactorDiagnostics:
    factor: int
    hq_iterations: int
    objective_trace: tuple[float, ...]
    bandwidths: dict[str, float]
    degenerate_bandwidths: tuple[str, ...]
    stalled: bool
    converged: bool
    loading_iterations: int
    scalar_iterations: int
    effective_obs: float = float("nan")
    weights_collapsed: bool = False

    def as_record(self) -> dict:
        return asdict(self)


class ProjectorStep(NamedTuple):
    w: np.ndarray
    c: np.ndarray
    stalled: bool
    jp_before: float
    jp_after: float


class FixedPointResult(NamedTuple):
    """Fitted value (blocks concatenated), accepted steps and the log-objective trace.

    `weights` are the kernel weights at the returned value, scaled so the
    largest is 1; `collapsed` marks a run stopped by the effective-sample check.
    """

    value: np.ndarray
    iterations: int
    log_objective_trace: tuple[float, ...]
    weights: np.ndarray
    effective_obs: float
    collapsed: bool = False
# --- projector objective -----------------------------------------------------


def _check_unit(v: np.ndarray, name: str) -> None:
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > UNIT_NORM_TOL:
        raise DomainError(f"projector {name} must have unit norm, got {norm:.12g}")


def _recon_error_sq(m: np.ndarray, proj: np.ndarray) -> np.ndarray:
    """Row-wise x x^T - x w w^T x^T, clamped at zero."""
    scores = m @ proj
    return np.maximum(0.0, np.einsum("ij,ij->i", m, m) - scores * scores)


def scalarized_recon_error(row, proj) -> float:
    """||x - x w w^T|| computed as sqrt(x x^T - (x w)^2) for unit w."""
    row = np.asarray(row, dtype=np.float64).ravel()
    proj = np.asarray(proj, dtype=np.float64).ravel()
    _check_unit(proj, "w")
    score = float(row @ proj)
    return float(np.sqrt(max(0.0, float(row @ row) - score * score)))


def projector_objective(x_s, y_s, w, c, bw: KernelBandwidths) -> float:
    """Correntropy projector objective; lies in (0, 3L]."""
    _check_unit(w, "w")
    _check_unit(c, "c")
    t = x_s @ w
    u = y_s @ c
    ex = _recon_error_sq(x_s, w)
    ey = _recon_error_sq(y_s, c)
    return float(
        np.sum(np.exp(-ex / (2.0 * bw.sigma_x**2)))
        + np.sum(np.exp(-ey / (2.0 * bw.sigma_y**2)))
        + np.sum(gaussian_kernel(t - u, bw.sigma_r))
    )


# --- half-quadratic steps ----------------------------------------------------


def _surrogate_coefficients(state: HQState, bw: KernelBandwidths):
    """Weights a, d, e of J_p = sum a (x w)^2 + d (y c)^2 + e (x w)(y c)."""
    half_r = state.gamma / (2.0 * bw.sigma_r**2)
    a = half_r - state.alpha / (2.0 * bw.sigma_x**2)
    d = half_r - state.beta / (2.0 * bw.sigma_y**2)
    e = -state.gamma / bw.sigma_r**2
    return a, d, e


def hq_objective(x_s, y_s, w, c, state: HQState, bw: KernelBandwidths) -> float:
    """Surrogate J_p at (w, c) for fixed auxiliaries."""
    a, d, e = _surrogate_coefficients(state, bw)
    t = x_s @ w
    u = y_s @ c
    return float(np.sum(a * t * t) + np.sum(d * u * u) + np.sum(e * t * u))


def hq_update_auxiliaries(x_s, y_s, w, c, bw: KernelBandwidths) -> HQState:
    """Closed-form auxiliaries at (w, c): minus the kernel of each error."""
    _check_unit(w, "w")
    _check_unit(c, "c")
    t = x_s @ w
    u = y_s @ c
    alpha = -np.exp(-_recon_error_sq(x_s, w) / (2.0 * bw.sigma_x**2))
    beta = -np.exp(-_recon_error_sq(y_s, c) / (2.0 * bw.sigma_y**2))
    gamma = -np.exp(-((t - u) ** 2) / (2.0 * bw.sigma_r**2))
    state = HQState(alpha=alpha, beta=beta, gamma=gamma)
    return HQState(
        alpha=alpha, beta=beta, gamma=gamma, jp_value=hq_objective(x_s, y_s, w, c, state, bw)
    )


def projector_step(
    x_s,
    y_s,
    w_k,
    c_k,
    state: HQState,
    bw: KernelBandwidths,
    factor: int | None = None,
    iteration: int | None = None,
) -> ProjectorStep:
    """Ascend J_p: maximize over w with c fixed, then over c with the new w.

    Each block is a quadratic on the unit sphere solved globally. The pair is
    accepted only if J_p did not decrease; otherwise (w_k, c_k) is returned
    with `stalled=True`.
    """
    a, d, e = _surrogate_coefficients(state, bw)
    if not (np.isfinite(a).all() and np.isfinite(d).all() and np.isfinite(e).all()):
        raise OptimizationError("non-finite surrogate coefficients", factor, iteration)

    jp_before = hq_objective(x_s, y_s, w_k, c_k, state, bw)

    q_w = (x_s.T * a) @ x_s
    g_w = x_s.T @ (e * (y_s @ c_k))
    w_next = solve_sphere_quadratic(q_w, g_w, w_ref=w_k)

    q_c = (y_s.T * d) @ y_s
    g_c = y_s.T @ (e * (x_s @ w_next))
    c_next = solve_sphere_quadratic(q_c, g_c, w_ref=c_k)

    jp_after = hq_objective(x_s, y_s, w_next, c_next, state, bw)
    if not (np.isfinite(jp_before) and np.isfinite(jp_after)):
        raise OptimizationError("non-finite half-quadratic surrogate", factor, iteration)
    if jp_after < jp_before:
        return ProjectorStep(w_k, c_k, True, jp_before, jp_before)
    return ProjectorStep(w_next, c_next, False, jp_before, jp_after)


# --- correntropy fixed-point regression ----------------------------------------


def effective_observations(weights) -> float:
    """(sum phi)^2 / sum phi^2: L for equal weights, 1 when one row holds all mass."""
    phi = np.asarray(weights, dtype=np.float64)
    total = float(phi.sum())
    return total * total / float(phi @ phi)


def _mcc_fixed_point(
    blocks: Sequence[tuple[np.ndarray, float]],
    t: np.ndarray,
    max_iters: int,
    tol: float,
    min_effective: float = 0.0,
) -> FixedPointResult:
    """Maximize sum_l exp(-sum_k ||target_kl - t_l v_k||^2 / 2 sigma_k^2) by reweighted LS.

    Each update solves the stationarity condition with the kernel weights of
    the current residuals: v_k = sum phi t target_k / sum phi t^2. Weights are
    shifted by the smallest exponent, which cancels in the ratio. A single
    block is the usual per-vector correntropy regression; several blocks
    share one weight per observation.
    """
    for _, sigma in blocks:
        if not sigma > 0:
            raise DomainError(f"kernel bandwidth must be positive, got {sigma}")
    tt = float(t @ t)
    if not tt > 0:
        raise DegenerateError("score vector is zero (t't = 0)")
    targets = [target for target, _ in blocks]
    scales = [2.0 * sigma * sigma for _, sigma in blocks]

    def exponents(values):
        z = np.zeros(t.size)
        for target, v, scale in zip(targets, values, scales):
            r = target - np.outer(t, v)
            z += np.einsum("ij,ij->i", r, r) / scale
        return z

    values = [target.T @ t / tt for target in targets]
    z = exponents(values)
    log_obj = float(logsumexp(-z))
    trace = [log_obj]
    iterations = 0
    collapsed = False
    for _ in range(max_iters):
        phi = np.exp(-(z - z.min()))
        if effective_observations(phi) < min_effective:
            collapsed = True
            break
        denom = float(phi @ (t * t))
        if not (denom > 0 and np.isfinite(denom)):
            raise DegenerateError("kernel weights vanish on every non-zero score (bandwidth too small)")
        new_values = [target.T @ (phi * t) / denom for target in targets]
        z_new = exponents(new_values)
        log_obj_new = float(logsumexp(-z_new))
        if log_obj_new < log_obj:
            break
        iterations += 1
        flat_new = np.concatenate(new_values)
        step = float(np.linalg.norm(flat_new - np.concatenate(values))) / max(1.0, float(np.linalg.norm(flat_new)))
        values, z, log_obj = new_values, z_new, log_obj_new
        trace.append(log_obj)
        if step < tol:
            break
    phi = np.exp(-(z - z.min()))
    return FixedPointResult(
        np.concatenate(values), iterations, tuple(trace), phi, effective_observations(phi), collapsed
    )


def _min_effective(cfg: PmcrConfig, n_obs: int) -> float:
    return cfg.min_effective_fraction * n_obs


def mcc_loading(x_s, t, sigma_p: float, cfg: PmcrConfig | None = None) -> FixedPointResult:
    cfg = cfg or PmcrConfig()
    x_s = np.asarray(x_s, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    return _mcc_fixed_point([(x_s, sigma_p)], t, cfg.max_fp_iters, cfg.fp_tol, _min_effective(cfg, t.size))


def mcc_scalar(u, t, sigma_b: float, cfg: PmcrConfig | None = None) -> FixedPointResult:
    cfg = cfg or PmcrConfig()
    u = np.asarray(u, dtype=np.float64).reshape(-1, 1)
    t = np.asarray(t, dtype=np.float64)
    res = _mcc_fixed_point([(u, sigma_b)], t, cfg.max_fp_iters, cfg.fp_tol, _min_effective(cfg, t.size))
    return res._replace(value=np.asarray(float(res.value[0])))


def mcc_shared_regression(
    x_s, y_s, t, sigma_p: float, sigma_b: float, cfg: PmcrConfig | None = None
) -> tuple[np.ndarray, np.ndarray, FixedPointResult]:
    """Input loading p and response loading q = b c under one weight per observation.

    The kernel of observation l is the product of its input and response
    residual kernels, so a row that is an outlier in X drops out of both
    fits together. Returns (p, q, fixed-point result).
    """
    cfg = cfg or PmcrConfig()
    x_s = np.asarray(x_s, dtype=np.float64)
    y_s = np.asarray(y_s, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    res = _mcc_fixed_point(
        [(x_s, sigma_p), (y_s, sigma_b)], t, cfg.max_fp_iters, cfg.fp_tol, _min_effective(cfg, t.size)
    )
    n = x_s.shape[1]
    return res.value[:n], res.value[n:], res


def fixed_point_loading(x_s, t, sigma_p: float, cfg: PmcrConfig | None = None) -> np.ndarray:
    """Correntropy loading vector p, started from the least-squares loading."""
    return mcc_loading(x_s, t, sigma_p, cfg).value


def fixed_point_scalar(u, t, sigma_b: float, cfg: PmcrConfig | None = None) -> float:
    """Correntropy regression scalar b, started from the least-squares scalar."""
    return float(mcc_scalar(u, t, sigma_b, cfg).value)


def loading_objective(x_s, t, p, sigma_p: float) -> float:
    r = np.asarray(x_s) - np.outer(t, p)
    return float(np.sum(gaussian_kernel(np.linalg.norm(r, axis=1), sigma_p)))


def scalar_objective(u, t, b: float, sigma_b: float) -> float:
    return float(np.sum(gaussian_kernel(np.asarray(u) - np.asarray(t) * b, sigma_b)))


# --- bandwidths and the factor loop -------------------------------------------


def _signed_image(errors) -> np.ndarray:
    # kernels are centered at zero error, so a magnitude e counts as +e and -e
    e = np.asarray(errors, dtype=np.float64).ravel()
    return np.concatenate([e, -e])


def compute_bandwidths(
    x_s, y_s, w, c, p_init, b_init, classic: bool = True
) -> KernelBandwidths:
    """Silverman bandwidths of the five error sets at the PLSR initialization.

    Vector errors enter as row norms. Every set is mirrored about zero
    before the rule is applied, so the spread measured is the spread around
    the kernel center rather than the spread of the magnitudes.
    """
    x_s = np.asarray(x_s, dtype=np.float64)
    y_s = np.asarray(y_s, dtype=np.float64)
    t = x_s @ w
    u = y_s @ c
    error_sets = {
        "sigma_x": np.sqrt(_recon_error_sq(x_s, w)),
        "sigma_y": np.sqrt(_recon_error_sq(y_s, c)),
        "sigma_r": t - u,
        "sigma_p": np.linalg.norm(x_s - np.outer(t, p_init), axis=1),
        "sigma_b": np.linalg.norm(y_s - b_init * np.outer(t, c), axis=1),
    }
    sigmas, degenerate = {}, []
    for name, errors in error_sets.items():
        est = silverman_bandwidth(_signed_image(errors), classic=classic)
        sigmas[name] = est.sigma
        if est.degenerate:
            degenerate.append(name)
    if degenerate:
        logger.warning("Zero error spread, bandwidth floored for %s", ", ".join(degenerate))
    return KernelBandwidths(**sigmas, degenerate=frozenset(degenerate))


def _fit_projectors(x_s, y_s, w, c, bw: KernelBandwidths, cfg: PmcrConfig, varsigma: float, factor: int):
    """Half-quadratic loop. Returns (w, c, objective trace, iterations, stalled, converged)."""
    j = projector_objective(x_s, y_s, w, c, bw)
    trace = [j]
    stalled = converged = False
    iterations = 0
    for it in range(1, cfg.max_hq_iters + 1):
        state = hq_update_auxiliaries(x_s, y_s, w, c, bw)
        step = projector_step(x_s, y_s, w, c, state, bw, factor=factor, iteration=it)
        if step.stalled:
            stalled = True
            logger.debug("Factor %d: projector step stalled at HQ iteration %d", factor, it)
            break
        w, c = step.w, step.c
        iterations = it
        j_new = projector_objective(x_s, y_s, w, c, bw)
        if not np.isfinite(j_new):
            raise OptimizationError("non-finite projector objective", factor, it)
        trace.append(j_new)
        logger.debug("Factor %d HQ iteration %d: objective %.12g (change %.3g)", factor, it, j_new, j_new - j)
        if abs(j_new - j) < varsigma:
            converged = True
            break
        j = j_new
    return w, c, tuple(trace), iterations, stalled, converged


def _regress(x_s, y_s, t, c, bw: KernelBandwidths, cfg: PmcrConfig):
    """(p, b, c, loading result, scalar result) of one factor."""
    if cfg.regression == "separate":
        p_fit = mcc_loading(x_s, t, bw.sigma_p, cfg)
        b_fit = mcc_scalar(y_s @ c, t, bw.sigma_b, cfg)
        return p_fit.value, float(b_fit.value), c, p_fit, b_fit
    p, q, fit = mcc_shared_regression(x_s, y_s, t, bw.sigma_p, bw.sigma_b, cfg)
    b = float(np.linalg.norm(q))
    # the response projector is realigned with the fitted loading; b t c^T = t q^T
    if b > 0:
        c = q / b
    return p, b, c, fit, fit


def _weighted_exhausted(weights, x_s, x_row_sq0) -> bool:
    """True when the rows that carry kernel weight have no input residual left."""
    left = float(weights @ np.einsum("ij,ij->i", x_s, x_s))
    return left <= RESIDUAL_RTOL**2 * float(weights @ x_row_sq0)


def pmcr_fit(data: RegressionDataset, cfg: PmcrConfig) -> FactorModel:
    """Fit PMCR with up to `cfg.n_factors` factors."""
    check_factor_count(cfg.n_factors, data)
    x_s, y_s, x_mean, y_mean = prepare(data, cfg.center)
    x_norm0, y_norm0 = np.linalg.norm(x_s), np.linalg.norm(y_s)
    x_row_sq0 = np.einsum("ij,ij->i", x_s, x_s)
    varsigma = cfg.varsigma if cfg.varsigma is not None else VARSIGMA_PER_OBS * data.n_obs

    factors: list[LatentFactor] = []
    diagnostics: list[FactorDiagnostics] = []
    stopped_early = False
    for k in range(1, cfg.n_factors + 1):
        if residual_exhausted(x_s, y_s, x_norm0, y_norm0):
            stopped_early = True
            break
        try:
            init = plsr_factor(x_s, y_s)
        except DegenerateError as e:
            logger.debug("Factor %d degenerate: %s", k, e)
            stopped_early = True
            break

        if cfg.bandwidths is not None:
            bw = cfg.bandwidths
        else:
            bw = compute_bandwidths(
                x_s, y_s, init.w, init.c, init.p, init.b, classic=cfg.silverman_classic
            )

        w, c, trace, n_iter, stalled, converged = _fit_projectors(
            x_s, y_s, init.w, init.c, bw, cfg, varsigma, factor=k
        )
        w, c, _ = apply_sign_convention(w, c)
        t = x_s @ w
        if not float(t @ t) > 0:
            stopped_early = True
            break
        try:
            p, b, c, p_fit, b_fit = _regress(x_s, y_s, t, c, bw, cfg)
        except (DegenerateError, DomainError) as e:
            raise OptimizationError(f"fixed-point regression failed: {e}", k, n_iter) from e
        if _weighted_exhausted(p_fit.weights, x_s, x_row_sq0):
            logger.debug("Factor %d: no input residual left on the weighted observations", k)
            stopped_early = True
            break
        if p_fit.collapsed or b_fit.collapsed:
            logger.debug("Factor %d: kernel weights collapsed, least-squares regression kept", k)

        factor = LatentFactor(w=w, c=c, t=t, u=y_s @ c, p=p, b=b)
        factors.append(factor)
        diagnostics.append(
            FactorDiagnostics(
                factor=k,
                hq_iterations=n_iter,
                objective_trace=trace,
                bandwidths=bw.as_dict(),
                degenerate_bandwidths=tuple(sorted(bw.degenerate)),
                stalled=stalled,
                converged=converged,
                loading_iterations=p_fit.iterations,
                scalar_iterations=b_fit.iterations,
                effective_obs=p_fit.effective_obs,
                weights_collapsed=p_fit.collapsed or b_fit.collapsed,
            )
        )
        logger.debug(
            "Factor %d: %d HQ iteration(s), objective %.6g -> %.6g%s, %.1f effective observation(s)",
            k, n_iter, trace[0], trace[-1], " (stalled)" if stalled else "", p_fit.effective_obs,
        )
        x_s, y_s = deflate(x_s, y_s, factor)

    if stopped_early:
        logger.info("PMCR stopped with %d of %d factors: residual is numerically zero", len(factors), cfg.n_factors)

    h = assemble_coefficients(factors, data.n_inputs, data.n_outputs)
    return FactorModel(
        algorithm="pmcr",
        factors=tuple(factors),
        h=h,
        n_inputs=data.n_inputs,
        n_outputs=data.n_outputs,
        n_requested=int(cfg.n_factors),
        stopped_early=stopped_early,
        x_mean=x_mean,
        y_mean=y_mean,
        diagnostics=tuple(diagnostics),
        config=cfg.as_dict(),
    )
