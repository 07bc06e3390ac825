"""Parametric bootstrap over a fitted model.

Replicates keep the design matrix fixed and regenerate the response from
the fitted probabilities, refit with the original estimate as warm start,
and record both the coefficient vector and the centered, studentized
statistic (beta_b - beta_hat) / se_b. Aggregation is strictly by
replicate index, so results are independent of worker count and
scheduling.

Seeding: replicate b draws from numpy's PCG64 seeded with
SeedSequence((seed, b)). The split is order-independent and documented;
the same (seed, b) always regenerates the same replicate.

Failed refits (separation, non-convergence, degenerate resampled
response) are counted and skipped, never redrawn: redrawing until success
would bias the replicate distribution.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .data import Dataset
from .errors import (
    ConvergenceError,
    InsufficientReplicatesError,
    SeparationError,
    UnreliableRunError,
    ValidationError,
)
from .fit import fit_mle

# Runs keeping fewer than this fraction of requested replicates are
# flagged unreliable.
RELIABLE_FRACTION = 0.8

DEFAULT_B = 1000
DEFAULT_SEED = 20240101


@dataclass(frozen=True)
class ReplicateMatrix:
    """Per-replicate coefficient estimates and studentized statistics.

    Rows are ordered by replicate index; failed replicates are dropped
    (and counted), so both matrices have B_effective rows.
    """

    values: np.ndarray
    t_stats: np.ndarray
    B_requested: int
    failed: int

    @property
    def B_effective(self):
        return self.values.shape[0]

    @property
    def reliable(self):
        return self.B_effective >= RELIABLE_FRACTION * self.B_requested


@dataclass(frozen=True)
class BootstrapResult:
    """Replicate matrix plus the derived mean, SE, intervals and p-values."""

    replicates: ReplicateMatrix
    mean: np.ndarray
    se: np.ndarray
    ci: np.ndarray
    p_values: np.ndarray
    seed: int
    alpha: float


def _replicate_rng(seed, b):
    return np.random.default_rng(np.random.SeedSequence((seed, b)))


def _check_seed(seed):
    s = int(seed)
    if s < 0:
        raise ValidationError("seed must be a non-negative integer")
    return s


def parametric_resample(fit, design, replicate_seed):
    """One resampled dataset: X unchanged, Y_i ~ Bernoulli(pi_hat_i).

    ``replicate_seed`` may be an int or anything numpy accepts as seed
    material; the same seed always yields the same dataset.
    """
    if not fit.converged:
        raise ConvergenceError("resampling requires a converged fit")
    probs = kernels.response_prob(design.X @ fit.beta, fit.tau.value)
    rng = np.random.default_rng(replicate_seed)
    y = (rng.random(design.n_obs) < probs).astype(np.int64)
    return design.with_response(y)


def bootstrap_mean_se(reps):
    """Replicate mean and sample standard error per coefficient."""
    if reps.B_effective < 2:
        raise InsufficientReplicatesError(
            f"need at least 2 successful replicates, have {reps.B_effective}"
        )
    mean = reps.values.mean(axis=0)
    se = reps.values.std(axis=0, ddof=1)
    return mean, se


def percentile_ci(reps, alpha):
    """Order-statistic percentile interval per coefficient.

    Bounds are the order statistics at ranks ceil((alpha/2)*B) and
    ceil((1-alpha/2)*B) (1-based, no interpolation), which are exactly
    reproducible across implementations.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must lie in (0, 1)")
    B = reps.B_effective
    needed = math.ceil(2.0 / alpha)
    if B < needed:
        raise InsufficientReplicatesError(
            f"percentile interval at alpha={alpha} needs {needed} replicates, have {B}"
        )
    lo_rank = max(math.ceil(alpha / 2.0 * B), 1)
    hi_rank = math.ceil((1.0 - alpha / 2.0) * B)
    ordered = np.sort(reps.values, axis=0)
    ci = np.stack([ordered[lo_rank - 1, :], ordered[hi_rank - 1, :]], axis=1)
    return ci


def _exceedance_pvalues(t_stats, t_obs):
    exceed = np.abs(t_stats) > np.abs(t_obs)[None, :]
    return exceed.sum(axis=0) / t_stats.shape[0]


# One payload per worker process; populated by the pool initializer (or
# directly for in-process runs).
_PAYLOAD = None


@dataclass(frozen=True)
class _ReplicatePayload:
    X: np.ndarray
    probs: np.ndarray
    beta_hat: np.ndarray
    tau: object
    column_names: tuple
    has_intercept: bool
    seed: int
    max_iter: int
    grad_tol: float
    step_tol: float


def _init_pool(payload):
    global _PAYLOAD
    _PAYLOAD = payload


def _run_one(payload, b):
    rng = _replicate_rng(payload.seed, b)
    y = (rng.random(payload.X.shape[0]) < payload.probs).astype(np.int64)
    try:
        data = Dataset(
            y=y,
            X=payload.X,
            column_names=payload.column_names,
            has_intercept=payload.has_intercept,
        )
        refit = fit_mle(
            data,
            tau=payload.tau,
            start_beta=payload.beta_hat,
            max_iter=payload.max_iter,
            grad_tol=payload.grad_tol,
            step_tol=payload.step_tol,
            check_rank=False,
        )
    except (ValidationError, SeparationError, ConvergenceError):
        return b, None, None
    if not refit.converged:
        return b, None, None
    t_row = (refit.beta - payload.beta_hat) / refit.se
    if not (np.all(np.isfinite(refit.beta)) and np.all(np.isfinite(t_row))):
        return b, None, None
    return b, refit.beta, t_row


def _pool_task(b):
    return _run_one(_PAYLOAD, b)


def _run_replicates(data, fit, B, seed, workers, max_iter, grad_tol, step_tol):
    if not fit.converged:
        raise ConvergenceError("bootstrapping requires a converged fit")
    B = int(B)
    if B < 1:
        raise ValidationError("B must be at least 1")
    seed = _check_seed(seed)
    payload = _ReplicatePayload(
        X=data.X,
        probs=kernels.response_prob(data.X @ fit.beta, fit.tau.value),
        beta_hat=fit.beta,
        tau=fit.tau,
        column_names=tuple(data.column_names),
        has_intercept=data.has_intercept,
        seed=seed,
        max_iter=max_iter,
        grad_tol=grad_tol,
        step_tol=step_tol,
    )
    if workers is None:
        workers = 1
    workers = max(1, int(workers))
    if workers == 1 or B < 4:
        results = [_run_one(payload, b) for b in range(B)]
    else:
        chunk = max(1, B // (workers * 8))
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_pool, initargs=(payload,)
        ) as pool:
            results = list(pool.map(_pool_task, range(B), chunksize=chunk))
    results.sort(key=lambda item: item[0])
    kept_beta = [r[1] for r in results if r[1] is not None]
    kept_t = [r[2] for r in results if r[2] is not None]
    p = data.n_params
    values = np.array(kept_beta).reshape(len(kept_beta), p)
    t_stats = np.array(kept_t).reshape(len(kept_t), p)
    return ReplicateMatrix(
        values=values,
        t_stats=t_stats,
        B_requested=B,
        failed=B - len(kept_beta),
    )


def bootstrap_test(fit, data, B, seed=DEFAULT_SEED, *, workers=1):
    """Exceedance-count p-values: #{|t_b| > |t_obs|} / B_effective.

    t_obs is estimate/se from the original fit; the replicate statistics
    are centered at the original estimate so they form a null reference
    regardless of the true effect size.
    """
    if not fit.converged:
        raise ConvergenceError("testing requires a converged fit")
    if int(B) < 1:
        raise ValidationError("B must be at least 1")
    reps = _run_replicates(
        data, fit, B, seed, workers, max_iter=200, grad_tol=1e-6, step_tol=1e-10
    )
    if reps.B_effective < 1:
        raise InsufficientReplicatesError("every replicate failed")
    t_obs = fit.beta / fit.se
    return _exceedance_pvalues(reps.t_stats, t_obs)


def _assemble(reps, fit, alpha, seed, strict):
    p = reps.values.shape[1]
    nan_vec = np.full(p, np.nan)
    if strict or reps.B_effective >= 2:
        mean, se = bootstrap_mean_se(reps)
    else:
        mean, se = nan_vec.copy(), nan_vec.copy()
    try:
        ci = percentile_ci(reps, alpha)
    except InsufficientReplicatesError:
        if strict:
            raise
        ci = np.full((p, 2), np.nan)
    if reps.B_effective >= 1:
        p_values = _exceedance_pvalues(reps.t_stats, fit.beta / fit.se)
    else:
        p_values = nan_vec.copy()
    return BootstrapResult(
        replicates=reps,
        mean=mean,
        se=se,
        ci=ci,
        p_values=p_values,
        seed=seed,
        alpha=alpha,
    )


def run_bootstrap(
    data,
    fit,
    B=DEFAULT_B,
    alpha=0.05,
    seed=DEFAULT_SEED,
    workers=1,
    *,
    max_iter=200,
    grad_tol=1e-6,
    step_tol=1e-10,
):
    """Full bootstrap pass: replicates, mean/SE, percentile CIs, p-values.

    Deterministic for fixed (data, fit, B, alpha, seed) regardless of
    ``workers``. Raises UnreliableRunError (carrying partial results) when
    more than 1 - RELIABLE_FRACTION of the replicates failed.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must lie in (0, 1)")
    seed = _check_seed(seed)
    reps = _run_replicates(data, fit, B, seed, workers, max_iter, grad_tol, step_tol)
    if not reps.reliable:
        partial = _assemble(reps, fit, alpha, seed, strict=False)
        raise UnreliableRunError(
            f"only {reps.B_effective} of {reps.B_requested} replicates succeeded "
            f"(more than {100 * (1 - RELIABLE_FRACTION):.0f}% failed)",
            partial=partial,
        )
    return _assemble(reps, fit, alpha, seed, strict=True)
