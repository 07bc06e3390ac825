"""Maximum-likelihood fitting under the extreme-value response curve.

Optimization is a dense quasi-Newton ascent (BFGS update of the inverse
curvature) with a backtracking line search; any step that leaves the open
support of the response curve or produces a -inf log-likelihood is
rejected by halving. The shape parameter is either held fixed or profiled
out: the profile search evaluates a 41-point grid over the box constraint
and refines the best bracket by golden section, re-maximizing the
coefficients at every probe.

Standard errors come from the inverse observed information, with the
information matrix obtained by central finite differences of the analytic
score (second analytic derivatives of the curve are error-prone; FD of an
exact gradient is accurate to ~1e-7).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from ._backend import kernels
from .errors import BoundaryError, ConvergenceError, SeparationError, ValidationError
from .links import TAU_MAX, ShapeTau, TauMode, link

DEFAULT_MAX_ITER = 200
DEFAULT_GRAD_TOL = 1e-6
DEFAULT_STEP_TOL = 1e-10

# Coefficient norm beyond which a still-improving likelihood is treated as
# evidence that the MLE does not exist.
SEPARATION_NORM = 1e4

# A log-likelihood this close to 0 means every observation is fitted at
# its own label: the data are separated and the ascent merely stalled
# (the gradient decays exponentially along the separation ray, so the
# norm check alone can miss it).
SEPARATION_LOGLIK_TOL = -1e-4

PROFILE_GRID_SIZE = 41
_PROFILE_REFINE_TOL = 1e-6
_ARMIJO_C1 = 1e-4
_MIN_BACKTRACK = 2.0 ** -60
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FitResult:
    """Converged (or best-effort) maximum-likelihood fit."""

    beta: np.ndarray
    tau: ShapeTau
    loglik: float
    se: np.ndarray
    vcov: np.ndarray
    converged: bool
    iterations: int
    boundary: bool
    names: tuple
    has_intercept: bool
    n_obs: int


@dataclass(frozen=True)
class InferenceRow:
    name: str
    estimate: float
    se: float
    ci_low: float
    ci_high: float
    p_value: Optional[float]


@dataclass(frozen=True)
class InferenceTable:
    """Per-parameter estimates, standard errors, intervals and p-values."""

    rows: tuple
    alpha: float


def _coerce_tau(tau):
    if tau is None:
        return ShapeTau.profiled()
    if isinstance(tau, ShapeTau):
        return tau
    return ShapeTau.fixed(float(tau))


def _check_beta(beta, p):
    b = np.asarray(beta, dtype=np.float64)
    if b.shape != (p,):
        raise ValidationError(f"beta must have shape ({p},), got {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ValidationError("beta must be finite")
    return b


def log_likelihood(data, beta, tau):
    """Bernoulli log-likelihood of ``beta`` at shape ``tau``; may be -inf."""
    t = _coerce_tau(tau).value
    b = _check_beta(beta, data.n_params)
    ll, _ = kernels.bernoulli_loglik(data.X @ b, data.y, t)
    return ll


def score(data, beta, tau):
    """Gradient of the log-likelihood in beta.

    Requires every observation strictly inside the open support; raises
    BoundaryError otherwise.
    """
    t = _coerce_tau(tau).value
    b = _check_beta(beta, data.n_params)
    w, inside = kernels.score_weights(data.X @ b, data.y, t)
    if not inside:
        raise BoundaryError(
            "score undefined: an observation sits at or beyond the truncation boundary"
        )
    return data.X.T @ w


def _loglik_raw(X, y, beta, tau_value):
    return kernels.bernoulli_loglik(X @ beta, y, tau_value)


def _score_raw(X, y, beta, tau_value):
    w, inside = kernels.score_weights(X @ beta, y, tau_value)
    if not inside:
        return w, False
    return X.T @ w, True


def _usable_start(X, y, beta, tau_value):
    ll, inside = _loglik_raw(X, y, beta, tau_value)
    return inside and np.isfinite(ll)


def _maximize_beta(X, y, tau_value, beta0, max_iter, grad_tol, step_tol):
    """BFGS ascent in beta at fixed shape.

    Returns (beta, loglik, iterations, converged). Raises SeparationError
    when an accepted (improving) step pushes ||beta|| past SEPARATION_NORM.
    """
    p = X.shape[1]
    x = beta0.astype(np.float64).copy()
    fval, inside = _loglik_raw(X, y, x, tau_value)
    if not inside or not np.isfinite(fval):
        raise ConvergenceError("starting point outside the support of the curve")
    fval = -fval
    g, ok = _score_raw(X, y, x, tau_value)
    if not ok or not np.all(np.isfinite(g)):
        raise ConvergenceError("score not finite at the starting point")
    gf = -g
    eye = np.eye(p)
    H = eye.copy()
    k = 0
    first_update = True
    while k < max_iter:
        if np.max(np.abs(gf)) < grad_tol:
            break
        d = -H @ gf
        dg = float(gf @ d)
        if dg >= 0.0:
            H = eye.copy()
            d = -gf
            dg = float(gf @ d)
        step = 1.0
        accepted = False
        while step >= _MIN_BACKTRACK:
            xc = x + step * d
            llc, inside = _loglik_raw(X, y, xc, tau_value)
            fc = -llc
            if inside and np.isfinite(fc) and fc <= fval + _ARMIJO_C1 * step * dg:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        g_new, ok = _score_raw(X, y, xc, tau_value)
        if not ok or not np.all(np.isfinite(g_new)):
            x, fval = xc, fc
            k += 1
            break
        gf_new = -g_new
        s = xc - x
        yv = gf_new - gf
        sy = float(s @ yv)
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(yv):
            if first_update:
                H = (sy / float(yv @ yv)) * eye
                first_update = False
            rho = 1.0 / sy
            V = eye - rho * np.outer(s, yv)
            H = V @ H @ V.T + rho * np.outer(s, s)
        x, fval, gf = xc, fc, gf_new
        k += 1
        if np.linalg.norm(x) > SEPARATION_NORM:
            raise SeparationError(
                "coefficient norm exceeded {:g} with the likelihood still improving; "
                "the MLE does not exist (separated data)".format(SEPARATION_NORM)
            )
        if np.linalg.norm(s) < step_tol:
            break
    if -fval > SEPARATION_LOGLIK_TOL:
        raise SeparationError(
            "log-likelihood indistinguishable from a perfect fit; "
            "the MLE does not exist (separated data)"
        )
    if np.max(np.abs(gf)) >= grad_tol:
        x, fval, gf, extra = _newton_polish(X, y, tau_value, x, fval, gf, grad_tol)
        k += extra
    converged = bool(np.max(np.abs(gf)) < grad_tol)
    return x, -fval, k, converged


def _newton_polish(X, y, tau_value, x, fval, gf, grad_tol):
    """Newton steps on the FD information matrix after the ascent stalls.

    Close to the optimum the quasi-Newton line search can no longer verify
    improvements (they fall below the float resolution of the
    log-likelihood), so accept steps on gradient-norm decrease instead,
    allowing a likelihood change within rounding of zero.
    """
    taken = 0
    for _ in range(5):
        gnorm = np.max(np.abs(gf))
        if gnorm < grad_tol:
            break
        try:
            info = _observed_information(X, y, tau_value, x)
            delta = np.linalg.solve(info, -gf)
        except (ConvergenceError, np.linalg.LinAlgError):
            break
        xc = x + delta
        llc, inside = _loglik_raw(X, y, xc, tau_value)
        if not inside or not np.isfinite(llc):
            break
        g_new, ok = _score_raw(X, y, xc, tau_value)
        if not ok or not np.all(np.isfinite(g_new)):
            break
        gf_new = -g_new
        if np.max(np.abs(gf_new)) >= gnorm:
            break
        if -llc > fval + 1e-8 * max(1.0, abs(fval)):
            break
        x, fval, gf = xc, -llc, gf_new
        taken += 1
    return x, fval, gf, taken


def _observed_information(X, y, tau_value, beta):
    """Negative Hessian of the log-likelihood by central FD of the score."""
    p = beta.shape[0]
    cols = np.empty((p, p))
    for j in range(p):
        h = 1e-5 * max(1.0, abs(beta[j]))
        for _ in range(8):
            bp = beta.copy()
            bp[j] += h
            bm = beta.copy()
            bm[j] -= h
            gp, ok_p = _score_raw(X, y, bp, tau_value)
            gm, ok_m = _score_raw(X, y, bm, tau_value)
            if (
                ok_p
                and ok_m
                and np.all(np.isfinite(gp))
                and np.all(np.isfinite(gm))
            ):
                cols[:, j] = (gp - gm) / (2.0 * h)
                break
            h /= 10.0
        else:
            raise ConvergenceError(
                "cannot difference the score near the optimum (support boundary)"
            )
    hess = 0.5 * (cols + cols.T)
    return -hess


def _vcov_from_information(info):
    try:
        vcov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        raise ConvergenceError("observed information is singular at the optimum") from None
    vcov = 0.5 * (vcov + vcov.T)
    diag = np.diag(vcov)
    if not np.all(np.isfinite(vcov)) or np.any(diag <= 0.0):
        raise ConvergenceError("observed information is not positive definite")
    return vcov, np.sqrt(diag)


def _fallback_start(X, y, has_intercept, tau_value):
    # eta = 0 everywhere is always strictly interior; with an intercept the
    # sample-frequency start is closer.
    p = X.shape[1]
    if has_intercept:
        ybar = float(np.mean(y))
        beta = np.zeros(p)
        beta[0] = link(ybar, tau_value)
        if _usable_start(X, y, beta, tau_value):
            return beta
    return np.zeros(p)


def _resolve_start(X, y, has_intercept, tau_value, start_beta, warm):
    candidates = []
    if start_beta is not None:
        candidates.append(np.asarray(start_beta, dtype=np.float64))
    if warm is not None:
        candidates.append(warm)
    candidates.append(_fallback_start(X, y, has_intercept, tau_value))
    candidates.append(np.zeros(X.shape[1]))
    for c in candidates:
        if c.shape == (X.shape[1],) and np.all(np.isfinite(c)) and _usable_start(
            X, y, c, tau_value
        ):
            return c.astype(np.float64)
    raise ConvergenceError("no usable starting point found")


def _fit_fixed(X, y, has_intercept, tau_value, start_beta, max_iter, grad_tol, step_tol):
    """Fixed-shape fit with a smooth-limit warm start.

    The limit-regime problem (shape ~ 0) has no support constraint, so it
    is solved first from zero and its solution warm-starts the target
    shape; an infeasible warm start falls back to the frequency start.
    """
    warm = None
    if start_beta is None and abs(tau_value) >= 1e-12:
        b0 = _resolve_start(X, y, has_intercept, 0.0, None, None)
        warm, _, it0, _ = _maximize_beta(X, y, 0.0, b0, max_iter, grad_tol, step_tol)
    else:
        it0 = 0
    b_start = _resolve_start(X, y, has_intercept, tau_value, start_beta, warm)
    beta, ll, iters, converged = _maximize_beta(
        X, y, tau_value, b_start, max_iter, grad_tol, step_tol
    )
    return beta, ll, it0 + iters, converged


def _profile_tau(X, y, has_intercept, start_beta, max_iter, grad_tol, step_tol):
    """Profile the shape over a coarse grid plus golden-section refinement.

    Separation at shape 0 is propagated (it is a property of the data, not
    of the shape); failures elsewhere on the grid mark that point
    unattainable and the search continues.
    """
    grid = np.linspace(-TAU_MAX, TAU_MAX, PROFILE_GRID_SIZE)
    center = PROFILE_GRID_SIZE // 2  # grid[center] == 0.0
    lls = np.full(PROFILE_GRID_SIZE, -np.inf)
    betas = [None] * PROFILE_GRID_SIZE
    total_iters = 0

    b0 = _resolve_start(X, y, has_intercept, grid[center], start_beta, None)
    beta_c, ll_c, it, conv_c = _maximize_beta(
        X, y, grid[center], b0, max_iter, grad_tol, step_tol
    )
    total_iters += it
    lls[center] = ll_c
    betas[center] = beta_c

    def _try_point(tau_value, warm):
        nonlocal total_iters
        try:
            b_start = _resolve_start(X, y, has_intercept, tau_value, None, warm)
            beta, ll, it, conv = _maximize_beta(
                X, y, tau_value, b_start, max_iter, grad_tol, step_tol
            )
        except (SeparationError, ConvergenceError):
            return None
        total_iters += it
        if not conv:
            return None
        return beta, ll

    for idx in range(center + 1, PROFILE_GRID_SIZE):
        res = _try_point(grid[idx], betas[idx - 1])
        if res is not None:
            betas[idx], lls[idx] = res[0], res[1]
    for idx in range(center - 1, -1, -1):
        res = _try_point(grid[idx], betas[idx + 1])
        if res is not None:
            betas[idx], lls[idx] = res[0], res[1]

    best_idx = int(np.argmax(lls))
    best = (grid[best_idx], betas[best_idx], lls[best_idx])

    lo = grid[max(best_idx - 1, 0)]
    hi = grid[min(best_idx + 1, PROFILE_GRID_SIZE - 1)]

    def _probe(tau_value):
        nonlocal best
        res = _try_point(tau_value, best[1])
        if res is None:
            return -np.inf
        if res[1] > best[2]:
            best = (tau_value, res[0], res[1])
        return res[1]

    a, b = lo, hi
    c1 = b - _GOLDEN * (b - a)
    c2 = a + _GOLDEN * (b - a)
    f1, f2 = _probe(c1), _probe(c2)
    while b - a > _PROFILE_REFINE_TOL:
        if f1 < f2:
            a, c1, f1 = c1, c2, f2
            c2 = a + _GOLDEN * (b - a)
            f2 = _probe(c2)
        else:
            b, c2, f2 = c2, c1, f1
            c1 = b - _GOLDEN * (b - a)
            f1 = _probe(c1)

    tau_hat, beta_warm, _ = best
    beta, ll, it, converged = _maximize_beta(
        X, y, tau_hat, beta_warm, max_iter, grad_tol, step_tol
    )
    total_iters += it
    return tau_hat, beta, ll, total_iters, converged


def fit_mle(
    data,
    tau=None,
    *,
    start_beta=None,
    max_iter=DEFAULT_MAX_ITER,
    grad_tol=DEFAULT_GRAD_TOL,
    step_tol=DEFAULT_STEP_TOL,
    check_rank=True,
):
    """Maximum-likelihood fit of the coefficients (and optionally the shape).

    ``tau`` may be a ShapeTau, a plain number (treated as fixed), or None
    (profiled, the default). ``start_beta`` warm-starts the coefficient
    search; bootstrap refits pass the original estimate here.

    Raises SeparationError when the MLE does not exist and ValidationError
    for unusable data (single-class response, rank-deficient design).
    """
    shape = _coerce_tau(tau)
    data.validate_for_fit(check_rank=check_rank)
    X, y = data.X, data.y

    if shape.mode is TauMode.PROFILED:
        tau_hat, beta, ll, iters, converged = _profile_tau(
            X, y, data.has_intercept, start_beta, max_iter, grad_tol, step_tol
        )
    else:
        tau_hat = shape.value
        beta, ll, iters, converged = _fit_fixed(
            X,
            y,
            data.has_intercept,
            tau_hat,
            start_beta,
            max_iter,
            grad_tol,
            step_tol,
        )

    info = _observed_information(X, y, tau_hat, beta)
    vcov, se = _vcov_from_information(info)
    probs = kernels.response_prob(X @ beta, tau_hat)
    boundary = bool(np.any((probs == 0.0) | (probs == 1.0)))
    return FitResult(
        beta=beta,
        tau=ShapeTau(value=tau_hat, mode=shape.mode),
        loglik=float(ll),
        se=se,
        vcov=vcov,
        converged=converged,
        iterations=iters,
        boundary=boundary,
        names=tuple(data.column_names),
        has_intercept=data.has_intercept,
        n_obs=data.n_obs,
    )


def wald_inference(fit, alpha=0.05):
    """Normal-reference intervals and two-sided p-values from the fit.

    The intercept row carries no p-value (it is not a tested hypothesis in
    the reported tables); every other coefficient gets
    p = P(|Z| > |estimate/se|).
    """
    if not fit.converged:
        raise ConvergenceError("inference requires a converged fit")
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must lie in (0, 1)")
    z = float(special.ndtri(1.0 - alpha / 2.0))
    rows = []
    for j, name in enumerate(fit.names):
        est = float(fit.beta[j])
        se_j = float(fit.se[j])
        half = z * se_j
        if fit.has_intercept and j == 0:
            p = None
        else:
            p = float(special.erfc(abs(est / se_j) / math.sqrt(2.0)))
        rows.append(
            InferenceRow(
                name=name,
                estimate=est,
                se=se_j,
                ci_low=est - half,
                ci_high=est + half,
                p_value=p,
            )
        )
    return InferenceTable(rows=tuple(rows), alpha=alpha)
