"""Pure-numpy kernels for the per-observation inner loops.

Fallback path used when the jit backend is disabled or unavailable
(see _backend). The jit twins live in _kernels_numba; the two modules
implement the same contract and are held together by the backend parity
tests. Inputs are float64 arrays plus a scalar shape parameter; no
argument validation happens here.
"""

import numpy as np

# Below this |shape| the exact tau -> 0 limit pi = 1 - exp(-exp(eta)) is
# used instead of the general form. Keep in sync with _kernels_numba.
TAU_SWITCH = 1e-6


def log_survival(eta, tau):
    """log(1 - pi) at linear predictor eta, stable for pi near 1.

    Equals -[(1 - tau*eta)_+]^(-1/tau); beyond the truncation boundary the
    continuity limit applies: -inf for tau > 0, 0.0 for tau < 0.
    """
    if abs(tau) < TAU_SWITCH:
        with np.errstate(over="ignore"):
            return -np.exp(eta)
    t = 1.0 - tau * eta
    inside = t > 0.0
    out = np.empty_like(eta)
    with np.errstate(over="ignore"):
        out[inside] = -np.exp(-np.log(t[inside]) / tau)
    out[~inside] = -np.inf if tau > 0.0 else 0.0
    return out


def response_prob(eta, tau):
    """P(Y = 1) at linear predictor eta; saturates to 1 (tau > 0) or 0 (tau < 0)."""
    return -np.expm1(log_survival(eta, tau))


def dprob_deta(eta, tau):
    """Derivative of response_prob in eta; nan at or beyond the boundary."""
    if abs(tau) < TAU_SWITCH:
        t = np.ones_like(eta)
        with np.errstate(over="ignore"):
            a = np.exp(eta)
    else:
        t = 1.0 - tau * eta
        inside = t > 0.0
        a = np.empty_like(eta)
        with np.errstate(over="ignore"):
            a[inside] = np.exp(-np.log(t[inside]) / tau)
        a[~inside] = np.nan
    with np.errstate(over="ignore", invalid="ignore"):
        d = np.exp(-a) * a / t
    # exp(-a)*a is 0*inf at saturation; the limit is 0
    d[a == np.inf] = 0.0
    return d


def bernoulli_loglik(eta, y, tau):
    """Sum of Bernoulli log-probabilities under the response curve.

    Returns (loglik, inside) where inside is False when any observation
    sits at or beyond the truncation boundary. The log-likelihood itself
    is still well defined there (terms become -inf when the saturated
    probability contradicts the observed label).
    """
    ls = log_survival(eta, tau)
    if abs(tau) < TAU_SWITCH:
        inside = True
    else:
        inside = bool(np.all(1.0 - tau * eta > 0.0))
    with np.errstate(divide="ignore"):
        logp = np.log(-np.expm1(ls))
    ll = float(np.sum(np.where(y == 1, logp, ls)))
    return ll, inside


def score_weights(eta, y, tau):
    """Per-observation score factors w with d loglik / d beta = X' w.

    w_i = (y_i - pi_i) / (pi_i * (1 - pi_i)) * dpi/deta_i, computed in the
    cancellation-free forms a/(t*expm1(a)) for y=1 and -a/t for y=0, where
    a = (1 - tau*eta)^(-1/tau) and t = 1 - tau*eta (a = exp(eta), t = 1 in
    the limit regime). Returns (w, inside); w is all-nan when inside is
    False.
    """
    if abs(tau) < TAU_SWITCH:
        t = np.ones_like(eta)
        with np.errstate(over="ignore"):
            a = np.exp(eta)
    else:
        t = 1.0 - tau * eta
        if not np.all(t > 0.0):
            return np.full_like(eta, np.nan), False
        with np.errstate(over="ignore"):
            a = np.exp(-np.log(t) / tau)
    with np.errstate(over="ignore", invalid="ignore"):
        em = np.expm1(a)
        w1 = np.where(a == np.inf, 0.0, np.where(a == 0.0, 1.0 / t, a / (t * em)))
    w0 = -a / t
    w = np.where(y == 1, w1, w0)
    return w, True
