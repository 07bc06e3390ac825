"""Jit-compiled kernels for the per-observation inner loops.

Same contract as _kernels_numpy, written as scalar loops so numba fuses
them without temporaries. Compiled artifacts are disk-cached, so the
first import per environment pays the compile cost once.
"""

import math

import numpy as np
from numba import njit

# Keep in sync with _kernels_numpy.TAU_SWITCH (literal duplicated so the
# jit cache never captures a stale cross-module constant).
TAU_SWITCH = 1e-6


@njit(cache=True)
def log_survival(eta, tau):
    n = eta.shape[0]
    out = np.empty(n)
    if abs(tau) < TAU_SWITCH:
        for i in range(n):
            out[i] = -math.exp(eta[i])
        return out
    for i in range(n):
        t = 1.0 - tau * eta[i]
        if t <= 0.0:
            out[i] = -np.inf if tau > 0.0 else 0.0
        else:
            out[i] = -math.exp(-math.log(t) / tau)
    return out


@njit(cache=True)
def response_prob(eta, tau):
    ls = log_survival(eta, tau)
    out = np.empty(ls.shape[0])
    for i in range(ls.shape[0]):
        out[i] = -math.expm1(ls[i])
    return out


@njit(cache=True)
def dprob_deta(eta, tau):
    n = eta.shape[0]
    out = np.empty(n)
    limit = abs(tau) < TAU_SWITCH
    for i in range(n):
        if limit:
            t = 1.0
            a = math.exp(eta[i])
        else:
            t = 1.0 - tau * eta[i]
            if t <= 0.0:
                out[i] = np.nan
                continue
            a = math.exp(-math.log(t) / tau)
        if a == np.inf:
            out[i] = 0.0
        else:
            out[i] = math.exp(-a) * a / t
    return out


@njit(cache=True)
def bernoulli_loglik(eta, y, tau):
    n = eta.shape[0]
    ll = 0.0
    inside = True
    limit = abs(tau) < TAU_SWITCH
    for i in range(n):
        if limit:
            ls = -math.exp(eta[i])
        else:
            t = 1.0 - tau * eta[i]
            if t <= 0.0:
                inside = False
                ls = -np.inf if tau > 0.0 else 0.0
            else:
                ls = -math.exp(-math.log(t) / tau)
        if y[i] == 1:
            if ls == 0.0:
                ll = -np.inf
            else:
                ll += math.log(-math.expm1(ls))
        else:
            ll += ls
    return ll, inside


@njit(cache=True)
def score_weights(eta, y, tau):
    n = eta.shape[0]
    w = np.empty(n)
    limit = abs(tau) < TAU_SWITCH
    if not limit:
        for i in range(n):
            if 1.0 - tau * eta[i] <= 0.0:
                for j in range(n):
                    w[j] = np.nan
                return w, False
    for i in range(n):
        if limit:
            t = 1.0
            a = math.exp(eta[i])
        else:
            t = 1.0 - tau * eta[i]
            a = math.exp(-math.log(t) / tau)
        if y[i] == 1:
            if a == np.inf:
                w[i] = 0.0
            elif a == 0.0:
                w[i] = 1.0 / t
            else:
                w[i] = a / (t * math.expm1(a))
        else:
            w[i] = -a / t
    return w, True
