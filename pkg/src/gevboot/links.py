"""Response curve and link for shape-parametrized binary regression.

The response curve maps a linear predictor eta to an event probability
through the survival function of a standard extreme-value law with shape
``tau`` (location 0, scale 1):

    pi(eta) = 1 - exp(-[(1 - tau*eta)_+]^(-1/tau)),    tau != 0,

with the exact tau -> 0 limit

    pi(eta) = 1 - exp(-exp(eta))

taken once |tau| drops below TAU_SWITCH. For tau > 0 the curve saturates
at pi = 1 when eta >= 1/tau; for tau < 0 it saturates at pi = 0 when
eta <= 1/tau. ``link`` is the exact inverse on the open interior.

All functions accept scalars or numpy arrays and are pure and stateless.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._backend import kernels
from .errors import BoundaryError, DomainError

#: Box constraint on |tau| used by the fitting routines. Beyond this the
#: curve is numerically degenerate for any realistic eta range.
TAU_MAX = 5.0

#: Below this |tau| all curve evaluations use the exact limit form, which
#: removes the 1/tau cancellation. Mirrors the constant in the kernels.
TAU_SWITCH = 1e-6


class TauMode(str, Enum):
    """Whether the shape parameter is held fixed or profiled out."""

    FIXED = "fixed"
    PROFILED = "profiled"


@dataclass(frozen=True)
class ShapeTau:
    """Shape parameter with its estimation mode.

    ``value`` is the fixed shape in FIXED mode; in PROFILED mode it is
    carried for reporting only (the profile search always covers the whole
    [-TAU_MAX, TAU_MAX] box starting from the smooth limit at 0).
    """

    value: float = 0.0
    mode: TauMode = TauMode.FIXED
    max_abs: float = TAU_MAX

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v):
            raise DomainError("shape parameter must be finite")
        if abs(v) > self.max_abs:
            raise DomainError(
                f"|shape| = {abs(v)} exceeds the box constraint {self.max_abs}"
            )
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "mode", TauMode(self.mode))

    @classmethod
    def fixed(cls, value):
        return cls(value=value, mode=TauMode.FIXED)

    @classmethod
    def profiled(cls, initial=0.0):
        return cls(value=initial, mode=TauMode.PROFILED)


def _tau_value(tau):
    if isinstance(tau, ShapeTau):
        return tau.value
    t = float(tau)
    if not math.isfinite(t):
        raise DomainError("shape parameter must be finite")
    return t


def _as_array(x, name):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr, arr.ndim == 0


def _unwrap(values, scalar):
    return float(values[0]) if scalar else values


def response_prob(eta, tau):
    """Event probability P(Y = 1) at linear predictor ``eta``.

    At and beyond the truncation boundary the continuity limits apply:
    1 for tau > 0, 0 for tau < 0.
    """
    t = _tau_value(tau)
    arr, scalar = _as_array(eta, "eta")
    return _unwrap(kernels.response_prob(np.atleast_1d(arr), t), scalar)


def link(pi, tau):
    """Linear predictor eta with response_prob(eta, tau) = pi.

    Defined on the open interval 0 < pi < 1:

        eta = [1 - (-log(1 - pi))^(-tau)] / tau,    tau != 0,
        eta = log(-log(1 - pi))                      in the limit regime.
    """
    t = _tau_value(tau)
    arr, scalar = _as_array(pi, "pi")
    vals = np.atleast_1d(arr)
    if np.any(vals <= 0.0) or np.any(vals >= 1.0):
        raise DomainError("pi must lie strictly inside (0, 1)")
    s = -np.log1p(-vals)
    if abs(t) < TAU_SWITCH:
        eta = np.log(s)
    else:
        eta = (1.0 - s ** (-t)) / t
    return _unwrap(eta, scalar)


def log_survival(eta, tau):
    """log(1 - pi) in closed form, stable where pi is close to 1.

    Saturation for tau > 0 is signaled by -inf (certain event); for
    tau < 0 the value is 0 (impossible event).
    """
    t = _tau_value(tau)
    arr, scalar = _as_array(eta, "eta")
    return _unwrap(kernels.log_survival(np.atleast_1d(arr), t), scalar)


def d_prob_d_eta(eta, tau):
    """Derivative of the response curve, d pi / d eta.

    Positive on the open interior. Raises BoundaryError at or beyond the
    truncation boundary; callers probing near saturation must clamp.
    """
    t = _tau_value(tau)
    arr, scalar = _as_array(eta, "eta")
    d = kernels.dprob_deta(np.atleast_1d(arr), t)
    if np.any(np.isnan(d)):
        raise BoundaryError(
            "derivative undefined at or beyond the truncation boundary"
        )
    return _unwrap(d, scalar)
