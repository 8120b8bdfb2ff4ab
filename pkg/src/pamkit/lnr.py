"""Belief-modulated lognormal race between two accumulators.

Accumulator ``c1`` belongs to choice 1 (stimulus ``u = 1``), ``c0`` to
choice 0. Both share the scale ``sigma``; beliefs shift the log-means in
opposite directions.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from .exceptions import InputValidationError
from .wfpt import LOG_DENSITY_FLOOR

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class LnrParams:
    a: float = 0.0
    b_val: float = 0.0
    b: float = 0.0
    sigma: float = 1.0
    ter: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise InputValidationError("sigma must be positive")
        if not self.ter >= 0:
            raise InputValidationError("ter must be non-negative")


def lnr_trial_means(muhat1, u, p):
    """Log-means ``(theta_c1, theta_c0)`` of the two accumulators."""
    muhat1 = np.asarray(muhat1, dtype=float)
    u = np.asarray(u, dtype=float)
    theta_c1 = p.a + p.b_val * (u == 1) + p.b * (muhat1 - 0.5)
    theta_c0 = p.a + p.b_val * (u == 0) + p.b * ((1.0 - muhat1) - 0.5)
    return theta_c1, theta_c0


def lognormal_logpdf(t, theta, sigma):
    z = (np.log(t) - theta) / sigma
    return -np.log(t) - np.log(sigma) - _HALF_LOG_2PI - 0.5 * z * z


def lognormal_logsf(t, theta, sigma):
    return log_ndtr(-(np.log(t) - theta) / sigma)


def lnr_trial_loglik(rt, choice, u, muhat1, p):
    """Joint log density of the winner's identity ``choice`` and time ``rt - ter``."""
    rt = np.asarray(rt, dtype=float)
    theta_c1, theta_c0 = lnr_trial_means(muhat1, u, p)
    c1 = np.asarray(choice) == 1
    theta_f = np.where(c1, theta_c1, theta_c0)
    theta_F = np.where(c1, theta_c0, theta_c1)
    T = rt - p.ter
    Ts = np.where(T > 0, T, 1.0)
    out = lognormal_logpdf(Ts, theta_f, p.sigma) + lognormal_logsf(Ts, theta_F, p.sigma)
    out = np.where((T > 0) & np.isfinite(out), np.maximum(out, LOG_DENSITY_FLOOR), LOG_DENSITY_FLOOR)
    return float(out) if out.ndim == 0 else out
