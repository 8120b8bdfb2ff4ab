"""Belief-modulated racing diffusion model.

Each accumulator is a single-boundary diffusion whose finishing time follows
a Wald (inverse Gaussian) law with threshold ``a`` and drift ``v``. Beliefs
move the two thresholds and the two drifts in opposite directions.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import erfcx, log_ndtr

from .exceptions import DomainError, InputValidationError
from .wfpt import LOG_DENSITY_FLOOR

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class RdmParams:
    a_a: float = 1.0
    b_a: float = 0.0
    a_v: float = 1.0
    b_val: float = 0.0
    b_v: float = 0.0
    ter: float = 0.0

    def __post_init__(self):
        if not self.a_a > 0 or not self.a_v > 0:
            raise InputValidationError("a_a and a_v must be positive")
        if not self.ter >= 0:
            raise InputValidationError("ter must be non-negative")


def _wald_logpdf(t, a, v):
    return np.log(a) - _HALF_LOG_2PI - 1.5 * np.log(t) - (v * t - a) ** 2 / (2.0 * t)


def _wald_logcdf(t, a, v):
    sq = np.sqrt(t)
    l1 = log_ndtr((v * t - a) / sq)
    l2 = 2.0 * a * v + log_ndtr(-(v * t + a) / sq)
    return np.logaddexp(l1, l2)


def _wald_logsf(t, a, v):
    """log(1 - F) without cancellation on either side of the mean."""
    t, a, v = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (t, a, v)))
    sq = np.sqrt(t)
    out = np.empty(t.shape)
    late = v * t - a > 0
    if late.any():
        # 1 - F = phi-scaled difference of two scaled complementary error functions
        tl, al, vl, sl = t[late], a[late], v[late], sq[late]
        x1 = (vl * tl - al) / (np.sqrt(2.0) * sl)
        x2 = (vl * tl + al) / (np.sqrt(2.0) * sl)
        diff = erfcx(x1) - erfcx(x2)
        with np.errstate(divide="ignore"):
            out[late] = np.log(0.5) - x1 * x1 + np.log(np.maximum(diff, 0.0))
    early = ~late
    if early.any():
        te, ae, ve, se = t[early], a[early], v[early], sq[early]
        l1 = log_ndtr((ae - ve * te) / se)
        l2 = 2.0 * ae * ve + log_ndtr(-(ve * te + ae) / se)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[early] = l1 + np.log1p(-np.exp(np.minimum(l2 - l1, 0.0)))
    return out


def _check_time(t, a):
    if np.any(~(np.asarray(t, dtype=float) > 0)):
        raise DomainError("t must be positive")
    if np.any(~(np.asarray(a, dtype=float) > 0)):
        raise DomainError("threshold a must be positive")


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def wald_logpdf(t, a, v):
    """Log first-passage density of a unit-variance diffusion to threshold ``a``."""
    _check_time(t, a)
    return _out(_wald_logpdf(np.asarray(t, dtype=float), a, v))


def wald_logcdf(t, a, v):
    """Log distribution function (mean ``a / v``, shape ``a**2``)."""
    _check_time(t, a)
    return _out(_wald_logcdf(np.asarray(t, dtype=float), a, v))


def wald_logsf(t, a, v):
    """Log survivor function ``log(1 - F(t))``."""
    _check_time(t, a)
    return _out(_wald_logsf(t, a, v))


def rdm_trial_params(muhat1, u, p):
    """Thresholds and drifts ``(a_c1, a_c0, v_c1, v_c0)`` per trial."""
    muhat1 = np.asarray(muhat1, dtype=float)
    u = np.asarray(u, dtype=float)
    a_c1 = p.a_a + p.b_a * (muhat1 - 0.5)
    a_c0 = p.a_a + p.b_a * ((1.0 - muhat1) - 0.5)
    v_c1 = p.a_v + p.b_val * (u == 1) + p.b_v * (muhat1 - 0.5)
    v_c0 = p.a_v + p.b_val * (u == 0) + p.b_v * ((1.0 - muhat1) - 0.5)
    return a_c1, a_c0, v_c1, v_c0


def rdm_trial_loglik(rt, choice, u, muhat1, p):
    """Winner density times loser survivor, in log space, per trial.

    Non-positive thresholds or ``rt <= ter`` give the density floor.
    """
    rt = np.asarray(rt, dtype=float)
    a_c1, a_c0, v_c1, v_c0 = rdm_trial_params(muhat1, u, p)
    c1 = np.asarray(choice) == 1
    a_f, a_F = np.where(c1, a_c1, a_c0), np.where(c1, a_c0, a_c1)
    v_f, v_F = np.where(c1, v_c1, v_c0), np.where(c1, v_c0, v_c1)
    T = rt - p.ter
    ok = (T > 0) & (a_f > 0) & (a_F > 0)
    out = np.full(np.broadcast(T, a_f).shape, LOG_DENSITY_FLOOR)
    if np.any(ok):
        Tk, af, aF, vf, vF = (np.broadcast_to(x, out.shape)[ok] for x in (T, a_f, a_F, v_f, v_F))
        val = _wald_logpdf(Tk, af, vf) + _wald_logsf(Tk, aF, vF)
        out[ok] = np.where(np.isnan(val), LOG_DENSITY_FLOOR, np.maximum(val, LOG_DENSITY_FLOOR))
    return _out(out)
