"""Wiener first-passage-time (WFPT) densities for the two-boundary diffusion.

The diffusion coefficient is fixed to 1. Densities are evaluated for the
lower boundary by rescaling the zero-drift, unit-separation density and
picking, per time point, whichever of the small-time or large-time series
needs fewer terms (Navarro & Fuss, 2009). Everything is computed in log
space so that very short or very long decision times stay finite.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError

EPSILON = 1e-12
LOG_DENSITY_FLOOR = -700.0

_LOG_2PI = np.log(2.0 * np.pi)
_LOG_PI = np.log(np.pi)


@dataclass(frozen=True)
class WienerParams:
    """Drift ``v``, boundary separation ``a`` and relative start point ``w``.

    Fields may be floats or equally shaped arrays (one entry per trial).
    """

    v: object
    a: object
    w: object

    def validate(self):
        a = np.asarray(self.a)
        w = np.asarray(self.w)
        if np.any(~(a > 0)):
            raise DomainError("boundary separation a must be positive")
        if np.any(~((w > 0) & (w < 1))):
            raise DomainError("relative start point w must lie in (0, 1)")
        return self

    def flipped(self):
        """Parameters whose lower boundary is this process's upper boundary."""
        return WienerParams(-np.asarray(self.v), self.a, 1.0 - np.asarray(self.w))


def n_terms_small(tt, eps=EPSILON):
    """Terms needed by the small-time series for absolute error ``eps``."""
    tt = np.asarray(tt, dtype=float)
    c = 2.0 * np.sqrt(2.0 * np.pi * tt) * eps
    with np.errstate(invalid="ignore", divide="ignore"):
        ks = 2.0 + np.sqrt(np.maximum(-2.0 * tt * np.log(c), 0.0))
    ks = np.maximum(ks, np.sqrt(tt) + 1.0)
    return np.where(c < 1.0, ks, 2.0)


def n_terms_large(tt, eps=EPSILON):
    """Terms needed by the large-time series for absolute error ``eps``."""
    tt = np.asarray(tt, dtype=float)
    c = np.pi * tt * eps
    floor = 1.0 / (np.pi * np.sqrt(tt))
    with np.errstate(invalid="ignore", divide="ignore"):
        kl = np.sqrt(np.maximum(-2.0 * np.log(c) / (np.pi**2 * tt), 0.0))
    return np.where(c < 1.0, np.maximum(kl, floor), floor)


def small_time_log(tt, w, n_half):
    """Log of the unit density via the small-time series, k in [-n_half, n_half]."""
    tt = np.asarray(tt, dtype=float)[..., None]
    w = np.asarray(w, dtype=float)[..., None]
    k = np.arange(-n_half, n_half + 1, dtype=float)
    # factor out the k = 0 exponent so nothing underflows for tiny tt
    terms = (w + 2.0 * k) * np.exp(-2.0 * k * (w + k) / tt)
    s = terms.sum(axis=-1)
    tt, w = tt[..., 0], w[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        return -0.5 * _LOG_2PI - 1.5 * np.log(tt) - w * w / (2.0 * tt) + np.log(s)


def large_time_log(tt, w, n_terms):
    """Log of the unit density via the large-time series, k in [1, n_terms]."""
    tt = np.asarray(tt, dtype=float)[..., None]
    w = np.asarray(w, dtype=float)[..., None]
    k = np.arange(1, n_terms + 1, dtype=float)
    terms = k * np.exp(-(k * k - 1.0) * np.pi**2 * tt / 2.0) * np.sin(k * np.pi * w)
    s = terms.sum(axis=-1)
    tt = tt[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        return _LOG_PI - np.pi**2 * tt / 2.0 + np.log(s)


def unit_lower_logpdf(tt, w, eps=EPSILON):
    """Log density of hitting the lower boundary at normalized time ``tt``
    for drift 0, separation 1 and start ``w``."""
    tt, w = np.broadcast_arrays(np.asarray(tt, dtype=float), np.asarray(w, dtype=float))
    out = np.empty(tt.shape)
    ks = n_terms_small(tt, eps)
    kl = n_terms_large(tt, eps)
    use_small = ks < kl
    if use_small.any():
        # the sum runs over k in [-n, n]; two spare terms buy relative accuracy
        n = int(np.ceil((ks[use_small].max() - 1.0) / 2.0)) + 2
        out[use_small] = small_time_log(tt[use_small], w[use_small], n)
    big = ~use_small
    if big.any():
        n = int(np.ceil(kl[big].max())) + 2
        out[big] = large_time_log(tt[big], w[big], n)
    return out


def _lower_logpdf(t, v, a, w):
    t, v, a, w = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (t, v, a, w)))
    logf = np.full(t.shape, LOG_DENSITY_FLOOR)
    ok = (t > 0) & (a > 0) & (w > 0) & (w < 1) & np.isfinite(t)
    if ok.any():
        tk, vk, ak, wk = t[ok], v[ok], a[ok], w[ok]
        unit = unit_lower_logpdf(tk / (ak * ak), wk)
        val = -2.0 * np.log(ak) - vk * ak * wk - vk * vk * tk / 2.0 + unit
        logf[ok] = np.where(np.isnan(val), LOG_DENSITY_FLOOR, val)
    return np.maximum(logf, LOG_DENSITY_FLOOR)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def wfpt_lower_logpdf(t, v, a, w):
    """Log density of absorption at the lower boundary at decision time ``t``.

    Arguments broadcast against each other. Values are floored at
    ``LOG_DENSITY_FLOOR``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("decision time t must be positive")
    WienerParams(v, a, w).validate()
    return _scalar_or_array(_lower_logpdf(t, v, a, w))


def _boundary_is_upper(boundary):
    if isinstance(boundary, str):
        if boundary not in ("lower", "upper"):
            raise ValueError(f"boundary must be 'lower' or 'upper', got {boundary!r}")
        return np.asarray(boundary == "upper")
    return np.asarray(boundary).astype(bool)


def wfpt_logpdf(t, boundary, v, a, w):
    """Log density at ``boundary`` ('lower'/'upper' or a 0/1 array, 1 = upper).

    The upper-boundary density is the lower-boundary density of the mirrored
    process (drift ``-v``, start ``1 - w``).
    """
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("decision time t must be positive")
    WienerParams(v, a, w).validate()
    return _scalar_or_array(_logpdf(t, _boundary_is_upper(boundary), v, a, w))


def _logpdf(t, upper, v, a, w):
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    sign = np.where(upper, -1.0, 1.0)
    return _lower_logpdf(t, sign * v, a, np.where(upper, 1.0 - w, w))


def _lower_prob_positive(v, a, w):
    # v >= 0 branch: exp(-2vaw) * expm1(-2va(1-w)) / expm1(-2va)
    x = 2.0 * v * a
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.exp(-x * w) * np.expm1(-x * (1.0 - w)) / np.expm1(-x)
    return np.where(np.abs(x) < 1e-10, 1.0 - w, p)


def wfpt_choice_prob(boundary, v, a, w):
    """Probability that the diffusion is absorbed at ``boundary``."""
    v, a, w = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (v, a, w)))
    # negative drift: reflect so the exponentials never overflow
    neg = v < 0
    p_lower = np.where(
        neg,
        1.0 - _lower_prob_positive(np.abs(v), a, 1.0 - w),
        _lower_prob_positive(np.abs(v), a, w),
    )
    p = np.where(_boundary_is_upper(boundary), 1.0 - p_lower, p_lower)
    return _scalar_or_array(p)
