"""Belief-modulated drift diffusion model.

Trial-wise predictions ``muhat1`` shift the start point, scale the boundary
separation through the prediction precision and shift the drift toward the
stimulus that was expected. Choice 1 is absorbed at the upper boundary.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InputValidationError, ParameterDomainError
from .hgf import sigmoid
from .wfpt import LOG_DENSITY_FLOOR, WienerParams, _logpdf


@dataclass(frozen=True)
class DdmParams:
    b_w: float = 0.0
    a_a: float = 1.0
    b_a: float = 0.0
    a_v: float = 1.0
    b_v: float = 0.0
    ter: float = 0.15

    def __post_init__(self):
        if not self.a_a > 0 or not self.a_v > 0:
            raise InputValidationError("a_a and a_v must be positive")
        if not -1 < self.b_w < 1:
            raise InputValidationError("b_w must lie in (-1, 1)")
        if not self.ter >= 0:
            raise InputValidationError("ter must be non-negative")



def _trial_params(muhat1, u, p):
    muhat1 = np.asarray(muhat1, dtype=float)
    u = np.asarray(u, dtype=float)
    w = 0.5 + p.b_w * (muhat1 - 0.5)
    pihat = 1.0 / (muhat1 * (1.0 - muhat1))
    a = p.a_a + p.b_a * (sigmoid(pihat - 4.0) - 0.5)
    belief = np.where(u == 1, muhat1, 1.0 - muhat1)
    v = np.where(u == 1, 1.0, -1.0) * (p.a_v + p.b_v * (belief - 0.5))
    return v, a, w


def ddm_trial_params(muhat1, u, p):
    """Map beliefs to WFPT parameters ``(v, a, w)`` for each trial.

    Raises ParameterDomainError when a boundary separation is not positive.
    """
    muhat1 = np.asarray(muhat1, dtype=float)
    if np.any((muhat1 <= 0) | (muhat1 >= 1)):
        raise InputValidationError("muhat1 must lie in (0, 1)")
    v, a, w = _trial_params(muhat1, u, p)
    if np.any(a <= 0):
        raise ParameterDomainError("b_a produces a non-positive boundary separation")
    if np.ndim(v) == 0:
        return WienerParams(float(v), float(a), float(w))
    return WienerParams(v, a, w)


def ddm_trial_loglik(rt, choice, u, muhat1, p):
    """Log-likelihood of (rt, choice) per trial; arguments may be arrays.

    Trials with ``rt <= ter`` or a non-positive boundary get the density floor
    instead of raising, so line searches stay well defined.
    """
    rt = np.asarray(rt, dtype=float)
    v, a, w = _trial_params(muhat1, u, p)
    T = rt - p.ter
    out = _logpdf(np.where(T > 0, T, 1.0), np.asarray(choice) == 1, v, a, w)
    out = np.where((T > 0) & (a > 0), out, LOG_DENSITY_FLOOR)
    return float(out) if out.ndim == 0 else out

