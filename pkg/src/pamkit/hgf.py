"""Two-level Hierarchical Gaussian Filter for binary inputs.

The second level ``x2`` performs a Gaussian random walk with step variance
``exp(omega2)``; the probability that ``u == 1`` is ``sigmoid(x2)``.  The
coupling to a third (volatility) level is switched off (kappa = 0), so only
``omega2`` shapes learning.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_binary
from .exceptions import DomainError, InputValidationError


def sigmoid(x):
    """Logistic sigmoid ``1 / (1 + exp(-x))``; works on scalars and arrays."""
    return expit(x)


def prediction_precision(muhat1):
    """Precision of the level-1 prediction, ``1 / (muhat1 * (1 - muhat1))``."""
    m = np.asarray(muhat1, dtype=float)
    if np.any((m <= 0.0) | (m >= 1.0)):
        raise DomainError("prediction_precision requires 0 < muhat1 < 1")
    out = 1.0 / (m * (1.0 - m))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HgfParams:
    omega2: float = -4.0
    mu2_init: float = 0.0
    sigma2_init: float = 1.0

    def __post_init__(self):
        if not self.sigma2_init > 0:
            raise InputValidationError("sigma2_init must be positive")


@dataclass(frozen=True)
class HgfTrajectory:
    """Per-trial belief states; every field is an array of length n_trials."""

    muhat1: np.ndarray
    pihat1: np.ndarray
    muhat2: np.ndarray
    sigmahat2: np.ndarray
    mu2: np.ndarray
    sigma2: np.ndarray

    columns = ("muhat1", "pihat1", "muhat2", "sigmahat2", "mu2", "sigma2")

    def __len__(self):
        return len(self.muhat1)

    def as_array(self):
        return np.column_stack([getattr(self, c) for c in self.columns])


def _filter_muhat(u, omega2, mu2_init, sigma2_init):
    # hot path of the MAP objective: plain floats beat numpy for 400 steps
    step = math.exp(omega2)
    n = len(u)
    muhat2 = [0.0] * n
    sigmahat2 = [0.0] * n
    mu2 = [0.0] * n
    sigma2 = [0.0] * n
    muhat1 = [0.0] * n
    m, s = mu2_init, sigma2_init
    for t, ut in enumerate(u):
        sh = s + step
        # stable logistic for large |m|
        if m >= 0:
            p = 1.0 / (1.0 + math.exp(-m))
        else:
            e = math.exp(m)
            p = e / (1.0 + e)
        muhat2[t] = m
        sigmahat2[t] = sh
        muhat1[t] = p
        s = 1.0 / (1.0 / sh + p * (1.0 - p))
        m = m + s * (ut - p)
        mu2[t] = m
        sigma2[t] = s
    return muhat1, muhat2, sigmahat2, mu2, sigma2


def hgf_filter(u, params=None):
    """Run the binary two-level HGF over the input sequence ``u``.

    Predictions at trial ``t`` use only inputs ``u[:t]``; the returned
    trajectory has one row per input.

    Parameters
    ----------
    u : array-like of {0, 1}
        Input sequence. Every trial must be present.
    params : HgfParams, optional
        Perceptual parameters; defaults to ``HgfParams()``.

    Returns
    -------
    HgfTrajectory
    """
    params = HgfParams() if params is None else params
    u = check_binary(u)
    muhat1, muhat2, sigmahat2, mu2, sigma2 = _filter_muhat(
        u.tolist(), params.omega2, params.mu2_init, params.sigma2_init
    )
    muhat1 = np.asarray(muhat1)
    # saturated sigmoid (|x2| > ~37) would give an infinite precision
    muhat1 = np.clip(muhat1, 1e-15, 1 - 1e-15)
    return HgfTrajectory(
        muhat1=muhat1,
        pihat1=1.0 / (muhat1 * (1.0 - muhat1)),
        muhat2=np.asarray(muhat2),
        sigmahat2=np.asarray(sigmahat2),
        mu2=np.asarray(mu2),
        sigma2=np.asarray(sigma2),
    )


def predicted_beliefs(u, omega2, mu2_init=0.0, sigma2_init=1.0):
    """Fast path returning only ``muhat1``; ``u`` must already be validated."""
    muhat1 = _filter_muhat(u, omega2, mu2_init, sigma2_init)[0]
    return np.clip(np.asarray(muhat1), 1e-15, 1 - 1e-15)


def predictive_log_score(u, omega2, mu2_init=0.0, sigma2_init=1.0):
    """Sum over trials of ``log p(u_t | u_<t)`` under the filter's predictions."""
    u = np.asarray(u, dtype=float)
    m = predicted_beliefs(u.tolist(), omega2, mu2_init, sigma2_init)
    return float(np.sum(u * np.log(m) + (1.0 - u) * np.log1p(-m)))


class HGFBeliefs(TransformerMixin, BaseEstimator):
    """Transformer mapping a binary input sequence to HGF belief trajectories.

    ``fit`` estimates the Bayes-optimal ``omega2`` when ``omega2`` is None;
    ``transform`` returns an ``(n_trials, 6)`` array with columns
    ``HgfTrajectory.columns``.

    Parameters
    ----------
    omega2 : float or None, default=None
        Tonic log-volatility. ``None`` means "use the Bayes-optimal value
        for the sequence seen in fit".
    mu2_init, sigma2_init : float
        Prior mean and variance of the second level.
    """

    def __init__(self, omega2=None, mu2_init=0.0, sigma2_init=1.0):
        self.omega2 = omega2
        self.mu2_init = mu2_init
        self.sigma2_init = sigma2_init

    def fit(self, X, y=None):
        u = check_binary(X)
        if self.omega2 is None:
            from .inference import bayes_optimal_omega2

            self.omega2_ = bayes_optimal_omega2(u, self.mu2_init, self.sigma2_init)
        else:
            self.omega2_ = float(self.omega2)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "omega2_")
        traj = hgf_filter(X, HgfParams(self.omega2_, self.mu2_init, self.sigma2_init))
        return traj.as_array()

    def get_feature_names_out(self, input_features=None):
        return np.asarray(HgfTrajectory.columns, dtype=object)
