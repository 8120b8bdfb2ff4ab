"""scikit-learn style front end.

``X`` is the binary input sequence (shape ``(n,)`` or ``(n, 1)``); ``y`` holds
responses as ``(n, 2)`` ``[rt, choice]`` with NaN for missing trials.
"""

from types import SimpleNamespace

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import ndtr
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_inputs, check_responses
from .dataset import DEFAULT_RT_CUTOFF, Dataset
from .ddm import _trial_params as _ddm_trial_params
from .hgf import HgfParams, hgf_filter
from .inference import TRIAL_LOGLIK, FitConfig, fit
from .lnr import lnr_trial_means
from .rdm import _wald_logpdf, _wald_logsf, rdm_trial_params
from .simulation import _grid, simulate_responses
from .wfpt import wfpt_choice_prob


class PAMEstimator(BaseEstimator):
    """Predictive accumulation model fitted by joint MAP estimation.

    Parameters
    ----------
    model : str, default="ddm_full"
        Configuration id: ``ddm_w``, ``ddm_a``, ``ddm_v``, ``ddm_full``,
        ``rdm_a``, ``rdm_v``, ``rdm_full`` or ``lnr``.
    omega2_prior_mean : float or None
        Prior mean of ``omega2``; None uses the Bayes-optimal value of ``X``.
    omega2_prior_var : float, default=4.0
    priors : dict or None
        ``name -> (mean, var)`` overrides in estimation space.
    estimate_ter : bool or None
        None keeps the model default.
    rt_cutoff : float, default=0.15
        Responses faster than this (seconds) are treated as anticipations.

    Attributes
    ----------
    result_ : FitResult
    params_ : dict
        Native-space estimates, including ``omega2``.
    lme_, aic_, bic_ : float
    """

    def __init__(
        self,
        model="ddm_full",
        omega2_prior_mean=None,
        omega2_prior_var=4.0,
        priors=None,
        estimate_ter=None,
        mu2_init=0.0,
        sigma2_init=1.0,
        max_iter=500,
        gtol=1e-4,
        multistart=0,
        random_state=0,
        rt_cutoff=DEFAULT_RT_CUTOFF,
    ):
        self.model = model
        self.omega2_prior_mean = omega2_prior_mean
        self.omega2_prior_var = omega2_prior_var
        self.priors = priors
        self.estimate_ter = estimate_ter
        self.mu2_init = mu2_init
        self.sigma2_init = sigma2_init
        self.max_iter = max_iter
        self.gtol = gtol
        self.multistart = multistart
        self.random_state = random_state
        self.rt_cutoff = rt_cutoff

    def _config(self):
        return FitConfig(
            config_id=self.model,
            priors=dict(self.priors or {}),
            omega2_prior_mean=self.omega2_prior_mean,
            omega2_prior_var=self.omega2_prior_var,
            estimate_ter=self.estimate_ter,
            mu2_init=self.mu2_init,
            sigma2_init=self.sigma2_init,
            max_iter=self.max_iter,
            gtol=self.gtol,
            multistart=self.multistart,
            seed=self.random_state,
        )

    def fit(self, X, y):
        u = check_inputs(X)
        rt, choice = check_responses(y, len(u))
        data = Dataset(u=u, rt=rt, choice=choice, rt_cutoff=self.rt_cutoff)
        self.result_ = fit(data, self._config())
        self.params_ = dict(self.result_.native)
        self.lme_ = self.result_.lme
        self.aic_ = self.result_.aic
        self.bic_ = self.result_.bic
        self.model_ = self.result_.model
        self.n_features_in_ = 1
        return self

    def _beliefs(self, u):
        p = HgfParams(self.params_["omega2"], self.mu2_init, self.sigma2_init)
        return hgf_filter(u, p).muhat1

    def _decision_params(self):
        return {k: v for k, v in self.params_.items() if k != "omega2"}

    def transform(self, X):
        """Belief trajectory under the fitted ``omega2``, shape ``(n, 6)``."""
        check_is_fitted(self, "params_")
        u = check_inputs(X)
        p = HgfParams(self.params_["omega2"], self.mu2_init, self.sigma2_init)
        return hgf_filter(u, p).as_array()

    def score_samples(self, X, y):
        """Per-trial log-likelihood; NaN for invalid trials."""
        check_is_fitted(self, "params_")
        u = check_inputs(X)
        rt, choice = check_responses(y, len(u))
        data = Dataset(u=u, rt=rt, choice=choice, rt_cutoff=self.rt_cutoff)
        muhat1 = self._beliefs(u)
        out = np.full(len(u), np.nan)
        v = data.valid
        out[v] = TRIAL_LOGLIK[self.model_](
            rt[v], choice[v], u[v], muhat1[v], SimpleNamespace(**self._decision_params())
        )
        return out

    def score(self, X, y):
        """Total log-likelihood of the valid trials."""
        return float(np.nansum(self.score_samples(X, y)))

    def predict_proba(self, X):
        """Probability of each choice per trial, shape ``(n, 2)`` for [0, 1]."""
        check_is_fitted(self, "params_")
        u = check_inputs(X)
        muhat1 = self._beliefs(u)
        p = SimpleNamespace(**self._decision_params())
        if self.model_ == "ddm":
            v, a, w = _ddm_trial_params(muhat1, u, p)
            p1 = wfpt_choice_prob("upper", v, a, w)
        elif self.model_ == "lnr":
            t1, t0 = lnr_trial_means(muhat1, u, p)
            p1 = ndtr((t0 - t1) / (p.sigma * np.sqrt(2.0)))
        else:
            a1, a0, v1, v0 = rdm_trial_params(muhat1, u, p)
            g = _grid()[None, :]
            dens = np.exp(_wald_logpdf(g, a1[:, None], v1[:, None]) + _wald_logsf(g, a0[:, None], v0[:, None]))
            p1_raw = trapezoid(dens, g, axis=1)
            dens0 = np.exp(_wald_logpdf(g, a0[:, None], v0[:, None]) + _wald_logsf(g, a1[:, None], v1[:, None]))
            p1 = p1_raw / (p1_raw + trapezoid(dens0, g, axis=1))
        p1 = np.asarray(p1, dtype=float)
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X):
        """Most probable choice per trial."""
        return (self.predict_proba(X)[:, 1] > 0.5).astype(int)

    def sample(self, X, random_state=None):
        """Simulate responses ``(n, 2)`` [rt, choice] from the fitted model."""
        check_is_fitted(self, "params_")
        u = check_inputs(X)
        rng = np.random.default_rng(random_state)
        rt, choice = simulate_responses(self.model_, self._decision_params(), u, self._beliefs(u), rng)
        return np.column_stack([rt, choice])
