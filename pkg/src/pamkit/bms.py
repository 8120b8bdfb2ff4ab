"""Random-effects Bayesian model selection by Gibbs sampling.

Model frequencies ``r`` get a Dirichlet prior; each subject is assigned to one
model. Alternating draws of assignments and frequencies give the posterior
over ``r``, from which expected frequencies and exceedance probabilities
(posterior probability that a model is the most frequent) follow.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InputValidationError


@dataclass
class BmsResult:
    labels: list
    expected_frequency: np.ndarray
    exceedance: np.ndarray
    alpha: np.ndarray
    n_samples: int
    burn_in: int

    def to_dict(self):
        return {
            "labels": list(self.labels),
            "expected_frequency": [float(x) for x in self.expected_frequency],
            "exceedance_probability": [float(x) for x in self.exceedance],
            "posterior_alpha": [float(x) for x in self.alpha],
            "diagnostics": {"n_samples": self.n_samples, "burn_in": self.burn_in},
        }

    @property
    def best(self):
        return self.labels[int(np.argmax(self.exceedance))]


def _check_lme(lme):
    lme = np.asarray(lme, dtype=float)
    if lme.ndim != 2:
        raise InputValidationError("LME matrix must be 2-D (subjects x models)")
    if lme.shape[1] < 2:
        raise InputValidationError("model selection needs at least two models")
    if lme.shape[0] < 1:
        raise InputValidationError("LME matrix has no subjects")
    if not np.all(np.isfinite(lme)):
        raise InputValidationError("LME entries must be finite")
    return lme


def bms_gibbs(lme, alpha0=None, n_samples=50_000, burn_in=10_000, seed=0, labels=None):
    """Gibbs sampler over model assignments and Dirichlet model frequencies.

    Parameters
    ----------
    lme : array-like, shape (n_subjects, n_models)
        Log model evidences in nats.
    alpha0 : array-like, optional
        Dirichlet prior counts; flat (all ones) by default.

    Returns
    -------
    BmsResult
    """
    lme = _check_lme(lme)
    n, k = lme.shape
    alpha0 = np.ones(k) if alpha0 is None else np.asarray(alpha0, dtype=float)
    if alpha0.shape != (k,) or np.any(alpha0 <= 0):
        raise InputValidationError("alpha0 must hold one positive count per model")
    labels = [f"m{i + 1}" for i in range(k)] if labels is None else list(labels)
    rng = np.random.default_rng(seed)

    rel = lme - lme.max(axis=1, keepdims=True)
    lik = np.exp(rel)
    r = rng.dirichlet(alpha0)
    samples = np.empty((n_samples, k))
    count_sum = np.zeros(k)
    for it in range(burn_in + n_samples):
        post = lik * r
        post /= post.sum(axis=1, keepdims=True)
        cum = np.cumsum(post, axis=1)
        draws = (rng.random((n, 1)) > cum[:, :-1]).sum(axis=1)
        counts = np.bincount(draws, minlength=k)
        r = rng.dirichlet(alpha0 + counts)
        if it >= burn_in:
            samples[it - burn_in] = r
            count_sum += counts

    top = samples.max(axis=1, keepdims=True)
    is_top = samples == top
    unique = is_top.sum(axis=1) == 1
    exceed = (is_top & unique[:, None]).sum(axis=0) / n_samples
    return BmsResult(
        labels=labels,
        expected_frequency=samples.mean(axis=0),
        exceedance=exceed,
        alpha=alpha0 + count_sum / n_samples,
        n_samples=n_samples,
        burn_in=burn_in,
    )
