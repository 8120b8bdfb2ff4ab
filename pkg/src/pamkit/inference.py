"""Joint MAP estimation of perceptual and decision parameters.

Every free parameter lives in an unconstrained estimation space with a
Gaussian prior; a per-parameter transform maps it back to its native
range. The negative log-joint is minimised with BFGS using central
finite-difference gradients, and a Laplace approximation around the optimum
yields the log model evidence.
"""

import math
import warnings
from dataclasses import dataclass, field, replace
from types import SimpleNamespace

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .ddm import ddm_trial_loglik
from .exceptions import InputValidationError
from .hgf import predicted_beliefs, predictive_log_score
from .lnr import lnr_trial_loglik
from .rdm import rdm_trial_loglik

PENALTY = 1e10
OMEGA2_BOUNDS = (-12.0, 2.0)

IDENTITY, EXPONENTIAL, SCALED_SIGMOID = "identity", "exponential", "scaled_sigmoid"

MODEL_PARAMS = {
    "ddm": ("b_w", "a_a", "b_a", "a_v", "b_v", "ter"),
    "lnr": ("a", "b_val", "b", "sigma", "ter"),
    "rdm": ("a_a", "b_a", "a_v", "b_val", "b_v", "ter"),
}

TRIAL_LOGLIK = {
    "ddm": ddm_trial_loglik,
    "lnr": lnr_trial_loglik,
    "rdm": rdm_trial_loglik,
}

# configuration id -> (model, slopes fixed at 0)
CONFIGURATIONS = {
    "ddm_w": ("ddm", ("b_a", "b_v")),
    "ddm_a": ("ddm", ("b_w", "b_v")),
    "ddm_v": ("ddm", ("b_w", "b_a")),
    "ddm_full": ("ddm", ()),
    "rdm_a": ("rdm", ("b_v",)),
    "rdm_v": ("rdm", ("b_a",)),
    "rdm_full": ("rdm", ()),
    "lnr": ("lnr", ()),
}


@dataclass(frozen=True)
class ParamSpec:
    """One parameter: transform to native space plus its Gaussian prior.

    ``prior_var == 0`` fixes the parameter at ``prior_mean`` (estimation
    space) and removes it from the search.
    """

    name: str
    transform: str = IDENTITY
    prior_mean: float = 0.0
    prior_var: float = 4.0
    lo: float = None
    hi: float = None

    def __post_init__(self):
        if self.prior_var < 0:
            raise InputValidationError(f"{self.name}: prior variance must be >= 0")
        if self.transform == SCALED_SIGMOID and not self.lo < self.hi:
            raise InputValidationError(f"{self.name}: need lo < hi")
        if self.transform not in (IDENTITY, EXPONENTIAL, SCALED_SIGMOID):
            raise InputValidationError(f"unknown transform {self.transform!r}")

    @property
    def free(self):
        return self.prior_var > 0

    def to_native(self, x):
        if self.transform == EXPONENTIAL:
            return math.exp(min(x, 700.0))
        if self.transform == SCALED_SIGMOID:
            if x >= 0:
                s = 1.0 / (1.0 + math.exp(-x))
            else:
                e = math.exp(x)
                s = e / (1.0 + e)
            return self.lo + (self.hi - self.lo) * s
        return float(x)

    def to_estimation(self, value):
        if self.transform == EXPONENTIAL:
            return math.log(value)
        if self.transform == SCALED_SIGMOID:
            p = (value - self.lo) / (self.hi - self.lo)
            return math.log(p) - math.log1p(-p)
        return float(value)


@dataclass
class FitConfig:
    """Model configuration plus optimizer settings.

    Parameters
    ----------
    config_id : str
        One of ``CONFIGURATIONS`` (e.g. ``"ddm_w"``) or a bare model id.
    priors : dict
        ``name -> (mean, var)`` overrides in estimation space; a variance of
        0 fixes the parameter.
    omega2_prior_mean : float or None
        None means "Bayes-optimal value for the dataset's inputs".
    estimate_ter : bool or None
        None uses the model default (DDM estimates it, LNR/RDM fix it at 0).
    """

    config_id: str = "ddm_full"
    priors: dict = field(default_factory=dict)
    omega2_prior_mean: float = None
    omega2_prior_var: float = 4.0
    estimate_ter: bool = None
    mu2_init: float = 0.0
    sigma2_init: float = 1.0
    max_iter: int = 500
    gtol: float = 1e-4
    multistart: int = 0
    seed: int = 0

    @property
    def model(self):
        return resolve_config(self.config_id)[0]

    def to_dict(self):
        d = dict(self.__dict__)
        d["priors"] = {k: list(v) for k, v in self.priors.items()}
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InputValidationError(f"unknown config keys: {sorted(unknown)}")
        d["priors"] = {k: tuple(v) for k, v in d.get("priors", {}).items()}
        return cls(**d)


def resolve_config(config_id):
    """Return ``(model, fixed_slopes)`` for a configuration id or model id."""
    if config_id in CONFIGURATIONS:
        return CONFIGURATIONS[config_id]
    if config_id in MODEL_PARAMS:
        return config_id, ()
    raise InputValidationError(f"unknown model/configuration id {config_id!r}")


def build_param_specs(model, config=None, min_rt=None, omega2_prior_mean=-2.86):
    """Ordered parameter specs: ``omega2`` first, then the decision parameters.

    ``model`` may be a model id or a configuration id; ``config`` supplies
    prior overrides and the ter setting.
    """
    config = FitConfig(config_id=model) if config is None else config
    model, fixed = resolve_config(model)
    estimate_ter = (model == "ddm") if config.estimate_ter is None else config.estimate_ter
    if estimate_ter and not (min_rt is not None and min_rt > 0):
        raise InputValidationError("estimating ter requires a positive min_rt")

    specs = [ParamSpec("omega2", IDENTITY, omega2_prior_mean, config.omega2_prior_var)]
    for name in MODEL_PARAMS[model]:
        if name == "ter":
            spec = (
                ParamSpec("ter", SCALED_SIGMOID, 0.0, 4.0, 0.0, float(min_rt))
                if estimate_ter
                else ParamSpec("ter", IDENTITY, 0.0, 0.0)
            )
        elif name == "b_w":
            spec = ParamSpec(name, SCALED_SIGMOID, 0.0, 4.0, -1.0, 1.0)
        elif name in ("a_a", "a_v") or name == "sigma":
            spec = ParamSpec(name, EXPONENTIAL, 0.0, 4.0)
        else:
            spec = ParamSpec(name, IDENTITY, 0.0, 4.0)
        if name in fixed:
            spec = replace(spec, prior_mean=0.0, prior_var=0.0)
        specs.append(spec)

    for name, (mean, var) in config.priors.items():
        idx = [s.name for s in specs].index(name) if name in [s.name for s in specs] else None
        if idx is None:
            raise InputValidationError(f"prior override for unknown parameter {name!r}")
        specs[idx] = replace(specs[idx], prior_mean=float(mean), prior_var=float(var))
    return specs


class MapObjective:
    """Negative log-joint of a dataset as a function of the free parameters.

    Beliefs are recomputed only when ``omega2`` changes, which keeps the
    finite-difference gradient cheap.
    """

    def __init__(self, dataset, model, specs, mu2_init=0.0, sigma2_init=1.0):
        self.model = resolve_config(model)[0]
        self.specs = list(specs)
        self.free = [i for i, s in enumerate(self.specs) if s.free]
        self.u_list = dataset.u.tolist()
        valid = dataset.valid
        self.valid = valid
        self.u = dataset.u[valid]
        self.rt = dataset.rt[valid]
        self.choice = dataset.choice[valid]
        self.mu2_init = mu2_init
        self.sigma2_init = sigma2_init
        self._loglik = TRIAL_LOGLIK[self.model]
        self._cache = (None, None)
        self.n_evals = 0

    @property
    def n_free(self):
        return len(self.free)

    @property
    def free_names(self):
        return [self.specs[i].name for i in self.free]

    def initial(self):
        return np.array([self.specs[i].prior_mean for i in self.free], dtype=float)

    def full_estimation(self, x):
        est = np.array([s.prior_mean for s in self.specs], dtype=float)
        est[self.free] = x
        return est

    def native(self, x):
        est = self.full_estimation(x)
        return {s.name: s.to_native(e) for s, e in zip(self.specs, est)}

    def beliefs(self, omega2):
        if self._cache[0] != omega2:
            m = predicted_beliefs(self.u_list, omega2, self.mu2_init, self.sigma2_init)
            self._cache = (omega2, m)
        return self._cache[1]

    def trial_loglik(self, x):
        """Per-trial log-likelihood of the valid trials."""
        nat = self.native(x)
        muhat1 = self.beliefs(nat.pop("omega2"))[self.valid]
        return self._loglik(self.rt, self.choice, self.u, muhat1, SimpleNamespace(**nat))

    def log_prior(self, x):
        lp = 0.0
        for xi, i in zip(x, self.free):
            s = self.specs[i]
            lp += -0.5 * (math.log(2 * math.pi * s.prior_var) + (xi - s.prior_mean) ** 2 / s.prior_var)
        return lp

    def __call__(self, x):
        self.n_evals += 1
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            return PENALTY
        with np.errstate(all="ignore"):
            val = -(float(np.sum(self.trial_loglik(x))) + self.log_prior(x))
        return val if math.isfinite(val) else PENALTY


def map_objective(est_params, dataset, model, specs, mu2_init=0.0, sigma2_init=1.0):
    """Negative log-joint at ``est_params`` (free parameters, estimation space)."""
    obj = MapObjective(dataset, model, specs, mu2_init, sigma2_init)
    est_params = np.atleast_1d(np.asarray(est_params, dtype=float))
    if len(est_params) != obj.n_free:
        raise InputValidationError(
            f"expected {obj.n_free} free parameters, got {len(est_params)}"
        )
    return obj(est_params)


def fd_steps(x, rel=1e-5, floor=1e-7):
    return np.maximum(rel * np.abs(x), floor)


def fd_gradient(fun, x, rel=1e-5, floor=1e-7):
    """Central finite-difference gradient with relative steps."""
    x = np.asarray(x, dtype=float)
    h = fd_steps(x, rel, floor)
    g = np.empty_like(x)
    for i in range(len(x)):
        xp, xm = x.copy(), x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        g[i] = (fun(xp) - fun(xm)) / (xp[i] - xm[i])
    return g


def fd_hessian(fun, x, rel=1e-4, floor=1e-4):
    """Symmetric central finite-difference Hessian."""
    x = np.asarray(x, dtype=float)
    d = len(x)
    h = np.maximum(rel * np.abs(x), floor)
    H = np.empty((d, d))
    f0 = fun(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h[i]
        H[i, i] = (fun(x + ei) - 2.0 * f0 + fun(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(d)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                fun(x + ei + ej) - fun(x + ei - ej) - fun(x - ei + ej) + fun(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return H


def laplace_log_evidence(fun, x_opt, f_opt=None, hessian=None):
    """Laplace approximation of ``log integral exp(-fun(x)) dx`` around a minimum.

    Returns ``(lme, hessian)``; ``lme`` is None when the Hessian is not
    positive definite.
    """
    x_opt = np.atleast_1d(np.asarray(x_opt, dtype=float))
    f_opt = fun(x_opt) if f_opt is None else f_opt
    d = len(x_opt)
    if d == 0:
        return -f_opt, np.zeros((0, 0))
    H = fd_hessian(fun, x_opt) if hessian is None else hessian
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        return None, H
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    return -f_opt + 0.5 * d * math.log(2 * math.pi) - 0.5 * logdet, H


@dataclass
class FitResult:
    model: str
    config_id: str
    native: dict
    estimation: dict
    free_names: list
    log_joint: float
    loglik: float
    trial_loglik: np.ndarray
    lme: float
    aic: float
    bic: float
    n_iter: int
    grad_norm: float
    converged: bool
    n_valid: int
    n_evals: int = 0
    message: str = ""
    objective_trace: list = field(default_factory=list)

    @property
    def n_free(self):
        return len(self.free_names)

    def to_dict(self):
        return {
            "model": self.model,
            "config_id": self.config_id,
            "native": self.native,
            "estimation": self.estimation,
            "free_parameters": list(self.free_names),
            "log_joint": self.log_joint,
            "loglik": self.loglik,
            "lme": self.lme,
            "aic": self.aic,
            "bic": self.bic,
            "n_valid": self.n_valid,
            "diagnostics": {
                "n_iter": self.n_iter,
                "grad_norm": self.grad_norm,
                "converged": self.converged,
                "n_evals": self.n_evals,
                "message": self.message,
            },
            "trial_loglik": [float(v) for v in self.trial_loglik],
        }


def evidence_metrics(objective, x_opt, f_opt=None):
    """Return ``(lme, aic, bic, loglik)`` at an optimum of ``objective``."""
    x_opt = np.asarray(x_opt, dtype=float)
    f_opt = objective(x_opt) if f_opt is None else f_opt
    loglik = float(np.sum(objective.trial_loglik(x_opt)))
    d = objective.n_free
    n = len(objective.rt)
    lme, _ = laplace_log_evidence(objective, x_opt, f_opt)
    aic = -2.0 * loglik + 2.0 * d
    bic = -2.0 * loglik + d * math.log(n)
    return lme, aic, bic, loglik


def _minimize(objective, x0, config):
    trace = [objective(x0)]

    def record(xk):
        trace.append(objective(xk))

    grad = lambda x: fd_gradient(objective, x)  # noqa: E731
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(
            objective,
            x0,
            jac=grad,
            method="BFGS",
            callback=record,
            options={"maxiter": config.max_iter, "gtol": config.gtol},
        )
    return res, trace


def fit(dataset, config="ddm_full"):
    """MAP fit of one dataset.

    Parameters
    ----------
    dataset : Dataset
    config : FitConfig or str
        A configuration id is shorthand for ``FitConfig(config_id=...)``.

    Returns
    -------
    FitResult
        Always returned; ``converged`` is False when BFGS stopped early.
    """
    config = FitConfig(config_id=config) if isinstance(config, str) else config
    if dataset.n_valid < 1:
        raise InputValidationError("dataset has no valid trials")
    model = config.model
    om_mean = config.omega2_prior_mean
    if om_mean is None:
        om_mean = bayes_optimal_omega2(dataset.u, config.mu2_init, config.sigma2_init, warn=False)
    specs = build_param_specs(config.config_id, config, dataset.min_rt, om_mean)
    objective = MapObjective(dataset, model, specs, config.mu2_init, config.sigma2_init)

    if objective.n_free == 0:
        x = np.zeros(0)
        f = objective(x)
        res = SimpleNamespace(x=x, fun=f, nit=0, success=True, message="no free parameters")
        trace, gnorm = [f], 0.0
    else:
        x0 = objective.initial()
        res, trace = _minimize(objective, x0, config)
        if config.multistart:
            rng = np.random.default_rng(config.seed)
            sd = np.sqrt([specs[i].prior_var for i in objective.free])
            for _ in range(config.multistart):
                start = x0 + rng.normal(0.0, 0.5 * sd)
                cand, ctrace = _minimize(objective, start, config)
                if cand.fun < res.fun:
                    res, trace = cand, ctrace
        gnorm = float(np.linalg.norm(fd_gradient(objective, res.x)))

    lme, aic, bic, loglik = evidence_metrics(objective, res.x, res.fun)
    # BFGS often stops on line-search precision loss at a genuine optimum
    converged = bool(res.success or gnorm < 10 * config.gtol * max(1.0, abs(res.fun)) ** 0.5)
    est = objective.full_estimation(res.x)
    return FitResult(
        model=model,
        config_id=config.config_id,
        native=objective.native(res.x),
        estimation={s.name: float(e) for s, e in zip(specs, est)},
        free_names=objective.free_names,
        log_joint=-float(res.fun),
        loglik=loglik,
        trial_loglik=objective.trial_loglik(res.x),
        lme=lme,
        aic=aic,
        bic=bic,
        n_iter=int(res.nit),
        grad_norm=gnorm,
        converged=converged,
        n_valid=dataset.n_valid,
        n_evals=objective.n_evals,
        message=str(res.message),
        objective_trace=trace,
    )


def bayes_optimal_omega2(u, mu2_init=0.0, sigma2_init=1.0, bounds=OMEGA2_BOUNDS, warn=True):
    """``omega2`` maximizing the one-step-ahead predictive log score of ``u``.

    A coarse grid locates the basin, then a bounded scalar search refines it.
    """
    u = np.asarray(u, dtype=float)
    if len(u) < 2:
        raise InputValidationError("need at least two inputs")
    lo, hi = bounds
    grid = np.arange(lo, hi + 1e-9, 0.25)
    scores = [predictive_log_score(u, g, mu2_init, sigma2_init) for g in grid]
    k = int(np.argmax(scores))
    res = minimize_scalar(
        lambda om: -predictive_log_score(u, om, mu2_init, sigma2_init),
        bounds=(grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]),
        method="bounded",
        options={"xatol": 1e-4},
    )
    best = float(res.x) if -res.fun >= scores[k] else float(grid[k])
    if warn and (best - lo < 1e-2 or hi - best < 1e-2):
        warnings.warn(f"Bayes-optimal omega2 sits at the search bound ({best:.3f})")
    return best
