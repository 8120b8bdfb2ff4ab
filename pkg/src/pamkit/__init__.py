"""pamkit: predictive evidence accumulation models.

A two-level binary HGF turns an input sequence into trial-wise beliefs that
modulate the parameters of a drift diffusion, lognormal race or racing
diffusion decision model. Perceptual and decision parameters are fitted
jointly by MAP estimation.
"""

__version__ = "0.1.0"

from .bms import BmsResult, bms_gibbs
from .dataset import Dataset, preprocess
from .ddm import DdmParams, ddm_trial_loglik, ddm_trial_params
from .estimator import PAMEstimator
from .hgf import HGFBeliefs, HgfParams, HgfTrajectory, hgf_filter, prediction_precision, sigmoid
from .inference import (
    FitConfig,
    FitResult,
    ParamSpec,
    bayes_optimal_omega2,
    build_param_specs,
    evidence_metrics,
    fit,
    map_objective,
)
from .lnr import LnrParams, lnr_trial_loglik, lnr_trial_means
from .rdm import RdmParams, rdm_trial_loglik, rdm_trial_params, wald_logcdf, wald_logpdf
from .recovery import RecoveryReport, Scenario, run_recovery, scenario_grid
from .simulation import BlockDesign, generate_input_sequence, simulate_dataset
from .wfpt import WienerParams, wfpt_choice_prob, wfpt_logpdf, wfpt_lower_logpdf

__all__ = [
    "BlockDesign",
    "BmsResult",
    "Dataset",
    "DdmParams",
    "FitConfig",
    "FitResult",
    "HGFBeliefs",
    "HgfParams",
    "HgfTrajectory",
    "LnrParams",
    "PAMEstimator",
    "ParamSpec",
    "RdmParams",
    "RecoveryReport",
    "Scenario",
    "WienerParams",
    "bayes_optimal_omega2",
    "bms_gibbs",
    "build_param_specs",
    "ddm_trial_loglik",
    "ddm_trial_params",
    "evidence_metrics",
    "fit",
    "generate_input_sequence",
    "hgf_filter",
    "lnr_trial_loglik",
    "lnr_trial_means",
    "map_objective",
    "scenario_grid",
    "prediction_precision",
    "preprocess",
    "rdm_trial_loglik",
    "rdm_trial_params",
    "run_recovery",
    "sigmoid",
    "simulate_dataset",
    "wald_logcdf",
    "wald_logpdf",
    "wfpt_choice_prob",
    "wfpt_logpdf",
    "wfpt_lower_logpdf",
]
