import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from pamkit.dataset import Dataset
from pamkit.exceptions import InputValidationError
from pamkit.hgf import predictive_log_score
from pamkit.inference import (
    PENALTY,
    FitConfig,
    MapObjective,
    ParamSpec,
    bayes_optimal_omega2,
    build_param_specs,
    fd_gradient,
    fd_hessian,
    fit,
    laplace_log_evidence,
    map_objective,
)
from pamkit.simulation import generate_input_sequence, simulate_dataset

DDM_TRUTH = dict(b_w=0.3, a_a=1.2, b_a=0.0, a_v=2.0, b_v=0.0, ter=0.15)


@pytest.fixture(scope="module")
def ddm_data():
    u = generate_input_sequence(0)
    return simulate_dataset("ddm", DDM_TRUTH, u, -4.0, np.random.default_rng(1))


@settings(max_examples=100, deadline=None)
@given(st.floats(-15, 15))
def test_transform_round_trip(x):
    for spec in (
        ParamSpec("p", "identity"),
        ParamSpec("p", "exponential"),
        ParamSpec("p", "scaled_sigmoid", lo=-1.0, hi=1.0),
        ParamSpec("p", "scaled_sigmoid", lo=0.0, hi=0.3),
    ):
        y = spec.to_native(x)
        if spec.transform == "scaled_sigmoid":
            assert spec.lo < y < spec.hi or abs(x) > 13
            if abs(x) > 13:
                continue
        assert spec.to_estimation(y) == pytest.approx(x, abs=1e-9)


def test_param_spec_validation():
    with pytest.raises(InputValidationError):
        ParamSpec("p", prior_var=-1.0)
    with pytest.raises(InputValidationError):
        ParamSpec("p", "scaled_sigmoid", lo=1.0, hi=0.0)
    with pytest.raises(InputValidationError):
        ParamSpec("p", "softplus")


def test_config_fixes_slopes():
    specs = {s.name: s for s in build_param_specs("ddm_w", min_rt=0.3)}
    assert specs["b_a"].prior_var == 0 and specs["b_v"].prior_var == 0
    assert specs["b_w"].free and specs["ter"].free
    assert specs["ter"].hi == 0.3
    rdm = {s.name: s for s in build_param_specs("rdm_v")}
    assert not rdm["b_a"].free and rdm["b_v"].free and not rdm["ter"].free
    with pytest.raises(InputValidationError):
        build_param_specs("ddm_w")
    with pytest.raises(InputValidationError):
        build_param_specs("nope")
    with pytest.raises(InputValidationError):
        build_param_specs("lnr", FitConfig("lnr", priors={"zz": (0, 1)}))


def test_fd_gradient_and_hessian_against_analytic():
    A = np.array([[3.0, 0.4, 0.1], [0.4, 2.0, -0.3], [0.1, -0.3, 1.5]])

    def f(x):
        return 0.5 * x @ A @ x + np.sin(x[0]) + 0.1 * x[2] ** 4

    x = np.array([0.3, -1.2, 0.7])
    grad = A @ x + np.array([np.cos(x[0]), 0.0, 0.4 * x[2] ** 3])
    np.testing.assert_allclose(fd_gradient(f, x), grad, rtol=1e-7, atol=1e-8)
    hess = A + np.diag([-np.sin(x[0]), 0.0, 1.2 * x[2] ** 2])
    np.testing.assert_allclose(fd_hessian(f, x), hess, rtol=1e-5, atol=1e-6)


def test_laplace_exact_for_gaussian():
    # conjugate Gaussian: the Laplace approximation is exact
    A = np.array([[2.0, 0.5], [0.5, 1.0]])
    c = 3.7

    def f(x):
        return 0.5 * x @ A @ x + c

    lme, H = laplace_log_evidence(f, np.zeros(2))
    exact = -c + math.log(2 * math.pi) - 0.5 * math.log(np.linalg.det(A))
    assert lme == pytest.approx(exact, abs=1e-6)
    np.testing.assert_allclose(H, A, atol=1e-6)


def test_laplace_non_pd_returns_none():
    lme, _ = laplace_log_evidence(lambda x: -(x @ x), np.zeros(2))
    assert lme is None


def test_laplace_close_to_quadrature_on_real_objective(ddm_data):
    # one free parameter: integrate exp(-f) directly
    cfg = FitConfig(
        "ddm_w",
        omega2_prior_mean=-4.0,
        priors={"omega2": (-4.0, 0.0), "b_w": (0.62, 0.0), "a_v": (0.69, 0.0), "ter": (0.0, 0.0)},
    )
    res = fit(ddm_data, cfg)
    assert res.free_names == ["a_a"]
    specs = build_param_specs("ddm_w", cfg, ddm_data.min_rt, -4.0)
    obj = MapObjective(ddm_data, "ddm", specs)
    x0 = res.estimation["a_a"]
    f0 = obj(np.array([x0]))
    val = quad(lambda x: math.exp(f0 - obj(np.array([x]))), x0 - 1, x0 + 1, points=[x0], limit=200)[0]
    assert res.lme == pytest.approx(-f0 + math.log(val), abs=0.02)


def test_zero_free_parameters(ddm_data):
    priors = {n: (0.0, 0.0) for n in ("omega2", "b_w", "a_a", "a_v", "ter")}
    cfg = FitConfig("ddm_w", priors=priors, omega2_prior_mean=-4.0)
    res = fit(ddm_data, cfg)
    assert res.n_free == 0
    assert res.lme == pytest.approx(res.log_joint)
    assert res.converged


def test_fit_recovers_and_is_deterministic(ddm_data):
    a = fit(ddm_data, "ddm_w")
    b = fit(ddm_data, "ddm_w")
    assert a.native == b.native and a.lme == b.lme
    assert a.converged
    assert a.native["b_a"] == 0.0 and a.native["b_v"] == 0.0
    assert a.native["a_a"] == pytest.approx(1.2, abs=0.15)
    assert a.native["ter"] == pytest.approx(0.15, abs=0.02)
    assert 0 < a.native["ter"] < ddm_data.min_rt
    # the line search never accepts an uphill step
    assert np.all(np.diff(a.objective_trace) <= 1e-9)
    assert a.aic == pytest.approx(-2 * a.loglik + 2 * 5)
    assert a.bic == pytest.approx(-2 * a.loglik + 5 * math.log(a.n_valid))


def test_multistart_never_worse(ddm_data):
    base = fit(ddm_data, FitConfig("ddm_v"))
    multi = fit(ddm_data, FitConfig("ddm_v", multistart=2, seed=3))
    assert multi.log_joint >= base.log_joint - 1e-9


def test_missing_trials_excluded(ddm_data):
    rt = ddm_data.rt.copy()
    ch = ddm_data.choice.copy()
    rt[:10] = np.nan
    ch[:10] = np.nan
    rt[10] = 0.05  # anticipation
    d = Dataset(ddm_data.u, rt, ch, rt_cutoff=0.15)
    assert d.n_valid == len(rt) - 11
    res = fit(d, FitConfig("ddm_w", omega2_prior_mean=-4.0))
    assert len(res.trial_loglik) == d.n_valid
    assert res.n_valid == d.n_valid


def test_objective_penalty_and_arity(ddm_data):
    specs = build_param_specs("ddm_w", min_rt=ddm_data.min_rt, omega2_prior_mean=-4.0)
    obj = MapObjective(ddm_data, "ddm", specs)
    assert obj(np.full(obj.n_free, np.nan)) == PENALTY
    with pytest.raises(InputValidationError):
        map_objective([0.0], ddm_data, "ddm", specs)
    assert map_objective(obj.initial(), ddm_data, "ddm", specs) == pytest.approx(obj(obj.initial()))


def test_bayes_optimal_matches_fine_grid():
    u = generate_input_sequence(5)
    grid = np.arange(-12, 2.0001, 0.05)
    best = grid[np.argmax([predictive_log_score(u, g) for g in grid])]
    assert abs(bayes_optimal_omega2(u) - best) <= 0.05
    with pytest.warns(UserWarning):
        bayes_optimal_omega2(np.ones(50))
    with pytest.raises(InputValidationError):
        bayes_optimal_omega2([1])


def test_config_round_trip():
    cfg = FitConfig("rdm_a", priors={"a_a": (0.5, 1.0)}, multistart=2)
    assert FitConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(InputValidationError):
        FitConfig.from_dict({"config_id": "lnr", "bogus": 1})
