import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pamkit.exceptions import DomainError, InputValidationError
from pamkit.hgf import (
    HGFBeliefs,
    HgfParams,
    HgfTrajectory,
    hgf_filter,
    prediction_precision,
    predictive_log_score,
    sigmoid,
)
from pamkit.simulation import generate_input_sequence

binary_seqs = st.lists(st.integers(0, 1), min_size=1, max_size=60)


def test_sigmoid_values():
    assert sigmoid(0.0) == 0.5
    assert sigmoid(1.0986) == pytest.approx(0.75, abs=1e-4)
    assert sigmoid(800.0) == 1.0
    assert sigmoid(-800.0) == 0.0


def test_prediction_precision():
    assert prediction_precision(0.5) == 4.0
    assert prediction_precision(0.8) == pytest.approx(6.25)
    assert prediction_precision(0.2) == pytest.approx(6.25)
    for bad in (0.0, 1.0):
        with pytest.raises(DomainError):
            prediction_precision(bad)


def test_single_step_against_hand_computation():
    # scalar oracle written out independently of the implementation
    omega2 = -2.86
    sh = 1.0 + math.exp(omega2)
    pi2 = 1.0 / sh + 0.25
    s2 = 1.0 / pi2
    m2 = 0.0 + s2 * 0.5
    tr = hgf_filter([1], HgfParams(omega2, 0.0, 1.0))
    assert tr.muhat1[0] == 0.5
    assert tr.sigmahat2[0] == pytest.approx(sh, rel=1e-12)
    assert tr.sigmahat2[0] == pytest.approx(1.0573, abs=1e-4)
    assert tr.mu2[0] == pytest.approx(m2, rel=1e-12)
    assert tr.mu2[0] == pytest.approx(0.4181, abs=1e-4)
    assert tr.sigma2[0] == pytest.approx(0.8363, abs=1e-4)


def test_constant_input_is_monotone():
    tr = hgf_filter(np.ones(50, dtype=int), HgfParams(-2.0))
    assert np.all(np.diff(tr.mu2) > 0)
    assert np.all(np.diff(tr.muhat1) > 0)


def test_rejects_non_binary():
    with pytest.raises(InputValidationError):
        hgf_filter([0, 1, 2])
    with pytest.raises(InputValidationError):
        hgf_filter([0, np.nan, 1])
    with pytest.raises(InputValidationError):
        HgfParams(sigma2_init=0.0)


@settings(max_examples=60, deadline=None)
@given(binary_seqs, st.floats(-8, 1))
def test_complement_symmetry(u, omega2):
    u = np.array(u)
    a = hgf_filter(u, HgfParams(omega2))
    b = hgf_filter(1 - u, HgfParams(omega2))
    np.testing.assert_allclose(b.mu2, -a.mu2, atol=1e-12)
    np.testing.assert_allclose(b.muhat1, 1 - a.muhat1, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(binary_seqs, st.floats(-8, 1), st.data())
def test_causality_and_determinism(u, omega2, data):
    k = data.draw(st.integers(1, len(u)))
    full = hgf_filter(u, HgfParams(omega2)).as_array()
    part = hgf_filter(u[:k], HgfParams(omega2)).as_array()
    assert np.array_equal(full[:k], part)
    assert np.array_equal(full, hgf_filter(u, HgfParams(omega2)).as_array())


@settings(max_examples=40, deadline=None)
@given(binary_seqs, st.floats(-8, 0), st.floats(0.1, 3))
def test_sigmahat2_monotone_in_omega2(u, omega2, delta):
    lo = hgf_filter(u, HgfParams(omega2)).sigmahat2
    hi = hgf_filter(u, HgfParams(omega2 + delta)).sigmahat2
    assert np.all(hi > lo)


def test_predictions_bounded_for_extreme_volatility():
    tr = hgf_filter(np.ones(400, dtype=int), HgfParams(5.0))
    assert np.all((tr.muhat1 > 0) & (tr.muhat1 < 1))
    assert np.all(np.isfinite(tr.pihat1))


def test_transformer_bayes_optimal_and_shape():
    u = generate_input_sequence(3)
    tf = HGFBeliefs().fit(u)
    grid = np.arange(-12, 2.001, 0.05)
    best = grid[np.argmax([predictive_log_score(u, g) for g in grid])]
    assert abs(tf.omega2_ - best) <= 0.05 + 1e-9
    out = tf.transform(u.reshape(-1, 1))
    assert out.shape == (400, 6)
    assert list(tf.get_feature_names_out()) == list(HgfTrajectory.columns)
