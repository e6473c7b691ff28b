import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tractionid.aukf import (
    AdaptationState, SupervisorConfig, dynamics_intensity, effective_process_noise,
    fuzzy_intensity, memberships, supervisor_factor, update_adaptation,
)
from tractionid.harness.checks import random_spd


def test_empty_window_is_identity():
    state = AdaptationState()
    assert state.scale == 1.0
    np.testing.assert_array_equal(state.matrix, np.eye(10))


def _feed(state, rng, S, inflate):
    L = np.linalg.cholesky(S)
    for _ in range(state.window):
        update_adaptation(state, inflate * L @ rng.standard_normal(S.shape[0]), S)
    return state


def test_consistent_innovations_give_unit_scale():
    rng = np.random.default_rng(0)
    S = random_spd(rng, 5)
    state = _feed(AdaptationState(window=20_000), rng, S, 1.0)
    assert state.scale == pytest.approx(1.0, abs=0.05)


def test_inflated_innovations_hit_the_ceiling():
    rng = np.random.default_rng(1)
    S = random_spd(rng, 5)
    state = _feed(AdaptationState(window=30), rng, S, 10.0)
    assert state.scale >= 0.6 * state.a_max


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=60), st.floats(1e-6, 1e3))
def test_scale_stays_clamped(values, s):
    state = AdaptationState(window=7, a_min=1.0, a_max=50.0)
    for v in values:
        update_adaptation(state, [v], [[s]])
        assert 1.0 <= state.scale <= 50.0
    assert len(state.innovations) <= 7


def test_adaptation_validation():
    with pytest.raises(ValueError):
        AdaptationState(window=0)
    with pytest.raises(ValueError):
        AdaptationState(a_min=5.0, a_max=1.0)


def test_memberships():
    np.testing.assert_allclose(memberships(0.0), [1, 0, 0])
    np.testing.assert_allclose(memberships(0.5), [0, 1, 0])
    np.testing.assert_allclose(memberships(1.0), [0, 0, 1])
    np.testing.assert_allclose(memberships(0.25), [0.5, 0.5, 0])
    np.testing.assert_allclose(memberships(-3.0), [1, 0, 0])


def test_fuzzy_intensity_corners():
    assert fuzzy_intensity(0.0, 0.0) == 0.0
    assert fuzzy_intensity(1.0, 0.0) == 1.0
    assert fuzzy_intensity(0.0, 1.0) == 1.0
    assert fuzzy_intensity(0.5, 0.5) == pytest.approx(0.5)
    # z = 0.25 on one input: low 0.5, medium 0.5 -> centroid 0.25.
    assert fuzzy_intensity(0.25, 0.0) == pytest.approx(0.25)


def _ramp(rate_omega, rate_v, cfg, n=20):
    t = np.arange(n) * cfg.dt
    omega = np.outer(10 + rate_omega * t, np.ones(4))
    return omega, 2 + rate_v * t


def test_dynamics_intensity_examples():
    cfg = SupervisorConfig()
    assert dynamics_intensity(*_ramp(0.0, 0.0, cfg), cfg) == 0.0
    assert dynamics_intensity(*_ramp(100.0, 10.0, cfg), cfg) == 1.0
    mid_w = sum(cfg.omega_thresholds) / 2
    mid_v = sum(cfg.speed_thresholds) / 2
    assert dynamics_intensity(*_ramp(mid_w, mid_v, cfg), cfg) == pytest.approx(0.5)
    assert dynamics_intensity(np.ones((1, 4)), [1.0], cfg) == 0.0


@given(st.integers(0, 1000), st.floats(0.0, 5.0), st.floats(0.0, 5.0))
def test_dynamics_intensity_monotone_in_scale(seed, k1, k2):
    cfg = SupervisorConfig()
    rng = np.random.default_rng(seed)
    dw = rng.standard_normal((20, 4)).cumsum(axis=0)
    dv = rng.standard_normal(20).cumsum() * 0.2
    lo, hi = sorted((k1, k2))
    assert dynamics_intensity(lo * dw, lo * dv, cfg) <= dynamics_intensity(hi * dw, hi * dv, cfg) + 1e-12


def test_supervisor_factor_bounds():
    cfg = SupervisorConfig(lambda_min=0.2, lambda_max=0.8)
    assert supervisor_factor(0.0, cfg) == 0.2
    assert supervisor_factor(1.0, cfg) == 0.8
    with pytest.raises(ValueError):
        SupervisorConfig(lambda_min=0.9, lambda_max=0.1)
    with pytest.raises(ValueError):
        SupervisorConfig(window=1)
    with pytest.raises(ValueError):
        SupervisorConfig(omega_thresholds=(1.0, 1.0))


def test_effective_process_noise_examples():
    Q = np.diag([1.0, 2.0, 3.0])
    np.testing.assert_allclose(effective_process_noise(Q, 7.0 * np.eye(3), 0.0), Q)
    np.testing.assert_allclose(effective_process_noise(Q, 2.0 * np.eye(3), 1.0), 2 * Q)
    np.testing.assert_allclose(effective_process_noise(Q, 3.0 * np.eye(3), 0.5), 2 * Q)
    np.testing.assert_allclose(effective_process_noise(Q, 3.0, 0.5), 2 * Q)
    with pytest.raises(ValueError):
        effective_process_noise(Q, 1.0, 1.5)


@given(st.integers(0, 1000), st.floats(0.0, 1.0), st.floats(1.0, 100.0))
def test_effective_noise_is_spsd(seed, lam, a):
    Q = random_spd(np.random.default_rng(seed), 4, 0.0)
    Qe = effective_process_noise(Q, a, lam)
    assert np.array_equal(Qe, Qe.T)
    assert np.linalg.eigvalsh(Qe).min() >= -1e-12 * np.abs(Q).max()
