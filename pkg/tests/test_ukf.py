import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tractionid import ukf
from tractionid.errors import CovarianceDegeneracyError, PropagationError, SingularInnovationError
from tractionid.harness.checks import random_spd


def _cfg(n, m=None, **kw):
    m = m or n
    return ukf.UkfConfig(np.zeros((n, n)), np.eye(m), **kw)


def test_scalar_sigma_points_by_hand():
    # lambda = alpha^2 (n + kappa) - n = 2, spread sqrt(n + lambda) = sqrt(3).
    est = ukf.GaussianEstimate([0.0], [[1.0]])
    pts = ukf.generate_sigma_points(est, _cfg(1, alpha=1.0, beta=0.0, kappa=2.0))
    np.testing.assert_allclose(pts.points.ravel(), [0.0, np.sqrt(3), -np.sqrt(3)])
    np.testing.assert_allclose(pts.wm, [2 / 3, 1 / 6, 1 / 6])


def test_zero_covariance_collapses_points():
    est = ukf.GaussianEstimate([1.0, 2.0], np.zeros((2, 2)))
    pts = ukf.generate_sigma_points(est, _cfg(2))
    assert np.all(pts.points == est.mean)


@given(st.integers(0, 10_000), st.integers(1, 8))
def test_sigma_points_reconstruct_estimate(seed, n):
    rng = np.random.default_rng(seed)
    est = ukf.GaussianEstimate(rng.standard_normal(n), random_spd(rng, n))
    for alpha in (1e-3, 0.5, 1.0):
        pts = ukf.generate_sigma_points(est, _cfg(n, alpha=alpha))
        assert pts.points.shape == (2 * n + 1, n)
        assert pts.wm.sum() == pytest.approx(1.0)
        _, mean, cov = ukf.unscented_transform(pts, lambda X: X)
        np.testing.assert_allclose(mean, est.mean, rtol=0, atol=1e-10 * (1 + abs(est.mean).max()))
        np.testing.assert_allclose(cov, est.cov, rtol=0, atol=1e-10 * abs(est.cov).max())


def test_predict_identity_and_additive_noise():
    rng = np.random.default_rng(0)
    est = ukf.GaussianEstimate(rng.standard_normal(3), random_spd(rng, 3))
    pts = ukf.generate_sigma_points(est, _cfg(3, alpha=1.0))
    out = ukf.predict(pts, lambda X, u: X, None, np.zeros((3, 3)))
    np.testing.assert_allclose(out.mean, est.mean, atol=1e-14)
    np.testing.assert_allclose(out.cov, est.cov, atol=1e-14)
    Q = random_spd(rng, 3)
    out = ukf.predict(pts, lambda X, u: X, None, Q)
    np.testing.assert_allclose(out.cov - est.cov, Q, atol=1e-13)


@given(st.integers(0, 10_000))
def test_predict_linear_map_is_exact(seed):
    rng = np.random.default_rng(seed)
    n = 4
    A = rng.standard_normal((n, n))
    est = ukf.GaussianEstimate(rng.standard_normal(n), random_spd(rng, n))
    pts = ukf.generate_sigma_points(est, _cfg(n, alpha=0.5))
    out = ukf.predict(pts, lambda X, u: X @ A.T, None, np.zeros((n, n)))
    np.testing.assert_allclose(out.mean, A @ est.mean, atol=1e-12)
    np.testing.assert_allclose(out.cov, A @ est.cov @ A.T, atol=1e-11)


def test_scalar_update_by_hand():
    prior = ukf.GaussianEstimate([0.0], [[1.0]])
    cfg = _cfg(1)
    post, nu, S = ukf.update(prior, ukf.generate_sigma_points(prior, cfg), lambda X: X, [1.0], [[1.0]])
    assert post.mean[0] == pytest.approx(0.5)
    assert post.cov[0, 0] == pytest.approx(0.5)
    assert nu[0] == pytest.approx(1.0)
    assert S[0, 0] == pytest.approx(2.0)


def test_zero_innovation_keeps_mean():
    rng = np.random.default_rng(1)
    prior = ukf.GaussianEstimate(rng.standard_normal(3), random_spd(rng, 3))
    pts = ukf.generate_sigma_points(prior, _cfg(3))
    post, _, _ = ukf.update(prior, pts, lambda X: X[:, :2], prior.mean[:2], np.eye(2))
    np.testing.assert_allclose(post.mean, prior.mean, atol=1e-12)


def test_uninformative_measurement_keeps_prior():
    rng = np.random.default_rng(2)
    prior = ukf.GaussianEstimate(rng.standard_normal(3), random_spd(rng, 3))
    pts = ukf.generate_sigma_points(prior, _cfg(3))
    post, _, _ = ukf.update(prior, pts, lambda X: X, prior.mean + 1.0, 1e12 * np.eye(3))
    np.testing.assert_allclose(post.mean, prior.mean, rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose(post.cov, prior.cov, rtol=1e-6)


@given(st.integers(0, 10_000))
def test_measurement_never_adds_uncertainty(seed):
    rng = np.random.default_rng(seed)
    prior = ukf.GaussianEstimate(rng.standard_normal(4), random_spd(rng, 4))
    H = rng.standard_normal((2, 4))
    pts = ukf.generate_sigma_points(prior, _cfg(4))
    post, _, _ = ukf.update(prior, pts, lambda X: X @ H.T, rng.standard_normal(2), random_spd(rng, 2))
    assert np.trace(post.cov) <= np.trace(prior.cov) + 1e-12


def test_matches_kalman_filter():
    from tractionid.harness.checks import kf_equivalence
    assert kf_equivalence(seeds=range(5), steps=50) <= 1e-8


def test_long_run_stays_symmetric_and_factorizable():
    rng = np.random.default_rng(3)
    n, m = 4, 2
    F = rng.standard_normal((n, n))
    F *= 0.9 / max(abs(np.linalg.eigvals(F)))
    H = rng.standard_normal((m, n))
    cfg = ukf.UkfConfig(random_spd(rng, n, 0.01), random_spd(rng, m))
    est = ukf.GaussianEstimate(np.zeros(n), np.eye(n))
    for _ in range(10_000):
        est, *_ = ukf.ukf_step(est, lambda X, u: X @ F.T, lambda X: X @ H.T, None,
                               rng.standard_normal(m), cfg)
        assert np.array_equal(est.cov, est.cov.T)
        ukf.chol_with_jitter(est.cov)


def test_chol_jitter_rescues_semidefinite_and_rejects_indefinite():
    v = np.array([[1.0], [1.0]])
    L = ukf.chol_with_jitter(v @ v.T)
    np.testing.assert_allclose(L @ L.T, v @ v.T, atol=1e-6)
    with pytest.raises(CovarianceDegeneracyError):
        ukf.chol_with_jitter(np.diag([1.0, -1.0]))


def test_non_finite_propagation_names_point():
    est = ukf.GaussianEstimate([0.0, 0.0], np.eye(2))
    pts = ukf.generate_sigma_points(est, _cfg(2))

    def f(X, u):
        Y = X.copy()
        Y[3, 0] = np.nan
        return Y
    with pytest.raises(PropagationError) as info:
        ukf.predict(pts, f, None, np.zeros((2, 2)))
    assert info.value.index == 3


def test_singular_innovation():
    prior = ukf.GaussianEstimate([0.0], np.zeros((1, 1)))
    pts = ukf.generate_sigma_points(prior, _cfg(1))
    with pytest.raises(SingularInnovationError):
        ukf.update(prior, pts, lambda X: X, [1.0], [[0.0]])


def test_config_validation():
    with pytest.raises(ValueError):
        ukf.UkfConfig(np.eye(1), np.eye(1), alpha=0.0)
    with pytest.raises(ValueError):
        ukf.GaussianEstimate([0.0, 1.0], np.eye(3))
