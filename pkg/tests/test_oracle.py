"""Dense LDLT oracle: factorization, solving, Schur reduction."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hmvp import dense_min_variance, dense_schur, ldlt_factor, ldlt_solve
from hmvp.covariance import ValidationConfig
from hmvp.errors import (
    DimensionMismatch,
    NotPositiveDefinite,
    NotSymmetric,
    SingularTrailingBlock,
)


def _random_spd(rng, n, spread=1.0):
    f = rng.standard_normal((n, n))
    a = f @ f.T + n * spread * np.eye(n)
    return 0.5 * (a + a.T)


@pytest.mark.parametrize("n", [1, 2, 3, 17, 96, 97, 200])
def test_factor_reconstructs(n, rng):
    a = _random_spd(rng, n)
    lower, pivots, perm = ldlt_factor(a, check=True)  # internal self-check on
    rebuilt = lower @ np.diag(pivots) @ lower.T
    assert np.allclose(rebuilt, a[np.ix_(perm, perm)], atol=1e-10 * np.abs(a).max())
    assert np.all(pivots > 0)
    assert np.allclose(np.diag(lower), 1.0)
    assert sorted(perm) == list(range(n))


def test_solve_matches_numpy(rng):
    a = _random_spd(rng, 150)
    b = rng.standard_normal(150)
    lower, pivots, perm = ldlt_factor(a)
    x = ldlt_solve(lower, pivots, perm, b)
    assert np.allclose(x, np.linalg.solve(a, b), atol=1e-9)
    # matrix right-hand side
    bm = rng.standard_normal((150, 4))
    xm = ldlt_solve(lower, pivots, perm, bm)
    assert np.allclose(xm, np.linalg.solve(a, bm), atol=1e-9)


def test_factor_rejects_indefinite(rng):
    a = _random_spd(rng, 40)
    a[7, 7] = -50.0
    with pytest.raises(NotPositiveDefinite):
        ldlt_factor(a)


def test_factor_semidefinite_without_pd_requirement(rng):
    # a singular matrix: require_pd=False digs until the zero pivot
    v = rng.standard_normal(12)
    a = np.outer(v, v)
    with pytest.raises(SingularTrailingBlock):
        ldlt_factor(a, require_pd=False)


def test_indefinite_factorization_allowed_without_pd(rng):
    a = _random_spd(rng, 30)
    a[4, 4] = -40.0
    lower, pivots, perm = ldlt_factor(a, require_pd=False)
    assert (pivots < 0).any()
    rebuilt = lower @ np.diag(pivots) @ lower.T
    assert np.allclose(rebuilt, a[np.ix_(perm, perm)], atol=1e-9 * np.abs(a).max())


def test_dense_min_variance_closed_form(rng):
    sigma = _random_spd(rng, 60)
    result = dense_min_variance(sigma)
    inv1 = np.linalg.solve(sigma, np.ones(60))
    expected = inv1 / inv1.sum()
    assert np.allclose(result.weights, expected, atol=1e-10)
    assert np.isclose(result.total_variance, 1.0 / inv1.sum(), rtol=1e-10)
    assert result.condition_estimate >= 1.0
    assert np.isclose(result.weights.sum(), 1.0, atol=1e-12)


def test_dense_min_variance_validates(rng):
    with pytest.raises(DimensionMismatch):
        dense_min_variance(np.ones((3, 4)))
    a = _random_spd(rng, 5)
    a[0, 1] += 1e-3
    with pytest.raises(NotSymmetric):
        dense_min_variance(a)
    with pytest.raises(NotPositiveDefinite):
        dense_min_variance(np.diag([1.0, 1.0, -1.0]))


def test_dense_min_variance_self_check(rng):
    result = dense_min_variance(_random_spd(rng, 33), check=True)
    assert np.isfinite(result.total_variance)


@given(st.integers(min_value=0, max_value=10 ** 6))
def test_schur_inverse_identity(seed):
    # the inverse of the reduced matrix is the leading block of the inverse
    rng = np.random.default_rng(seed)
    n, js = 14, 5
    a = _random_spd(rng, n)
    s = dense_schur(a, js)
    expected = np.linalg.inv(np.linalg.inv(a)[:js, :js])
    assert np.allclose(s, expected, atol=1e-8 * np.abs(a).max())
    assert np.allclose(s, s.T)


def test_schur_block_diagonal_is_identity_map(rng):
    a_block = _random_spd(rng, 6)
    d_block = _random_spd(rng, 9)
    full = np.zeros((15, 15))
    full[:6, :6] = a_block
    full[6:, 6:] = d_block
    assert np.allclose(dense_schur(full, 6), a_block, atol=1e-12)


def test_schur_junction_size_bounds(rng):
    a = _random_spd(rng, 10)
    with pytest.raises(DimensionMismatch):
        dense_schur(a, 0)
    with pytest.raises(DimensionMismatch):
        dense_schur(a, 10)


def test_oracle_handles_scaled_assets(rng):
    # wildly different variances: diagonal congruence keeps the matrix PD
    # while spreading pivots over several orders of magnitude
    scales = 10.0 ** rng.uniform(-1.5, 1.5, 80)
    a = _random_spd(rng, 80) * np.outer(scales, scales)
    a = 0.5 * (a + a.T)
    result = dense_min_variance(a, ValidationConfig(pd_tol=1e-14))
    inv1 = np.linalg.solve(a, np.ones(80))
    expected = inv1 / inv1.sum()
    scale = np.max(np.abs(expected))
    assert np.max(np.abs(result.weights - expected)) <= 1e-6 * max(scale, 1.0)
    assert result.condition_estimate > 1e3
