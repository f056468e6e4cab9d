#  Copyright (c) 2021 robfit
import numpy as np
import pytest

import robfit
from robfit.core.adaptive import (ResidualSet, estimate_alpha, log_likelihood, log_likelihood_profile,
                                  residual_mad, sample_density, select_maximum)
from robfit.util.exception import DomainError


def contaminated(rng, n, fraction, half_width=8.):
    inliers = rng.normal(0., 1., size=n)
    n_out = int(round(fraction * n))
    inliers[:n_out] = rng.uniform(-half_width, half_width, size=n_out)
    return inliers


def test_log_likelihood_zero_residuals(table):
    assert log_likelihood([0., 0., 0.], alpha=2., c=1., table=table) == pytest.approx(-2.756815599614018,
                                                                                      abs=1e-5)
    values = np.array([0.3, -1.2, 4.])
    for alpha in (2., 0., -3.):
        assert log_likelihood(values, alpha, 1., table) == log_likelihood(-values, alpha, 1., table)


def test_profile_consistent(table):
    rng = np.random.default_rng(3)
    values = rng.normal(size=50)
    profile = log_likelihood_profile(values, c=1., table=table)
    assert profile.shape == (len(table),)
    for idx in (0, 60, 120):
        assert profile[idx] == pytest.approx(log_likelihood(values, table.alphas[idx], 1., table), rel=1e-12)


def test_gaussian_residuals(table, seeds):
    for seed in seeds:
        rng = np.random.default_rng(seed)
        estimate = estimate_alpha(rng.normal(0., 1., size=10_000), c=1., table=table)
        assert estimate.alpha >= 1.5
        assert not estimate.degenerate


def test_contaminated_residuals(table, seeds):
    for seed in seeds:
        rng = np.random.default_rng(seed)
        estimate = estimate_alpha(contaminated(rng, 10_000, 0.3), c=1., table=table)
        assert estimate.alpha <= 0.


def test_contamination_monotone(table, seeds):
    for seed in seeds:
        alphas = [estimate_alpha(contaminated(np.random.default_rng(seed), 10_000, fraction), c=1.,
                                 table=table).alpha
                  for fraction in (0., 0.1, 0.3, 0.5)]
        assert all(later <= earlier + 0.1 for earlier, later in zip(alphas, alphas[1:]))


def test_recover_sampled_shape(table):
    rng = np.random.default_rng(11)
    values = sample_density(100_000, alpha=0., c=1., table=table, rng=rng)
    assert np.all(np.abs(values) <= table.tau)
    estimate = estimate_alpha(values, c=1., table=table)
    assert -0.3 <= estimate.alpha <= 0.3
    assert estimate.log_likelihood >= np.max(estimate.profile)


def test_degenerate(table):
    estimate = estimate_alpha(np.zeros(100), c=1., table=table)
    assert estimate.degenerate
    assert estimate.alpha == 2.
    assert estimate.mad == 0.
    single = estimate_alpha([0.7], c=1., table=table)
    assert single.degenerate
    assert single.n_used == 1


def test_ties_resolve_to_largest_alpha():
    alphas = np.array([0., 1., 2.])
    assert select_maximum(alphas, np.array([1., 3., 3.])) == 2
    assert select_maximum(alphas[::-1], np.array([3., 3., 1.])) == 0
    assert select_maximum(alphas, np.array([5., 3., 3.])) == 0


def test_subsampling(table):
    rng = np.random.default_rng(5)
    values = rng.normal(size=5_000)
    first = estimate_alpha(values, c=1., table=table, subsample_cap=1_000, subsample_seed=7)
    second = estimate_alpha(values, c=1., table=table, subsample_cap=1_000, subsample_seed=7)
    assert first.n_used == 1_000
    assert first.n_total == 5_000
    np.testing.assert_array_equal(first.profile, second.profile)
    full = estimate_alpha(values, c=1., table=table)
    assert full.n_used == 5_000


def test_independent_of_workers(table):
    rng = np.random.default_rng(8)
    values = contaminated(rng, 2_000, 0.2)
    robfit.run.set_n_cpu(1)
    sequential = estimate_alpha(values, c=1., table=table)
    robfit.run.set_n_cpu(4)
    parallel = estimate_alpha(values, c=1., table=table)
    assert sequential.alpha == parallel.alpha
    np.testing.assert_array_equal(sequential.profile, parallel.profile)


def test_invalid_residuals(table):
    with pytest.raises(DomainError):
        ResidualSet([])
    with pytest.raises(DomainError):
        estimate_alpha([1., np.nan], c=1., table=table)
    with pytest.raises(DomainError):
        log_likelihood_profile([1.], c=0., table=table)
    assert residual_mad([1., 2., 3., 4., 100.]) == 1.


def test_to_dict(table):
    estimate = estimate_alpha([0.1, -0.4, 2.], c=1., table=table)
    result = estimate.to_dict()
    assert set(result) == {'alpha', 'log_likelihood', 'degenerate', 'n_used', 'n_total', 'mad', 'profile'}
    assert len(result['profile']) == len(table)
    assert result['profile'][-1]['alpha'] == 2.
