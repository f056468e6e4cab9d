#  Copyright (c) 2021 robfit
import numpy as np
import pytest
import scipy.integrate
import scipy.special

from robfit.core.adaptive import estimate_alpha, log_likelihood_profile, select_maximum
from robfit.core.kernel import KernelParams
from robfit.core.partition import (PartitionTable, alpha_grid, build_table, compute_log_partition,
                                   density_in_support, log_density, truncated_loss)
from robfit.util.exception import DomainError, PartitionLookupError, TableFormatError

tau_true = 10.
log_z_gaussian = np.log(np.sqrt(2 * np.pi) * scipy.special.erf(tau_true / np.sqrt(2)))
log_z_cauchy = np.log(2 * np.sqrt(2) * np.arctan(tau_true / np.sqrt(2)))


def test_closed_form_partitions():
    assert compute_log_partition(2., tau_true) == pytest.approx(log_z_gaussian, abs=1e-5)
    assert compute_log_partition(0., tau_true) == pytest.approx(log_z_cauchy, abs=1e-5)
    # pseudo-Huber: exp(1 - sqrt(1 + r^2)) has no elementary antiderivative
    numerical, _ = scipy.integrate.quad(lambda r: np.exp(1 - np.sqrt(1 + r ** 2)), -tau_true, tau_true)
    assert compute_log_partition(1., tau_true) == pytest.approx(np.log(numerical), abs=1e-7)


def test_default_table(table):
    assert len(table) == 121
    assert table.alphas[0] == -10.
    assert table.alphas[-1] == 2.
    assert table.tau == tau_true
    assert np.all(np.isfinite(table.log_z))
    assert np.all(np.diff(table.log_z) <= 1e-12)
    assert table.log_z_at(2.) == pytest.approx(log_z_gaussian, abs=1e-5)
    assert table.log_z_at(0.) == pytest.approx(log_z_cauchy, abs=1e-5)


def test_table_verification(table):
    assert table.verify() < 1e-8


@pytest.mark.parametrize('alpha', [2., 1., 0., -2., -10.])
def test_density_normalized(table, alpha):
    c = 1.5
    params = KernelParams(alpha=alpha, c=c)
    integral, _ = scipy.integrate.quad(lambda r: np.exp(log_density(r, params, table)), -table.tau * c,
                                       table.tau * c, limit=200)
    assert integral == pytest.approx(1., abs=1e-4)
    assert truncated_loss(0.3, params, table) == pytest.approx(-log_density(0.3, params, table))


@pytest.mark.parametrize('alpha, c', [(2., 0.5), (1., 0.1), (0., 2.), (-2.5, 3.), (0.7, 1.7), (-10., 4.)])
def test_density_scale_equivariance(table, alpha, c):
    rng = np.random.default_rng(int(10 * (alpha + 10)))
    r = rng.uniform(-table.tau * c, table.tau * c, size=50)
    density = np.exp(log_density(r, KernelParams(alpha=alpha, c=c), table))
    unit_density = np.exp(log_density(r / c, KernelParams(alpha=alpha, c=1.), table))
    np.testing.assert_allclose(density, unit_density / c, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize('c', [0.05, 0.3, 1., 4.])
@pytest.mark.parametrize('outlier_fraction', [0., 0.3])
def test_argmax_ignores_log_scale(table, c, outlier_fraction):
    rng = np.random.default_rng(7)
    n = 400
    residuals = c * rng.standard_normal(n)
    n_outliers = int(outlier_fraction * n)
    residuals[:n_outliers] = rng.uniform(-8 * c, 8 * c, size=n_outliers)
    profile = log_likelihood_profile(residuals, c=c, table=table)
    without_log_c = profile + n * np.log(c)
    idx = select_maximum(table.alphas, without_log_c)
    assert idx == select_maximum(table.alphas, profile)
    assert estimate_alpha(residuals, c=c, table=table).alpha == table.alphas[idx]


def test_lookup(table):
    assert table.quantize(0.04) == 0.
    assert table.quantize(-0.06) == pytest.approx(-0.1)
    assert table.quantize(5.) == 2.
    assert table.quantize(-50.) == -10.
    assert table.index(-0.1) == 99
    with pytest.raises(PartitionLookupError):
        table.log_z_at(0.05)
    with pytest.raises(PartitionLookupError):
        log_density(1., KernelParams(alpha=0.05, c=1.), table)
    np.testing.assert_array_equal(density_in_support([-10., 10., 10.5], 1., table), [True, True, False])


def test_alpha_grid():
    grid = alpha_grid(-1., 2., 0.5)
    np.testing.assert_array_equal(grid, [-1., -0.5, 0., 0.5, 1., 1.5, 2.])
    assert alpha_grid(1., 1., 0.1).size == 1
    with pytest.raises(DomainError):
        alpha_grid(-1., 2., 0.7)
    with pytest.raises(DomainError):
        alpha_grid(2., -1., 0.1)
    with pytest.raises(DomainError):
        compute_log_partition(1., tau=0.)
    with pytest.raises(DomainError):
        compute_log_partition(1., tau=10., intervals=3)


def test_small_table():
    small = build_table(alpha_min=-2., alpha_max=2., resolution=0.5, tau=5., intervals=2 ** 10)
    assert len(small) == 9
    assert small.matches(-2., 2., 0.5, 5.)
    assert not small.matches(-10., 2., 0.1, 10.)
    single = build_table(alpha_min=1., alpha_max=1., resolution=0.1, tau=5., intervals=2 ** 10)
    assert len(single) == 1
    assert single.quantize(-3.) == 1.


def test_save_load(tmp_path, table):
    path = tmp_path / 'table.txt'
    table.save(path)
    loaded = PartitionTable.load(path)
    assert loaded == table
    assert loaded.intervals == table.intervals


def test_load_errors(tmp_path, table):
    path = tmp_path / 'table.txt'
    table.save(path)
    lines = path.read_text().splitlines()

    truncated = tmp_path / 'truncated.txt'
    truncated.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(TableFormatError, match='announces 121 values, has 120'):
        PartitionTable.load(truncated)

    unknown = tmp_path / 'unknown.txt'
    unknown.write_text("\n".join(lines[:2] + ['colour = 3'] + lines[2:]) + "\n")
    with pytest.raises(TableFormatError, match='line 3: unknown header key colour'):
        PartitionTable.load(unknown)

    garbage = tmp_path / 'garbage.txt'
    garbage.write_text("\n".join(lines[:10] + ['not-a-number'] + lines[11:]) + "\n")
    with pytest.raises(TableFormatError, match='line 11'):
        PartitionTable.load(garbage)

    with pytest.raises(TableFormatError):
        PartitionTable(alpha_min=0., alpha_max=1., resolution=0.5, tau=10., log_z=[1., 0.5])
