#  Copyright (c) 2021 robfit
import numdifftools
import numpy as np
import pytest

import robfit
from robfit.core.kernel import (Cauchy, GemanMcClure, KernelParams, PseudoHuber, SquaredL2, Welsch,
                                kernel_from_alpha, named_kernel, rho, rho_prime, weight)
from robfit.util.exception import DomainError, InvalidKernelParamsError

c_true = 1.3
residuals_dense = np.linspace(-10 * c_true, 10 * c_true, 2001)
alphas_generic = [2., 1.5, 1., 0.5, 0., -0.7, -2., -3.7, -10.]

named_cases = [
    (2., lambda x: x / 2),
    (1., lambda x: np.sqrt(x + 1) - 1),
    (0., lambda x: np.log(x / 2 + 1)),
    (-2., lambda x: 2 * x / (x + 4)),
]


@pytest.mark.parametrize('alpha,closed_form', named_cases)
def test_closed_forms(alpha, closed_form):
    params = KernelParams(alpha=alpha, c=c_true)
    x = (residuals_dense / c_true) ** 2
    np.testing.assert_allclose(rho(residuals_dense, params), closed_form(x), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize('alpha,kernel_cls', [(2., SquaredL2), (1., PseudoHuber), (0., Cauchy),
                                              (-2., GemanMcClure)])
def test_named_kernels_match_family(alpha, kernel_cls):
    params = KernelParams(alpha=alpha, c=c_true)
    named = kernel_cls(c=c_true)
    assert named.alpha == alpha
    np.testing.assert_allclose(named.rho(residuals_dense), params.rho(residuals_dense), rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(named.weight(residuals_dense), params.weight(residuals_dense), rtol=1e-12)
    np.testing.assert_allclose(named.rho_prime(residuals_dense), params.rho_prime(residuals_dense), rtol=1e-12,
                               atol=1e-14)
    assert named.to_params() == params


def test_welsch_limit():
    welsch = Welsch(c=c_true)
    far_negative = KernelParams(alpha=-1e6, c=c_true)
    np.testing.assert_allclose(far_negative.rho(residuals_dense), welsch.rho(residuals_dense), atol=3e-6)
    np.testing.assert_allclose(far_negative.weight(residuals_dense) * c_true ** 2,
                               welsch.weight(residuals_dense) * c_true ** 2, atol=3e-6)
    x = (residuals_dense / c_true) ** 2
    np.testing.assert_allclose(welsch.rho(residuals_dense), 1 - np.exp(-x / 2), atol=1e-15)
    assert welsch.to_params() is None


@pytest.mark.parametrize('alpha', alphas_generic)
def test_zero_and_evenness(alpha):
    params = KernelParams(alpha=alpha, c=c_true)
    assert params.rho(0.) == 0.
    assert params.weight(0.) == pytest.approx(1 / c_true ** 2, rel=1e-15)
    assert params.rho_prime(0.) == 0.
    np.testing.assert_array_equal(params.rho(-residuals_dense), params.rho(residuals_dense))
    np.testing.assert_array_equal(params.rho_prime(-residuals_dense), -params.rho_prime(residuals_dense))
    values = params.rho(residuals_dense)
    assert np.all(values >= 0)
    positive = residuals_dense[residuals_dense >= 0]
    assert np.all(np.diff(params.rho(positive)) >= 0)


@pytest.mark.parametrize('alpha', alphas_generic)
def test_derivative_numerical(alpha):
    params = KernelParams(alpha=alpha, c=c_true)
    rng = np.random.default_rng(42)
    points = rng.uniform(-8 * c_true, 8 * c_true, size=15)
    derivative = numdifftools.Derivative(lambda r: params.rho(r))
    numerical = np.array([derivative(point) for point in points])
    np.testing.assert_allclose(params.rho_prime(points), numerical, rtol=1e-6, atol=1e-10)
    np.testing.assert_allclose(params.weight(points) * points, params.rho_prime(points), rtol=1e-14)


def test_removable_singularities():
    eps = robfit.settings.options.branch_epsilon
    cauchy = KernelParams(alpha=0., c=c_true).rho(residuals_dense)
    squared = KernelParams(alpha=2., c=c_true).rho(residuals_dense)
    # inside the epsilon band the closed form limits are used
    for alpha in (eps / 10, -eps / 10):
        np.testing.assert_array_equal(KernelParams(alpha=alpha, c=c_true).rho(residuals_dense), cauchy)
    np.testing.assert_array_equal(KernelParams(alpha=2 - eps / 10, c=c_true).rho(residuals_dense), squared)
    # just outside the generic formula is close to the limits
    for alpha in (2 * eps, -2 * eps):
        values = KernelParams(alpha=alpha, c=c_true).rho(residuals_dense)
        assert np.all(np.isfinite(values))
        np.testing.assert_allclose(values, cauchy, rtol=1e-4)
    values = KernelParams(alpha=2 - 2 * eps, c=c_true).rho(residuals_dense)
    np.testing.assert_allclose(values, squared, rtol=1e-3)


def test_alpha_ordering():
    # larger alpha never gives a smaller loss
    values = np.array([KernelParams(alpha=alpha, c=c_true).rho(residuals_dense)
                       for alpha in sorted(alphas_generic)])
    assert np.all(np.diff(values, axis=0) >= -1e-12)


def test_scalar_and_shape():
    params = KernelParams(alpha=0.5, c=2.)
    assert isinstance(params.rho(1.), float)
    assert isinstance(rho_prime(1., params), float)
    matrix = np.ones((3, 4))
    assert weight(matrix, params).shape == (3, 4)


@pytest.mark.parametrize('c', [0., -1., np.nan, np.inf])
def test_invalid_scale(c):
    with pytest.raises(InvalidKernelParamsError):
        KernelParams(alpha=1., c=c)
    with pytest.raises(InvalidKernelParamsError):
        Cauchy(c=c)


def test_invalid_alpha_and_residuals():
    with pytest.raises(InvalidKernelParamsError):
        KernelParams(alpha=np.nan, c=1.)
    with pytest.raises(InvalidKernelParamsError):
        KernelParams(alpha=-np.inf, c=1.)
    params = KernelParams(alpha=1., c=1.)
    with pytest.raises(DomainError):
        params.rho([0., np.nan])
    with pytest.raises(DomainError):
        Welsch(c=1.).weight(np.inf)


def test_named_kernel_lookup():
    assert isinstance(named_kernel('huber', c=1.), PseudoHuber)
    assert isinstance(named_kernel('Geman-McClure', c=1.), GemanMcClure)
    assert isinstance(named_kernel('l2', c=1.), SquaredL2)
    with pytest.raises(InvalidKernelParamsError):
        named_kernel('tukey', c=1.)
    assert isinstance(kernel_from_alpha(-np.inf, c=1.), Welsch)
    assert isinstance(kernel_from_alpha(0., c=1.), Cauchy)
    assert kernel_from_alpha(0.5, c=1.) == KernelParams(alpha=0.5, c=1.)
    assert KernelParams(alpha=1., c=2.).with_alpha(-1.) == KernelParams(alpha=-1., c=2.)
