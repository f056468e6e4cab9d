"""The generalized robust kernel, its derivative, the IRLS weight and the named special cases.

All functions are vectorized: they accept a scalar or an array of residuals and return the same shape
(a python float for scalar input). Residuals are given in their own units; the scale `c` is applied inside
the formulas.
"""

#  Copyright (c) 2021 robfit
from typing import Optional, Union

import numpy as np

from .. import settings
from ..util import ztyping
from ..util.exception import DomainError, InvalidKernelParamsError
from .interfaces import RobustKernel


def _convert_residuals(r: ztyping.ResidualInput) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)
    if not np.all(np.isfinite(r)):
        raise DomainError(f"Residuals have to be finite, got non-finite values in {r}.")
    return r


def _convert_output(value: np.ndarray, like: np.ndarray) -> ztyping.ResidualReturn:
    if np.ndim(like) == 0:
        return float(value)
    return value


def _squared_norm(r: np.ndarray, c: float) -> np.ndarray:
    # evaluated through |r|, which makes everything exactly even in r
    return (np.abs(r) / c) ** 2


class KernelParams(RobustKernel):

    def __init__(self, alpha: ztyping.AlphaType, c: ztyping.ScaleType):
        """Shape `alpha` and scale `c` of the generalized robust kernel.

        Args:
            alpha: Shape parameter, finite. 2 is the squared loss, 1 pseudo-Huber, 0 Cauchy and -2 Geman-McClure.
                The Welsch limit (alpha to minus infinity) is available as :py:class:`Welsch`.
            c: Scale parameter, in units of the residual. Has to be positive.

        Raises:
            InvalidKernelParamsError: if `c` is not positive or one of the values is not finite.
        """
        alpha = float(alpha)
        c = float(c)
        if not np.isfinite(alpha):
            raise InvalidKernelParamsError(f"alpha has to be finite, not {alpha}. Use `Welsch` for the limit.")
        if not (np.isfinite(c) and c > 0):
            raise InvalidKernelParamsError(f"The scale c has to be positive and finite, not {c}.")
        self._alpha = alpha
        self._c = c

    @property
    def alpha(self) -> float:
        return self._alpha

    @property
    def c(self) -> float:
        return self._c

    @property
    def name(self) -> str:
        return f"alpha={self.alpha:g}"

    def rho(self, r: ztyping.ResidualInput) -> ztyping.ResidualReturn:
        return rho(r, self)

    def rho_prime(self, r: ztyping.ResidualInput) -> ztyping.ResidualReturn:
        return rho_prime(r, self)

    def weight(self, r: ztyping.ResidualInput) -> ztyping.ResidualReturn:
        return weight(r, self)

    def with_alpha(self, alpha: ztyping.AlphaType) -> "KernelParams":
        return type(self)(alpha=alpha, c=self.c)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KernelParams):
            return NotImplemented
        return self.alpha == other.alpha and self.c == other.c

    def __hash__(self):
        return hash((self.alpha, self.c))

    def __repr__(self) -> str:
        return f"<KernelParams alpha={self.alpha}, c={self.c}>"


def _branch(alpha: float) -> str:
    eps = settings.options.branch_epsilon
    if abs(alpha - 2.) < eps:
        return 'squared'
    if abs(alpha) < eps:
        return 'cauchy'
    return 'generic'


def _rho_normalized(x: np.ndarray, alpha: float) -> np.ndarray:
    """Loss as a function of the squared normalized residual x = (r/c)^2."""
    branch = _branch(alpha)
    if branch == 'squared':
        return x / 2
    if branch == 'cauchy':
        return np.log1p(x / 2)
    b = abs(alpha - 2.)
    return b / alpha * np.expm1(alpha / 2 * np.log1p(x / b))


def _weight_normalized(x: np.ndarray, alpha: float, c: float) -> np.ndarray:
    branch = _branch(alpha)
    if branch == 'squared':
        return np.full_like(x, 1. / c ** 2)
    if branch == 'cauchy':
        return 1. / (x / 2 + 1.) / c ** 2
    b = abs(alpha - 2.)
    return np.exp((alpha / 2 - 1.) * np.log1p(x / b)) / c ** 2


def rho(r: ztyping.ResidualInput, params: RobustKernel) -> ztyping.ResidualReturn:
    """Generalized robust loss rho(r, alpha, c), non-negative, even and zero at r = 0.

    Near the removable singularities alpha = 0 and alpha = 2 the closed form limits log((r/c)^2/2 + 1)
    and (r/c)^2/2 are used.

    Args:
        r: Residual(s), finite.
        params: The kernel. Named kernels evaluate their own closed form.

    Raises:
        DomainError: if a residual is not finite.
    """
    if not isinstance(params, KernelParams):
        return params.rho(r)
    r = _convert_residuals(r)
    value = _rho_normalized(_squared_norm(r, params.c), params.alpha)
    return _convert_output(value, r)


def weight(r: ztyping.ResidualInput, params: RobustKernel) -> ztyping.ResidualReturn:
    """IRLS weight rho'(r)/r from its closed form (1/c^2)((r/c)^2/|alpha - 2| + 1)^(alpha/2 - 1).

    No division by `r` is performed, the weight at r = 0 is 1/c^2.
    """
    if not isinstance(params, KernelParams):
        return params.weight(r)
    r = _convert_residuals(r)
    value = _weight_normalized(_squared_norm(r, params.c), params.alpha, params.c)
    return _convert_output(value, r)


def rho_prime(r: ztyping.ResidualInput, params: RobustKernel) -> ztyping.ResidualReturn:
    """Derivative of :py:func:`rho` with respect to the residual, odd in `r`."""
    if not isinstance(params, KernelParams):
        return params.rho_prime(r)
    r = _convert_residuals(r)
    value = r * _weight_normalized(_squared_norm(r, params.c), params.alpha, params.c)
    return _convert_output(value, r)


class NamedKernel(RobustKernel):
    _ALPHA = None
    _NAME = None

    def __init__(self, c: ztyping.ScaleType):
        """Closed form special case of the generalized kernel with scale `c`."""
        c = float(c)
        if not (np.isfinite(c) and c > 0):
            raise InvalidKernelParamsError(f"The scale c has to be positive and finite, not {c}.")
        self._c = c

    @property
    def c(self) -> float:
        return self._c

    @property
    def alpha(self) -> float:
        return self._ALPHA

    @property
    def name(self) -> str:
        return self._NAME

    def _rho(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _weight(self, x: np.ndarray) -> np.ndarray:
        """Weight times c^2 as a function of x = (r/c)^2."""
        raise NotImplementedError

    def rho(self, r: ztyping.ResidualInput) -> ztyping.ResidualReturn:
        r = _convert_residuals(r)
        return _convert_output(self._rho(_squared_norm(r, self.c)), r)

    def weight(self, r: ztyping.ResidualInput) -> ztyping.ResidualReturn:
        r = _convert_residuals(r)
        return _convert_output(self._weight(_squared_norm(r, self.c)) / self.c ** 2, r)

    def rho_prime(self, r: ztyping.ResidualInput) -> ztyping.ResidualReturn:
        r = _convert_residuals(r)
        return _convert_output(r * self._weight(_squared_norm(r, self.c)) / self.c ** 2, r)

    def to_params(self) -> Optional[KernelParams]:
        """The equivalent :py:class:`KernelParams` or None for the Welsch limit."""
        if not np.isfinite(self.alpha):
            return None
        return KernelParams(alpha=self.alpha, c=self.c)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NamedKernel):
            return NotImplemented
        return type(self) is type(other) and self.c == other.c

    def __hash__(self):
        return hash((self.name, self.c))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} c={self.c}>"


class SquaredL2(NamedKernel):
    _ALPHA = 2.
    _NAME = 'squared'

    def _rho(self, x):
        return x / 2

    def _weight(self, x):
        return np.ones_like(x)


class PseudoHuber(NamedKernel):
    _ALPHA = 1.
    _NAME = 'pseudo_huber'

    def _rho(self, x):
        return np.sqrt(x + 1.) - 1.

    def _weight(self, x):
        return 1. / np.sqrt(x + 1.)


class Cauchy(NamedKernel):
    _ALPHA = 0.
    _NAME = 'cauchy'

    def _rho(self, x):
        return np.log1p(x / 2)

    def _weight(self, x):
        return 1. / (x / 2 + 1.)


class GemanMcClure(NamedKernel):
    _ALPHA = -2.
    _NAME = 'geman_mcclure'

    def _rho(self, x):
        return 2 * x / (x + 4.)

    def _weight(self, x):
        return 16. / (x + 4.) ** 2


class Welsch(NamedKernel):
    _ALPHA = -np.inf
    _NAME = 'welsch'

    def _rho(self, x):
        return -np.expm1(-x / 2)

    def _weight(self, x):
        return np.exp(-x / 2)


NAMED_KERNELS = {kernel._NAME: kernel for kernel in (SquaredL2, PseudoHuber, Cauchy, GemanMcClure, Welsch)}
NAMED_KERNELS['huber'] = PseudoHuber
NAMED_KERNELS['l2'] = SquaredL2


def named_kernel(name: str, c: ztyping.ScaleType) -> NamedKernel:
    """Create a named kernel from its name, e.g. 'cauchy'. 'huber' is the pseudo-Huber kernel."""
    try:
        kernel_cls = NAMED_KERNELS[name.lower().replace('-', '_')]
    except KeyError as error:
        raise InvalidKernelParamsError(f"Unknown kernel {name}, has to be one of {sorted(NAMED_KERNELS)}") from error
    return kernel_cls(c=c)


def named_rho(r: ztyping.ResidualInput, kernel: NamedKernel) -> ztyping.ResidualReturn:
    return kernel.rho(r)


def named_weight(r: ztyping.ResidualInput, kernel: NamedKernel) -> ztyping.ResidualReturn:
    return kernel.weight(r)


def named_rho_prime(r: ztyping.ResidualInput, kernel: NamedKernel) -> ztyping.ResidualReturn:
    return kernel.rho_prime(r)


def kernel_from_alpha(alpha: ztyping.AlphaType, c: ztyping.ScaleType) -> Union[KernelParams, NamedKernel]:
    """Return the named kernel if `alpha` is one of 2, 1, 0, -2 or -inf, a :py:class:`KernelParams` otherwise."""
    alpha = float(alpha)
    for kernel_cls in (SquaredL2, PseudoHuber, Cauchy, GemanMcClure, Welsch):
        if alpha == kernel_cls._ALPHA:
            return kernel_cls(c=c)
    return KernelParams(alpha=alpha, c=c)
