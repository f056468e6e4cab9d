#  Copyright (c) 2021 robfit

import abc
from abc import abstractmethod
from typing import Optional

import numpy as np

from ..util import ztyping


class RobfitObject(abc.ABC):
    pass


class RobustKernel(RobfitObject):
    """A robust kernel rho(r) with scale `c`, its derivative and the IRLS weight rho'(r)/r."""

    @property
    @abstractmethod
    def c(self) -> float:
        """Scale parameter, in units of the residual."""
        raise NotImplementedError

    @property
    @abstractmethod
    def alpha(self) -> float:
        """Shape parameter of the generalized kernel family. Can be `-inf` (Welsch)."""
        raise NotImplementedError

    @property
    @abstractmethod
    def name(self) -> str:
        raise NotImplementedError

    @abstractmethod
    def rho(self, r: ztyping.ResidualInput) -> ztyping.ResidualReturn:
        """Evaluate the loss at the residual(s) `r`."""
        raise NotImplementedError

    @abstractmethod
    def rho_prime(self, r: ztyping.ResidualInput) -> ztyping.ResidualReturn:
        """Evaluate the derivative of the loss with respect to `r`."""
        raise NotImplementedError

    @abstractmethod
    def weight(self, r: ztyping.ResidualInput) -> ztyping.ResidualReturn:
        """Evaluate the IRLS weight rho'(r)/r, finite at r = 0."""
        raise NotImplementedError


class ProblemInstance(RobfitObject):
    """A non-linear least squares problem made of residual blocks of equal dimension.

    The parameters `theta` live on a manifold; increments `delta` live in its tangent space of size `dim`
    and are applied with :py:meth:`plus`.
    """

    @property
    @abstractmethod
    def dim(self) -> int:
        """Size of the tangent space, the number of free parameters."""
        raise NotImplementedError

    @property
    @abstractmethod
    def n_blocks(self) -> int:
        raise NotImplementedError

    @property
    @abstractmethod
    def block_dim(self) -> int:
        """Dimension of every residual block."""
        raise NotImplementedError

    @abstractmethod
    def residuals(self, theta: ztyping.ThetaType) -> np.ndarray:
        """Evaluate all residual blocks, shape (n_blocks, block_dim)."""
        raise NotImplementedError

    @abstractmethod
    def jacobians(self, theta: ztyping.ThetaType) -> np.ndarray:
        """Jacobians of all residual blocks with respect to the tangent increment, shape (n_blocks, block_dim, dim)."""
        raise NotImplementedError

    def jacobian_matrix(self, theta: ztyping.ThetaType):
        """Stacked Jacobian, shape (n_blocks * block_dim, dim). Problems with many blocks may return `scipy.sparse`."""
        return np.reshape(self.jacobians(theta), (self.n_blocks * self.block_dim, self.dim))

    @abstractmethod
    def plus(self, theta: ztyping.ThetaType, delta: ztyping.DeltaType) -> ztyping.ThetaType:
        """Apply the tangent increment `delta` to `theta`. `plus(theta, 0)` returns `theta` unchanged."""
        raise NotImplementedError

    @abstractmethod
    def valid_mask(self, theta: ztyping.ThetaType) -> Optional[np.ndarray]:
        """Boolean mask of the blocks that can be used at `theta` or None if all are valid."""
        raise NotImplementedError
