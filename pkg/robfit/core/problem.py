#  Copyright (c) 2021 robfit
from typing import List, Optional

import numpy as np

from ..util import ztyping
from .interfaces import ProblemInstance


class ResidualBlock:

    def __init__(self, problem: ProblemInstance, index: int):
        """View on the residual block `index` of `problem`."""
        self.problem = problem
        self.index = index

    def evaluate(self, theta: ztyping.ThetaType) -> np.ndarray:
        return self.problem.residuals(theta)[self.index]

    def jacobian(self, theta: ztyping.ThetaType) -> np.ndarray:
        return self.problem.jacobians(theta)[self.index]

    def __repr__(self) -> str:
        return f"<ResidualBlock {self.index} of {type(self.problem).__name__}>"


class BaseProblem(ProblemInstance):
    """Base class for problems given as vectorized residuals and Jacobians over all blocks.

    Subclasses implement `_residuals`, `_jacobians` and `plus` and set `_dim`, `_n_blocks` and `_block_dim`.
    """
    _dim = None
    _n_blocks = None
    _block_dim = None

    def __init__(self, name: Optional[str] = None):
        if name is None:
            name = type(self).__name__
        self.name = name

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def n_blocks(self) -> int:
        return self._n_blocks

    @property
    def block_dim(self) -> int:
        return self._block_dim

    @property
    def blocks(self) -> List[ResidualBlock]:
        return [ResidualBlock(self, i) for i in range(self.n_blocks)]

    def residuals(self, theta: ztyping.ThetaType) -> np.ndarray:
        return np.reshape(self._residuals(theta), (self.n_blocks, self.block_dim))

    def jacobians(self, theta: ztyping.ThetaType) -> np.ndarray:
        return np.reshape(self._jacobians(theta), (self.n_blocks, self.block_dim, self.dim))

    def _residuals(self, theta):
        raise NotImplementedError

    def _jacobians(self, theta):
        raise NotImplementedError

    def valid_mask(self, theta: ztyping.ThetaType) -> Optional[np.ndarray]:
        return None

    def block_norms(self, theta: ztyping.ThetaType) -> np.ndarray:
        return np.linalg.norm(self.residuals(theta), axis=1)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} dim={self.dim} blocks={self.n_blocks}x{self.block_dim}>"
