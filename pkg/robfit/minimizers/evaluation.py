#  Copyright (c) 2021 robfit
import logging
from typing import Optional, Tuple

import numpy as np
import scipy.sparse
import texttable as tt

from ..core.interfaces import ProblemInstance, RobustKernel
from ..util import ztyping
from ..util.exception import NonFiniteResidualError

logger = logging.getLogger(__name__)


class ProblemEval:

    def __init__(self, problem: ProblemInstance, do_print: bool = False):
        r"""Convenience wrapper for the evaluation of a problem.

        Counts the evaluations, checks residuals for finiteness and applies the mask of invalid blocks.

        Args:
            problem: Problem to evaluate.
            do_print: If every evaluation should be printed nicely.
        """
        super().__init__()
        self.problem = problem
        self.do_print = do_print
        self.nfunc_eval = 0
        self.njac_eval = 0
        self.invalid_block_count = 0
        self._warned_invalid = False

    def residuals(self, theta: ztyping.ThetaType) -> Tuple[np.ndarray, np.ndarray]:
        """Evaluate the residual blocks and the mask of the valid blocks.

        Raises:
            NonFiniteResidualError: if a block is not finite, with the index of the first one.
        """
        self.nfunc_eval += 1
        residuals = self.problem.residuals(theta)
        finite = np.all(np.isfinite(residuals), axis=1)
        if not np.all(finite):
            block_index = int(np.argmin(finite))
            raise NonFiniteResidualError(f"Residual block {block_index} of {self.problem} is not finite: "
                                         f"{residuals[block_index]}", block_index=block_index)
        mask = self.problem.valid_mask(theta)
        if mask is None:
            mask = np.ones(residuals.shape[0], dtype=bool)
        n_invalid = int(np.sum(~mask))
        if n_invalid:
            self.invalid_block_count += n_invalid
            log = logger.debug if self._warned_invalid else logger.warning
            self._warned_invalid = True
            log(f"{n_invalid} residual blocks are invalid at this state and get zero weight.")
        return residuals, mask

    def jacobian_matrix(self, theta: ztyping.ThetaType):
        """Stacked Jacobian of all blocks, shape (n_blocks * block_dim, dim), dense or sparse."""
        self.njac_eval += 1
        return self.problem.jacobian_matrix(theta)

    def norms(self, theta: ztyping.ThetaType) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Residual blocks, their norms and the valid mask."""
        residuals, mask = self.residuals(theta)
        return residuals, np.linalg.norm(residuals, axis=1), mask


def robust_cost(norms: np.ndarray, kernel: RobustKernel) -> float:
    """Sum of the kernel over the block norms."""
    return float(np.sum(kernel.rho(norms)))


def weighted_squared_cost(norms: np.ndarray, weights: np.ndarray) -> float:
    return float(0.5 * np.sum(weights * norms ** 2))


def normal_equations(residuals: np.ndarray, jacobian, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Weighted normal matrix J^T W J and gradient J^T W r.

    Args:
        residuals: Residual blocks, shape (n_blocks, block_dim).
        jacobian: Stacked Jacobian, shape (n_blocks * block_dim, dim), dense or `scipy.sparse`.
        weights: One weight per block.
    """
    row_weights = np.repeat(weights, residuals.shape[1])
    if scipy.sparse.issparse(jacobian):
        weighted = scipy.sparse.diags(row_weights) @ jacobian
        hessian = np.asarray((jacobian.T @ weighted).todense())
    else:
        weighted = jacobian * row_weights[:, None]
        hessian = jacobian.T @ weighted
    gradient = np.asarray(weighted.T @ residuals.ravel()).ravel()
    return hessian, gradient


def print_iteration(iteration: int, cost: float, lm_lambda: float, step: Optional[np.ndarray], accepted: bool):
    table = tt.Texttable()
    table.header(['Iteration', 'Robust cost', 'Lambda', 'Max step', 'Accepted'])
    max_step = "-" if step is None else float(np.max(np.abs(step))) if np.size(step) else 0.
    table.add_row([iteration, cost, lm_lambda, max_step, accepted])
    print(table.draw())
