#  Copyright (c) 2021 robfit
import abc
from typing import Optional

import numpy as np


class ConvergenceCriterion(abc.ABC):

    def __init__(self, tol: float, name: str):
        """A generic convergence criterion to be subclassed.

        Args:
            tol: tolerance to stop the minimization. Converged if the criterion is below it.
            name: Human readable name, used as termination reason.
        """
        super().__init__()
        if not tol > 0:
            raise ValueError(f"The tolerance of {name} has to be positive, not {tol}.")
        self.tol = tol
        self.name = name
        self.last_value = CRITERION_NOT_AVAILABLE

    def converged(self, step: np.ndarray, cost_old: float, cost_new: float) -> bool:
        """Calculate the criterion for an accepted step and check if it is below the tolerance."""
        value = self.calculate(step=step, cost_old=cost_old, cost_new=cost_new)
        return value < self.tol

    def calculate(self, step: np.ndarray, cost_old: float, cost_new: float) -> float:
        """Evaluate the convergence criterion and store it in `last_value`"""
        value = self._calculate(step=step, cost_old=cost_old, cost_new=cost_new)
        self.last_value = value
        return value

    @abc.abstractmethod
    def _calculate(self, step: np.ndarray, cost_old: float, cost_new: float) -> float:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<ConvergenceCriterion {self.name}>"


def max_step(step: np.ndarray) -> float:
    return float(np.max(np.abs(step))) if np.size(step) else 0.


class StepSize(ConvergenceCriterion):

    def __init__(self, tol: float, name: Optional[str] = "step size below tolerance"):
        """Largest absolute component of the tangent increment."""
        super().__init__(tol=tol, name=name)

    def _calculate(self, step, cost_old, cost_new) -> float:
        return max_step(step)


class RelativeCostChange(ConvergenceCriterion):

    def __init__(self, tol: float, name: Optional[str] = "relative cost change below tolerance"):
        """Change of the robust cost relative to its previous value.

        A vanishing previous cost counts as converged.
        """
        super().__init__(tol=tol, name=name)

    def _calculate(self, step, cost_old, cost_new) -> float:
        if cost_old == 0:
            return 0.
        return abs(cost_old - cost_new) / abs(cost_old)


class CriterionNotAvailable:
    """Value of a criterion that has not been evaluated yet, falsy and never equal or smaller than a number."""

    def __bool__(self):
        return False

    def __eq__(self, other):
        return False

    def __lt__(self, other):
        return False

    def __hash__(self):
        return id(self)

    def __repr__(self):
        return "<criterion_not_available>"


CRITERION_NOT_AVAILABLE = CriterionNotAvailable()

SINGULAR_SYSTEM = "singular system"
NO_VALID_BLOCKS = "no valid residual blocks"
COST_INCREASE = "undamped step increased the cost"
ITERATION_LIMIT = "iteration limit reached"
EM_CONVERGED = "alpha unchanged and M-step converged"
EM_ITERATION_LIMIT = "EM iteration limit reached"

# the solve could not run to a meaningful end
FAILURE_REASONS = (SINGULAR_SYSTEM, NO_VALID_BLOCKS)
# no further iteration can change the state
STOP_REASONS = FAILURE_REASONS + (COST_INCREASE,)
