"""Module for testing of the robfit problems.

Contains a singleton instance to register shipped problems and let them be tested.
"""
#  Copyright (c) 2021 robfit
from typing import Callable, List, Tuple

import numdifftools
import numpy as np

from ..util import ztyping
from .interfaces import ProblemInstance

__all__ = ["tester", "numerical_jacobian", "jacobian_deviation"]


def numerical_jacobian(problem: ProblemInstance, theta: ztyping.ThetaType) -> np.ndarray:
    """Finite difference Jacobian of all residuals with respect to the tangent increment at zero.

    Returns:
        Array of shape (n_blocks, block_dim, dim).
    """

    def func(delta):
        return problem.residuals(problem.plus(theta, delta)).ravel()

    jacobian = numdifftools.Jacobian(func)(np.zeros(problem.dim))
    return np.reshape(jacobian, (problem.n_blocks, problem.block_dim, problem.dim))


def jacobian_deviation(problem: ProblemInstance, theta: ztyping.ThetaType) -> float:
    """Largest deviation of the analytic from the numerical Jacobian, relative to the largest entry."""
    analytic = problem.jacobians(theta)
    numerical = numerical_jacobian(problem, theta)
    scale = max(float(np.max(np.abs(numerical))), 1.)
    return float(np.max(np.abs(analytic - numerical)) / scale)


class AutoTester:

    def __init__(self):
        self.problems = []

    def register_problem(self, name: str, factory: Callable[[np.random.Generator], Tuple[ProblemInstance, Callable]]):
        """Register a problem factory.

        Args:
            name: Identifier used as test id.
            factory: Takes a random generator and returns the problem and a function that draws a random state
                from a generator.
        """
        self.problems.append((name, factory))

    def create_parameterized_problems(self) -> Tuple[List[str], List[Callable]]:
        names = [name for name, _ in self.problems]
        factories = [factory for _, factory in self.problems]
        return names, factories


tester = AutoTester()
