#  Copyright (c) 2021 robfit
from typing import Optional

import numpy as np

from ..core.problem import BaseProblem
from ..core.testing import tester
from ..util import ztyping
from ..util.exception import DomainError


class LineFitProblem(BaseProblem):

    def __init__(self, points: ztyping.PointsInput, name: Optional[str] = None):
        """Fit of y = m x + b with scalar residuals (m x_i + b) - y_i; the state is the array [m, b].

        Raises:
            DomainError: if fewer than 2 points are given.
        """
        super().__init__(name=name)
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 2:
            raise DomainError(f"Points have to be of shape (n, 2), not {points.shape}.")
        if points.shape[0] < 2:
            raise DomainError(f"A line fit needs at least 2 points, got {points.shape[0]}.")
        self.x = points[:, 0]
        self.y = points[:, 1]
        self._dim = 2
        self._n_blocks = points.shape[0]
        self._block_dim = 1

    def _residuals(self, theta):
        slope, intercept = theta
        return slope * self.x + intercept - self.y

    def _jacobians(self, theta):
        return np.stack([self.x, np.ones_like(self.x)], axis=-1)

    def plus(self, theta, delta):
        return np.asarray(theta, dtype=np.float64) + delta


def line_fit_problem(points: ztyping.PointsInput) -> LineFitProblem:
    return LineFitProblem(points)


class LocationProblem(BaseProblem):

    def __init__(self, values: ztyping.ResidualInput, name: Optional[str] = None):
        """Estimate a location from scalar measurements z_i with residuals theta - z_i; the state is [theta]."""
        super().__init__(name=name)
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.size == 0:
            raise DomainError("A location problem needs at least one value.")
        self.values = values
        self._dim = 1
        self._n_blocks = values.size
        self._block_dim = 1

    def _residuals(self, theta):
        return theta[0] - self.values

    def _jacobians(self, theta):
        return np.ones(self.values.size)

    def plus(self, theta, delta):
        return np.asarray(theta, dtype=np.float64) + delta


def synthetic_line(n: int, slope: float = 2., intercept: float = 1., sigma: float = 0.,
                   seed: ztyping.SeedType = None, x_range: ztyping.PairType = (-5., 5.)) -> np.ndarray:
    """Points (x, y) with uniform x in `x_range` and y = slope x + intercept + N(0, sigma^2)."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(*x_range, size=n)
    y = slope * x + intercept + sigma * rng.standard_normal(n)
    return np.stack([x, y], axis=-1)


def _random_line(rng: np.random.Generator):
    problem = LineFitProblem(synthetic_line(20, sigma=0.5, seed=rng.integers(2 ** 31)))

    def random_state(generator):
        return generator.normal(0., 3., size=2)

    return problem, random_state


tester.register_problem('line_fit', _random_line)
