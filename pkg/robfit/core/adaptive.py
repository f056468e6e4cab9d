"""Maximum likelihood estimation of the kernel shape from a set of residuals by a 1-D grid search."""

#  Copyright (c) 2021 robfit
import logging
from typing import Dict, Optional

import numpy as np
import scipy.integrate

from .. import settings
from ..util import ztyping
from ..util.exception import DomainError
from .kernel import KernelParams, _rho_normalized
from .partition import PartitionTable

logger = logging.getLogger(__name__)


class ResidualSet:

    def __init__(self, values: ztyping.ResidualInput):
        """Scalar residuals, or the norms of vector residual blocks.

        Raises:
            DomainError: if the set is empty or contains non-finite values.
        """
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.size == 0:
            raise DomainError("The residual set is empty.")
        if not np.all(np.isfinite(values)):
            raise DomainError("The residual set contains non-finite values.")
        values.flags.writeable = False
        self._values = values

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self) -> int:
        return self._values.size

    def __repr__(self) -> str:
        return f"<ResidualSet n={len(self)}>"


def _convert_to_residual_set(residuals) -> ResidualSet:
    if isinstance(residuals, ResidualSet):
        return residuals
    return ResidualSet(residuals)


def residual_mad(values: ztyping.ResidualInput) -> float:
    """Median absolute deviation from the median."""
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise DomainError("Cannot compute the MAD of an empty set.")
    return float(np.median(np.abs(values - np.median(values))))


def log_likelihood(residuals, alpha: ztyping.AlphaType, c: ztyping.ScaleType, table: PartitionTable) -> float:
    """Log-likelihood -N log(c Z(alpha)) - sum_i rho(r_i, alpha, c) of the residuals under the truncated density.

    Args:
        residuals: A :py:class:`ResidualSet` or anything convertible to one.
        alpha: Shape parameter, on the table grid.
        c: Scale, positive.
        table: Partition table to look log Z(alpha) up.
    """
    residuals = _convert_to_residual_set(residuals)
    params = KernelParams(alpha=alpha, c=c)
    log_z = table.log_z_at(alpha)
    x = (np.abs(residuals.values) / params.c) ** 2
    return float(-len(residuals) * (np.log(params.c) + log_z) - np.sum(_rho_normalized(x, params.alpha)))


def log_likelihood_profile(residuals, c: ztyping.ScaleType, table: PartitionTable) -> np.ndarray:
    """:py:func:`log_likelihood` for every grid point of `table`, in grid order."""
    residuals = _convert_to_residual_set(residuals)
    if not (np.isfinite(c) and c > 0):
        raise DomainError(f"The scale c has to be positive, not {c}.")
    x = (np.abs(residuals.values) / c) ** 2
    n = len(residuals)
    log_c = np.log(c)

    def profile_point(idx):
        return -n * (log_c + table.log_z[idx]) - np.sum(_rho_normalized(x, table.alphas[idx]))

    return np.asarray(settings.run.map(profile_point, range(len(table))), dtype=np.float64)


class AlphaEstimate:

    def __init__(self, alpha: float, log_likelihood: float, alphas: np.ndarray, profile: np.ndarray,
                 degenerate: bool, n_used: int, n_total: int, mad: float):
        """Result of the shape estimation: the maximizing grid value and the full likelihood profile."""
        self.alpha = alpha
        self.log_likelihood = log_likelihood
        self.alphas = alphas
        self.profile = profile
        self.degenerate = degenerate
        self.n_used = n_used
        self.n_total = n_total
        self.mad = mad

    def to_dict(self) -> Dict:
        return {
            'alpha': self.alpha,
            'log_likelihood': self.log_likelihood,
            'degenerate': self.degenerate,
            'n_used': self.n_used,
            'n_total': self.n_total,
            'mad': self.mad,
            'profile': [{'alpha': float(alpha), 'log_likelihood': float(value)}
                        for alpha, value in zip(self.alphas, self.profile)],
        }

    def __repr__(self) -> str:
        return f"<AlphaEstimate alpha={self.alpha} log_likelihood={self.log_likelihood:.6g}>"


def select_maximum(alphas: np.ndarray, profile: np.ndarray) -> int:
    """Index of the maximum of `profile`; equal maxima resolve to the largest alpha."""
    order = np.argsort(alphas, kind='stable')[::-1]
    return int(order[np.argmax(profile[order])])


def estimate_alpha(residuals, c: ztyping.ScaleType, table: PartitionTable, subsample_cap: Optional[int] = None,
                   subsample_seed: int = 0) -> AlphaEstimate:
    """Grid search for the shape parameter that maximizes the likelihood of the residuals.

    Args:
        residuals: Scalar residuals or block norms.
        c: Scale of the kernel, fixed.
        table: Partition table, its grid is the search space.
        subsample_cap: If more residuals are given, a subset of this size, drawn without replacement with
            `subsample_seed`, is used. Defaults to `settings.options.subsample_cap`.
        subsample_seed: Seed of the subsampling.

    Returns:
        The estimate, deterministic for fixed inputs.
    """
    residuals = _convert_to_residual_set(residuals)
    if subsample_cap is None:
        subsample_cap = settings.options.subsample_cap
    n_total = len(residuals)
    values = residuals.values
    if n_total > subsample_cap:
        rng = np.random.default_rng(subsample_seed)
        values = values[np.sort(rng.choice(n_total, size=subsample_cap, replace=False))]
    profile = log_likelihood_profile(values, c=c, table=table)
    idx = select_maximum(table.alphas, profile)
    mad = residual_mad(values)
    degenerate = mad < settings.options.degenerate_mad_factor * c
    if degenerate:
        logger.warning(f"Residual MAD {mad:.3g} is below {settings.options.degenerate_mad_factor} * c, the alpha "
                       f"estimate only depends on the partition function.")
    return AlphaEstimate(alpha=float(table.alphas[idx]), log_likelihood=float(profile[idx]),
                         alphas=np.array(table.alphas), profile=profile, degenerate=bool(degenerate),
                         n_used=int(values.size), n_total=n_total, mad=mad)


def sample_density(n: int, alpha: ztyping.AlphaType, c: ztyping.ScaleType, table: PartitionTable,
                   rng: Optional[np.random.Generator] = None, n_nodes: int = 2 ** 16) -> np.ndarray:
    """Draw `n` residuals from the truncated density by numeric inversion of its CDF.

    The magnitude is drawn from the CDF on [0, tau * c], the sign uniformly.
    """
    if rng is None:
        rng = np.random.default_rng()
    params = KernelParams(alpha=alpha, c=c)
    r = np.linspace(0., table.tau, n_nodes + 1)
    density = np.exp(-_rho_normalized(r ** 2, params.alpha))
    cdf = scipy.integrate.cumulative_trapezoid(density, x=r, initial=0.)
    cdf /= cdf[-1]
    magnitude = np.interp(rng.uniform(size=n), cdf, r)
    sign = np.where(rng.uniform(size=n) < 0.5, -1., 1.)
    return sign * magnitude * params.c
