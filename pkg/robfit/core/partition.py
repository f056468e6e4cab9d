"""Truncated partition function, the normalized density and the precomputed lookup table over the alpha grid."""

#  Copyright (c) 2021 robfit
import functools
import logging
from typing import Optional

import numpy as np
import scipy.integrate

from .. import settings
from ..util import ztyping
from ..util.exception import (DomainError, PartitionLookupError, TableConstructionError, TableFormatError)
from .interfaces import RobustKernel
from .kernel import _rho_normalized, rho

logger = logging.getLogger(__name__)

DEFAULT_ALPHA_MIN = -10.
DEFAULT_ALPHA_MAX = 2.
DEFAULT_RESOLUTION = 0.1
DEFAULT_TAU = 10.

_HEADER_KEYS = ('alpha_min', 'alpha_max', 'resolution', 'tau', 'intervals', 'count')


def compute_log_partition(alpha: ztyping.AlphaType, tau: float, intervals: Optional[int] = None) -> float:
    """Log of the truncated partition function, the integral of exp(-rho(r, alpha, 1)) over [-tau, tau].

    The integrand is even, so composite Simpson quadrature runs over [0, tau] with uniform intervals and the
    result is doubled.

    Args:
        alpha: Shape parameter, finite.
        tau: Truncation limit in normalized units r/c.
        intervals: Number of Simpson intervals, even. Defaults to `settings.options.quadrature_intervals`.

    Raises:
        DomainError: if `tau` is not positive or `alpha` not finite.
    """
    alpha = float(alpha)
    tau = float(tau)
    if not (np.isfinite(tau) and tau > 0):
        raise DomainError(f"The truncation limit tau has to be positive, not {tau}.")
    if not np.isfinite(alpha):
        raise DomainError(f"alpha has to be finite, not {alpha}.")
    if intervals is None:
        intervals = settings.options.quadrature_intervals
    if intervals < 2 or intervals % 2:
        raise DomainError(f"The number of quadrature intervals has to be even and positive, not {intervals}.")
    r = np.linspace(0., tau, intervals + 1)
    integrand = np.exp(-_rho_normalized(r ** 2, alpha))
    integral = scipy.integrate.simpson(integrand, x=r)
    return float(np.log(2 * integral))


def alpha_grid(alpha_min: float, alpha_max: float, resolution: float) -> np.ndarray:
    """Grid from `alpha_min` to `alpha_max` (both included) with spacing `resolution`."""
    if not resolution > 0:
        raise DomainError(f"The resolution has to be positive, not {resolution}.")
    if alpha_min > alpha_max:
        raise DomainError(f"alpha_min ({alpha_min}) has to be smaller than alpha_max ({alpha_max}).")
    n_steps = (alpha_max - alpha_min) / resolution
    if abs(n_steps - round(n_steps)) > 1e-6:
        raise DomainError(f"The range [{alpha_min}, {alpha_max}] is not a multiple of the resolution {resolution}.")
    n_points = int(round(n_steps)) + 1
    grid = np.linspace(alpha_min, alpha_max, n_points)
    return np.round(grid, settings.options.grid_decimals)


class PartitionTable:

    def __init__(self, alpha_min: float, alpha_max: float, resolution: float, tau: float,
                 log_z: ztyping.ResidualInput, intervals: Optional[int] = None):
        """Precomputed log Z(alpha) on a regular alpha grid.

        A table is immutable once created and can be shared between threads.

        Args:
            alpha_min: Lower end of the grid.
            alpha_max: Upper end of the grid, usually 2.
            resolution: Grid spacing.
            tau: Truncation limit in normalized units, the support of the density is |r| <= tau * c.
            log_z: One value per grid point.
            intervals: Number of quadrature intervals the values were computed with.
        """
        if intervals is None:
            intervals = settings.options.quadrature_intervals
        self._alpha_min = float(alpha_min)
        self._alpha_max = float(alpha_max)
        self._resolution = float(resolution)
        self._tau = float(tau)
        self._intervals = int(intervals)
        self._alphas = alpha_grid(self._alpha_min, self._alpha_max, self._resolution)
        self._alphas.flags.writeable = False
        log_z = np.array(log_z, dtype=np.float64)
        if log_z.shape != self._alphas.shape:
            raise TableFormatError(f"Expected {self._alphas.size} values for the grid, got {log_z.size}.")
        log_z.flags.writeable = False
        self._log_z = log_z

    @property
    def alpha_min(self) -> float:
        return self._alpha_min

    @property
    def alpha_max(self) -> float:
        return self._alpha_max

    @property
    def resolution(self) -> float:
        return self._resolution

    @property
    def tau(self) -> float:
        return self._tau

    @property
    def intervals(self) -> int:
        return self._intervals

    @property
    def alphas(self) -> np.ndarray:
        return self._alphas

    @property
    def log_z(self) -> np.ndarray:
        return self._log_z

    def __len__(self) -> int:
        return self._alphas.size

    def index(self, alpha: ztyping.AlphaType) -> int:
        """Index of the grid point `alpha`; the value has to be on the grid (to `settings.options.grid_tol`)."""
        alpha = float(alpha)
        idx = int(np.argmin(np.abs(self._alphas - alpha)))
        if not abs(self._alphas[idx] - alpha) <= settings.options.grid_tol:
            raise PartitionLookupError(f"alpha={alpha} is not on the grid [{self.alpha_min}, {self.alpha_max}] "
                                       f"with resolution {self.resolution}. Quantize first.")
        return idx

    def log_z_at(self, alpha: ztyping.AlphaType) -> float:
        return float(self._log_z[self.index(alpha)])

    def quantize(self, alpha: ztyping.AlphaType) -> float:
        """Nearest grid value of `alpha`, clipped to the grid range."""
        idx = int(np.argmin(np.abs(self._alphas - float(alpha))))
        return float(self._alphas[idx])

    def matches(self, alpha_min: float, alpha_max: float, resolution: float, tau: float) -> bool:
        """Whether the table was built for this grid and truncation."""
        return bool(np.isclose(self.alpha_min, alpha_min) and np.isclose(self.alpha_max, alpha_max)
                    and np.isclose(self.resolution, resolution) and np.isclose(self.tau, tau))

    def verify(self, intervals_factor: int = 2) -> float:
        """Recompute every entry with a quadrature step divided by `intervals_factor`.

        Returns:
            The maximum absolute deviation from the stored values.
        """
        intervals = self.intervals * intervals_factor
        recomputed = settings.run.map(lambda alpha: compute_log_partition(alpha, self.tau, intervals=intervals),
                                      self.alphas)
        deviation = float(np.max(np.abs(np.asarray(recomputed) - self.log_z)))
        logger.info(f"Partition table verified with {intervals} intervals, max deviation {deviation:.3g}")
        return deviation

    def save(self, path: ztyping.PathType) -> None:
        """Write the table as text: a `key = value` header followed by one value per line in full precision."""
        header = dict(alpha_min=self.alpha_min, alpha_max=self.alpha_max, resolution=self.resolution,
                      tau=self.tau, intervals=self.intervals, count=len(self))
        lines = ["# robfit partition table: log of the truncated partition function per alpha grid point"]
        lines.extend(f"{key} = {value!r}" for key, value in header.items())
        lines.extend(repr(float(value)) for value in self.log_z)
        with open(path, 'w') as file:
            file.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: ztyping.PathType) -> "PartitionTable":
        """Read a table written by :py:meth:`save`.

        Raises:
            TableFormatError: if the header is incomplete or the values do not match the header.
        """
        header = {}
        values = []
        with open(path) as file:
            for lineno, line in enumerate(file, start=1):
                line = line.strip()
                if not line or line.startswith('#'):
                    continue
                if '=' in line:
                    key, _, value = line.partition('=')
                    key = key.strip()
                    if key not in _HEADER_KEYS:
                        raise TableFormatError(f"line {lineno}: unknown header key {key}")
                    try:
                        header[key] = float(value)
                    except ValueError as error:
                        raise TableFormatError(f"line {lineno}: invalid value {value.strip()} for {key}") from error
                    continue
                try:
                    values.append(float(line))
                except ValueError as error:
                    raise TableFormatError(f"line {lineno}: invalid table value {line}") from error
        missing = [key for key in _HEADER_KEYS if key not in header]
        if missing:
            raise TableFormatError(f"Table file {path} misses the header keys {missing}.")
        if int(header['count']) != len(values):
            raise TableFormatError(f"Table file {path} announces {int(header['count'])} values, has {len(values)}.")
        if not np.all(np.isfinite(values)):
            raise TableFormatError(f"Table file {path} contains non-finite values.")
        try:
            return cls(alpha_min=header['alpha_min'], alpha_max=header['alpha_max'],
                       resolution=header['resolution'], tau=header['tau'], log_z=values,
                       intervals=int(header['intervals']))
        except DomainError as error:
            raise TableFormatError(f"Table file {path} has an invalid grid: {error}") from error

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PartitionTable):
            return NotImplemented
        return (self.matches(other.alpha_min, other.alpha_max, other.resolution, other.tau)
                and self.intervals == other.intervals and np.array_equal(self.log_z, other.log_z))

    def __repr__(self) -> str:
        return (f"<PartitionTable alpha=[{self.alpha_min}, {self.alpha_max}] step={self.resolution} "
                f"tau={self.tau} n={len(self)}>")


def build_table(alpha_min: float = DEFAULT_ALPHA_MIN, alpha_max: float = DEFAULT_ALPHA_MAX,
                resolution: float = DEFAULT_RESOLUTION, tau: float = DEFAULT_TAU,
                intervals: Optional[int] = None) -> PartitionTable:
    """Evaluate :py:func:`compute_log_partition` on every grid point.

    Grid points are computed in parallel with `settings.run` and gathered in grid order.

    Raises:
        TableConstructionError: if an entry is not finite or the values are not non-increasing in alpha.
    """
    if intervals is None:
        intervals = settings.options.quadrature_intervals
    alphas = alpha_grid(alpha_min, alpha_max, resolution)
    logger.info(f"Building partition table for {alphas.size} alpha values, tau={tau}, {intervals} intervals")
    log_z = np.asarray(settings.run.map(lambda alpha: compute_log_partition(alpha, tau, intervals=intervals),
                                        alphas))
    if not np.all(np.isfinite(log_z)):
        raise TableConstructionError(f"Non-finite partition values at alpha={alphas[~np.isfinite(log_z)]}.")
    # exp(-rho) shrinks pointwise with growing alpha
    increasing = np.diff(log_z) > 1e-12
    if np.any(increasing):
        raise TableConstructionError(f"log Z increases with alpha at alpha={alphas[1:][increasing]}, "
                                     f"the quadrature is misconfigured.")
    return PartitionTable(alpha_min=alpha_min, alpha_max=alpha_max, resolution=resolution, tau=tau, log_z=log_z,
                          intervals=intervals)


@functools.lru_cache(maxsize=None)
def default_table() -> PartitionTable:
    """The table for alpha in [-10, 2] with resolution 0.1 and tau = 10, built once per process."""
    return build_table()


def log_density(r: ztyping.ResidualInput, params: RobustKernel, table: PartitionTable) -> ztyping.ResidualReturn:
    """Log of the truncated density, -rho(r, alpha, c) - log c - log Z(alpha).

    Residuals outside the support |r| <= tau * c still get the formula's value, check them with
    :py:func:`density_in_support`.

    Raises:
        PartitionLookupError: if `params.alpha` is not on the table grid.
    """
    log_z = table.log_z_at(params.alpha)
    return -rho(r, params) - np.log(params.c) - log_z


def truncated_loss(r: ztyping.ResidualInput, params: RobustKernel, table: PartitionTable) -> ztyping.ResidualReturn:
    """Truncated adaptive loss rho(r, alpha, c) + log(c Z(alpha)), the negative log density."""
    return -log_density(r, params, table)


def density_in_support(r: ztyping.ResidualInput, c: float, table: PartitionTable) -> np.ndarray:
    return np.abs(np.asarray(r, dtype=np.float64)) <= table.tau * c
