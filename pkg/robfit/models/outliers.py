"""Synthetic contamination of data sets with a ground truth mask of the affected items."""

#  Copyright (c) 2021 robfit
from typing import Optional, Tuple, Union

import numpy as np

from ..util import ztyping
from ..util.exception import DomainError

MODELS = ('uniform', 'shuffle', 'clustered')


class OutlierSpec:

    def __init__(self, fraction: float, model: str = 'uniform', low: Union[float, np.ndarray] = -50.,
                 high: Union[float, np.ndarray] = 50., magnitude: float = 0.5, cluster_size: int = 50,
                 seed: ztyping.SeedType = 0):
        """Contamination model.

        Args:
            fraction: Share of the items to contaminate, in [0, 1). Exactly floor(fraction * n) items are hit.
            model: 'uniform' replaces the items with uniform values in [`low`, `high`] (per column if arrays),
                'shuffle' permutes the items cyclically among themselves, 'clustered' moves spatially
                contiguous groups of `cluster_size` points rigidly by a random offset of length `magnitude`.
            low: Lower bound of the uniform replacement.
            high: Upper bound of the uniform replacement.
            magnitude: Length of the offset of every cluster.
            cluster_size: Points per cluster.
            seed: Seed of the contamination, a fixed seed gives identical contamination.
        """
        fraction = float(fraction)
        if not 0 <= fraction < 1:
            raise DomainError(f"The outlier fraction has to be in [0, 1), not {fraction}.")
        if model not in MODELS:
            raise DomainError(f"Unknown outlier model {model}, has to be one of {MODELS}.")
        if int(cluster_size) < 1:
            raise DomainError(f"cluster_size has to be at least 1, not {cluster_size}.")
        self.fraction = fraction
        self.model = model
        self.low = low
        self.high = high
        self.magnitude = float(magnitude)
        self.cluster_size = int(cluster_size)
        self.seed = seed

    def count(self, n: int) -> int:
        # floor, tolerant to the rounding of e.g. 0.29 * 100
        return int(np.floor(self.fraction * n + 1e-9))

    def __repr__(self) -> str:
        return f"<OutlierSpec {self.model} fraction={self.fraction}>"


def _uniform(data, mask, spec, rng):
    low = np.broadcast_to(np.asarray(spec.low, dtype=np.float64), data.shape[1:])
    high = np.broadcast_to(np.asarray(spec.high, dtype=np.float64), data.shape[1:])
    data[mask] = rng.uniform(low, high, size=(int(mask.sum()),) + data.shape[1:])


def _shuffle(data, indices):
    if indices.size == 1:
        # a single item cannot be permuted, take the content of its successor instead
        data[indices[0]] = data[(indices[0] + 1) % data.shape[0]].copy()
    elif indices.size > 1:
        data[indices] = data[np.roll(indices, -1)].copy()


def _clustered(data, k, spec, rng) -> np.ndarray:
    if data.ndim != 2:
        raise DomainError("The clustered model needs points of shape (n, dim).")
    mask = np.zeros(data.shape[0], dtype=bool)
    while mask.sum() < k:
        free = np.flatnonzero(~mask)
        center = data[rng.choice(free)]
        distances = np.linalg.norm(data[free] - center, axis=1)
        size = min(spec.cluster_size, k - int(mask.sum()))
        members = free[np.argsort(distances, kind='stable')[:size]]
        direction = rng.standard_normal(data.shape[1])
        direction /= np.linalg.norm(direction)
        data[members] += spec.magnitude * direction
        mask[members] = True
    return mask


def inject_outliers(data: np.ndarray, spec: OutlierSpec,
                    rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Contaminate a copy of `data` along its first axis.

    Args:
        data: Values of shape (n,) or (n, ...); points for the clustered model.
        spec: The contamination model.
        rng: Random generator, overrides `spec.seed`.

    Returns:
        The contaminated copy and the boolean mask of the contaminated items.
    """
    data = np.array(data, copy=True)
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    n = data.shape[0]
    k = spec.count(n)
    if k == 0:
        return data, np.zeros(n, dtype=bool)
    if spec.model == 'clustered':
        data = data.astype(np.float64)
        return data, _clustered(data, k, spec, rng)
    indices = np.sort(rng.choice(n, size=k, replace=False))
    mask = np.zeros(n, dtype=bool)
    mask[indices] = True
    if spec.model == 'uniform':
        data = data.astype(np.float64)
        _uniform(data, mask, spec, rng)
    else:
        _shuffle(data, rng.permutation(indices))
    return data, mask
