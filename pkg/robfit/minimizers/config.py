#  Copyright (c) 2021 robfit
from typing import Dict, Optional, Union

import numpy as np

from .. import settings
from ..core.kernel import NAMED_KERNELS, KernelParams, NamedKernel, named_kernel
from ..core.partition import PartitionTable
from ..util.exception import DomainError, InvalidKernelParamsError

POLICIES = ('adaptive', 'fixed', *NAMED_KERNELS)


class SolverConfig:
    _FIELDS = ('policy', 'alpha', 'alpha_min', 'alpha_max', 'resolution', 'tau_factor', 'max_em_iterations',
               'max_irls_iterations', 'lm_lambda', 'lm_up', 'lm_down', 'lm_lambda_max', 'scale_damping', 'step_tol',
               'cost_tol', 'subsample_cap', 'subsample_seed', 'verbosity')

    def __init__(self, c: float,
                 policy: str = 'adaptive',
                 alpha: Optional[float] = None,
                 alpha_min: float = -10.,
                 alpha_max: float = 2.,
                 resolution: float = 0.1,
                 tau_factor: float = 10.,
                 max_em_iterations: int = 50,
                 max_irls_iterations: int = 20,
                 lm_lambda: float = 1e-4,
                 lm_up: float = 10.,
                 lm_down: float = 0.1,
                 lm_lambda_max: float = 1e12,
                 scale_damping: bool = True,
                 step_tol: float = 1e-8,
                 cost_tol: float = 1e-10,
                 subsample_cap: Optional[int] = None,
                 subsample_seed: int = 0,
                 verbosity: Optional[int] = None):
        """Controls of the EM loop and of the IRLS Levenberg-Marquardt inner solver.

        Args:
            c: Scale of the kernel in units of the residual, fixed for the whole solve.
            policy: 'adaptive' estimates alpha by EM, 'fixed' uses `alpha`, a kernel name ('squared',
                'pseudo_huber' or 'huber', 'cauchy', 'geman_mcclure', 'welsch') uses the named kernel.
            alpha: Shape for the 'fixed' policy.
            alpha_min: Lower end of the alpha grid.
            alpha_max: Upper end of the alpha grid.
            resolution: Spacing of the alpha grid.
            tau_factor: Truncation of the density, in units of `c`.
            max_em_iterations: Cap on the EM iterations.
            max_irls_iterations: Cap on the iterations of every M-step.
            lm_lambda: Initial damping. 0 gives undamped Gauss-Newton steps; the first one that would increase the
                robust cost ends the M-step.
            lm_up: Factor of the damping after a rejected step.
            lm_down: Factor of the damping after an accepted step.
            lm_lambda_max: Damping above which the system counts as singular.
            scale_damping: Damping is lambda times the mean diagonal of the weighted normal matrix instead
                of lambda.
            step_tol: Converged if the largest component of an accepted step is below.
            cost_tol: Converged if the relative change of the robust cost of an accepted step is below.
            subsample_cap: Largest number of residuals used by the E-step.
                Defaults to `settings.options.subsample_cap`.
            subsample_seed: Seed of the E-step subsampling.
            verbosity: 0 is silent, above 9 every iteration is printed. Defaults to the global verbosity.
        """
        if verbosity is None:
            verbosity = settings.get_verbosity()
        if subsample_cap is None:
            subsample_cap = settings.options.subsample_cap
        self.c = float(c)
        self.policy = policy.lower().replace('-', '_')
        self.alpha = None if alpha is None else float(alpha)
        self.alpha_min = float(alpha_min)
        self.alpha_max = float(alpha_max)
        self.resolution = float(resolution)
        self.tau_factor = float(tau_factor)
        self.max_em_iterations = int(max_em_iterations)
        self.max_irls_iterations = int(max_irls_iterations)
        self.lm_lambda = float(lm_lambda)
        self.lm_up = float(lm_up)
        self.lm_down = float(lm_down)
        self.lm_lambda_max = float(lm_lambda_max)
        self.scale_damping = bool(scale_damping)
        self.step_tol = float(step_tol)
        self.cost_tol = float(cost_tol)
        self.subsample_cap = int(subsample_cap)
        self.subsample_seed = int(subsample_seed)
        self.verbosity = int(verbosity)
        self._check()

    def _check(self):
        if not (np.isfinite(self.c) and self.c > 0):
            raise InvalidKernelParamsError(f"The scale c has to be positive, not {self.c}.")
        if self.policy not in POLICIES:
            raise DomainError(f"Unknown policy {self.policy}, has to be one of {POLICIES}.")
        if self.policy == 'fixed':
            if self.alpha is None:
                raise DomainError("The 'fixed' policy requires `alpha`.")
            KernelParams(alpha=self.alpha, c=self.c)
        if self.alpha_min > self.alpha_max:
            raise DomainError(f"alpha_min ({self.alpha_min}) is larger than alpha_max ({self.alpha_max}).")
        for name in ('resolution', 'tau_factor', 'step_tol', 'cost_tol', 'lm_up', 'lm_lambda_max'):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} has to be positive, not {getattr(self, name)}.")
        if not 0 < self.lm_down <= 1 or self.lm_up < 1:
            raise DomainError(f"Damping factors have to satisfy 0 < lm_down <= 1 <= lm_up, "
                              f"got {self.lm_down} and {self.lm_up}.")
        if self.lm_lambda < 0:
            raise DomainError(f"lm_lambda cannot be negative, is {self.lm_lambda}.")
        for name in ('max_em_iterations', 'max_irls_iterations', 'subsample_cap'):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} has to be at least 1, not {getattr(self, name)}.")

    @property
    def adaptive(self) -> bool:
        return self.policy == 'adaptive'

    @property
    def tau(self) -> float:
        """Truncation limit in normalized units, as stored in the partition table."""
        return self.tau_factor

    def kernel(self) -> Union[KernelParams, NamedKernel]:
        """The fixed kernel of a non-adaptive policy."""
        if self.adaptive:
            raise DomainError("The adaptive policy has no fixed kernel, alpha is estimated.")
        if self.policy == 'fixed':
            return KernelParams(alpha=self.alpha, c=self.c)
        return named_kernel(self.policy, c=self.c)

    def table_matches(self, table: PartitionTable) -> bool:
        return table.matches(alpha_min=self.alpha_min, alpha_max=self.alpha_max, resolution=self.resolution,
                             tau=self.tau)

    def copy_with(self, **kwargs) -> "SolverConfig":
        """A copy with some fields replaced."""
        fields = self.to_dict()
        unknown = set(kwargs) - set(fields)
        if unknown:
            raise KeyError(f"{sorted(unknown)} are not fields of SolverConfig.")
        return type(self)(**{**fields, **kwargs})

    def to_dict(self) -> Dict:
        return {'c': self.c, **{key: getattr(self, key) for key in self._FIELDS}}

    def __repr__(self) -> str:
        return f"<SolverConfig policy={self.policy} c={self.c}>"
