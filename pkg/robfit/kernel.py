#  Copyright (c) 2021 robfit

from .core.adaptive import AlphaEstimate, estimate_alpha, log_likelihood, sample_density
from .core.kernel import (NAMED_KERNELS, Cauchy, GemanMcClure, KernelParams, NamedKernel, PseudoHuber, SquaredL2,
                          Welsch, kernel_from_alpha, named_kernel, named_rho, named_rho_prime, named_weight, rho,
                          rho_prime, weight)
from .core.partition import (PartitionTable, build_table, compute_log_partition, default_table, log_density,
                             truncated_loss)

__all__ = ['KernelParams', 'NamedKernel', 'NAMED_KERNELS',
           'SquaredL2', 'PseudoHuber', 'Cauchy', 'GemanMcClure', 'Welsch',
           'rho', 'rho_prime', 'weight', 'named_kernel', 'named_rho', 'named_rho_prime', 'named_weight',
           'kernel_from_alpha',
           'PartitionTable', 'compute_log_partition', 'build_table', 'default_table', 'log_density',
           'truncated_loss',
           'AlphaEstimate', 'estimate_alpha', 'log_likelihood', 'sample_density',
           ]
