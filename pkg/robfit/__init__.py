"""Top-level package for robfit."""

#  Copyright (c) 2021 robfit

from pkg_resources import DistributionNotFound, get_distribution

try:
    __version__ = get_distribution(__name__).version
except DistributionNotFound:  # not installed, e.g. running from the source tree
    __version__ = "0.0.0.dev0"

__license__ = "BSD 3-Clause"
__copyright__ = "Copyright 2021, robfit"
__status__ = "Beta"

__all__ = ["kernel", "solve", "problem", "core", "minimizers", "models", "exception", "settings",
           "KernelParams", "NamedKernel", "PartitionTable", "SolverConfig", "SolveReport",
           "build_table", "default_table", "estimate_alpha", "irls_solve", "em_solve",
           "run"]

from . import core, exception, kernel, minimizers, models, problem, settings, solve
from .core.kernel import KernelParams, NamedKernel
from .core.partition import PartitionTable, build_table, default_table
from .core.adaptive import estimate_alpha
from .minimizers.config import SolverConfig
from .minimizers.report import SolveReport
from .minimizers.irls import irls_solve
from .minimizers.em import em_solve
from .settings import run

# EOF
