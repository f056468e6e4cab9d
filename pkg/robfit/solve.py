#  Copyright (c) 2021 robfit

from .minimizers.config import POLICIES, SolverConfig
from .minimizers.em import em_solve, solve
from .minimizers.irls import irls_solve
from .minimizers.report import SolveReport
from .minimizers.termination import RelativeCostChange, StepSize

__all__ = ['SolverConfig', 'POLICIES', 'SolveReport', 'solve', 'em_solve', 'irls_solve',
           'StepSize', 'RelativeCostChange']
