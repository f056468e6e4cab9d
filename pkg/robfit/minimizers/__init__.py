#  Copyright (c) 2021 robfit

from .config import SolverConfig
from .em import em_solve, solve
from .evaluation import ProblemEval
from .irls import irls_solve
from .report import SolveReport

__all__ = ["SolverConfig", "SolveReport", "ProblemEval", "irls_solve", "em_solve", "solve"]
