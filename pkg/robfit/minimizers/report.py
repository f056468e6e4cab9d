#  Copyright (c) 2021 robfit
import json
from typing import Dict, List, Optional

import colored
import numpy as np
import pandas as pd
from colorama import Style
from tabulate import tabulate

from ..util import ztyping
from .termination import FAILURE_REASONS, SINGULAR_SYSTEM

TRACE_COLUMNS = ['iteration', 'alpha', 'robust_cost', 'max_step']


def theta_to_json(theta: ztyping.ThetaType):
    """JSON compatible representation of a parameter state."""
    if hasattr(theta, 'to_dict'):
        return theta.to_dict()
    return np.asarray(theta, dtype=np.float64).tolist()


def to_builtin(value):
    if isinstance(value, dict):
        return {key: to_builtin(val) for key, val in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(val) for val in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        # JSON has no infinity, e.g. the Welsch shape
        return float(value) if np.isfinite(value) else None
    return value


class SolveReport:

    def __init__(self, theta: ztyping.ThetaType, converged: bool, reason: str, records: ztyping.RecordsType,
                 policy: str, kernel: str, c: float, diagnostics: Optional[Dict] = None,
                 wall_time: Optional[float] = None):
        """Outcome of a solve: the final state, the termination reason and one record per (EM) iteration.

        Every record is a dict with the keys `iteration`, `alpha`, `robust_cost`, `weighted_sq_cost`,
        `irls_iterations`, `max_step`, `joint_cost` (None without partition table), `degenerate`,
        `m_converged` and `cost_history`, the robust cost at every accepted iterate of the M-step.

        Args:
            theta: Final parameter state.
            converged: Whether a convergence criterion was met.
            reason: Human readable termination reason.
            records: Per iteration records.
            policy: Kernel policy of the solve.
            kernel: Name of the (last) kernel.
            c: Scale of the kernel.
            diagnostics: Additional information such as the initial residual MAD or evaluation counts.
            wall_time: Duration of the solve in seconds. Not part of the primary outputs.
        """
        self.theta = theta
        self.converged = bool(converged)
        self.reason = reason
        self.records = records
        self.policy = policy
        self.kernel = kernel
        self.c = c
        self.diagnostics = {} if diagnostics is None else diagnostics
        self.wall_time = wall_time

    @property
    def n_iterations(self) -> int:
        return len(self.records)

    @property
    def alpha_trace(self) -> List[float]:
        return [record['alpha'] for record in self.records]

    @property
    def cost_trace(self) -> List[float]:
        return [record['robust_cost'] for record in self.records]

    @property
    def final_alpha(self) -> Optional[float]:
        return self.records[-1]['alpha'] if self.records else None

    @property
    def final_cost(self) -> Optional[float]:
        return self.records[-1]['robust_cost'] if self.records else None

    @property
    def singular(self) -> bool:
        return self.reason == SINGULAR_SYSTEM

    @property
    def failed(self) -> bool:
        """The solve stopped without a usable result, e.g. singular or without valid residual blocks."""
        return self.reason in FAILURE_REASONS

    def to_dict(self, include_timing: bool = False) -> Dict:
        """Serializable representation; timing is only included on request to keep it reproducible."""
        result = {
            'theta': theta_to_json(self.theta),
            'converged': self.converged,
            'reason': self.reason,
            'policy': self.policy,
            'kernel': self.kernel,
            'c': self.c,
            'final_alpha': self.final_alpha,
            'n_iterations': self.n_iterations,
            'records': self.records,
            'diagnostics': self.diagnostics,
        }
        if include_timing:
            result['wall_time'] = self.wall_time
        return to_builtin(result)

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing=include_timing), indent=2)

    def trace_frame(self) -> pd.DataFrame:
        """Per iteration trace with the columns iteration, alpha, robust_cost and max_step."""
        return pd.DataFrame([{key: record[key] for key in TRACE_COLUMNS} for record in self.records],
                            columns=TRACE_COLUMNS)

    def write_trace_csv(self, path: ztyping.PathType) -> None:
        self.trace_frame().to_csv(path, index=False, float_format='%.17g')

    def __str__(self):
        string = Style.BRIGHT + 'SolveReport' + Style.NORMAL + f' with policy {self.policy} (c={self.c})\n\n'
        string += tabulate(
            [[self.converged, color_termination(self.converged, self.reason), self.n_iterations,
              format_value(self.final_alpha), format_value(self.final_cost)]],
            ['converged', 'reason', 'iterations', 'alpha', 'robust cost'],
            tablefmt='fancy_grid',
            disable_numparse=True)
        return string

    def __repr__(self) -> str:
        return f"<SolveReport policy={self.policy} converged={self.converged} iterations={self.n_iterations}>"


def format_value(value, highprec=True):
    if isinstance(value, float):
        if highprec:
            value = f"{value:> 6.4g}"
        else:
            value = f"{value:> 6.2g}"
    return value


def color_termination(converged: bool, reason: str) -> str:
    """The termination reason in green if converged, red if the solve failed and yellow otherwise."""
    if converged:
        color = colored.fg(10)
    elif reason in FAILURE_REASONS:
        color = colored.fg(9)
    else:
        color = colored.fg(11)
    return f"{color}{reason}{Style.RESET_ALL}"
