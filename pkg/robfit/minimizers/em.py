#  Copyright (c) 2021 robfit
import logging
import time
from typing import Optional

import numpy as np

from ..core.adaptive import estimate_alpha, residual_mad
from ..core.interfaces import ProblemInstance
from ..core.kernel import KernelParams
from ..core.partition import PartitionTable, build_table, default_table
from ..util import ztyping
from ..util.exception import GridMismatchError
from .config import SolverConfig
from .evaluation import ProblemEval
from .irls import irls_solve, make_record, m_step
from .report import SolveReport
from .termination import EM_CONVERGED, EM_ITERATION_LIMIT, NO_VALID_BLOCKS, STOP_REASONS

logger = logging.getLogger(__name__)

INITIAL_ALPHA = 2.


def table_for_config(config: SolverConfig, table: Optional[PartitionTable] = None) -> PartitionTable:
    """The partition table of the config grid: `table` if given (checked), the default one or a fresh one."""
    if table is not None:
        if not config.table_matches(table):
            raise GridMismatchError(f"{table} does not match the grid of {config}: alpha in "
                                    f"[{config.alpha_min}, {config.alpha_max}] step {config.resolution}, "
                                    f"tau {config.tau}.")
        return table
    default = default_table()
    if config.table_matches(default):
        return default
    return build_table(alpha_min=config.alpha_min, alpha_max=config.alpha_max, resolution=config.resolution,
                       tau=config.tau)


def joint_cost(norms: np.ndarray, alpha: float, c: float, table: PartitionTable) -> float:
    """Sum of the truncated adaptive loss rho + log(c Z(alpha)) over the block norms."""
    params = KernelParams(alpha=alpha, c=c)
    return float(np.sum(params.rho(norms)) + norms.size * (np.log(c) + table.log_z_at(alpha)))


def em_solve(problem: ProblemInstance, theta0: ztyping.ThetaType, config: SolverConfig,
             table: Optional[PartitionTable] = None) -> SolveReport:
    """Jointly estimate the parameters and the kernel shape by alternating E- and M-steps.

    Starting from alpha = 2, every EM iteration estimates alpha by grid search on the norms of the current
    (valid) residual blocks and then minimizes the robust cost with this alpha frozen. The loop stops when
    alpha did not change and the M-step converged, at the EM iteration cap, when no residual block is valid
    or when the M-step cannot move any more (singular system, rejected undamped step).

    Args:
        problem: The problem.
        theta0: Start state.
        config: Solver controls; the grid fields have to match `table`.
        table: Partition table. Defaults to the cached default table if the grid matches, otherwise one is built.

    Returns:
        Report with one record per EM iteration.

    Raises:
        GridMismatchError: if `table` does not match the grid of `config`.
        NonFiniteResidualError: if a residual block is not finite.
    """
    start = time.perf_counter()
    table = table_for_config(config, table)
    evaluator = ProblemEval(problem, do_print=config.verbosity > 9)
    c = config.c
    alpha_prev = table.quantize(INITIAL_ALPHA)
    theta = theta0
    records = []
    converged = False
    reason = EM_ITERATION_LIMIT
    _, norms, mask = evaluator.norms(theta)
    initial_mad = residual_mad(norms)

    for iteration in range(1, config.max_em_iterations + 1):
        if not np.any(mask):
            logger.warning(f"All {mask.size} residual blocks of {problem} are invalid, alpha cannot be estimated.")
            reason = NO_VALID_BLOCKS
            break
        estimate = estimate_alpha(norms[mask], c=c, table=table, subsample_cap=config.subsample_cap,
                                  subsample_seed=config.subsample_seed)
        kernel = KernelParams(alpha=estimate.alpha, c=c)
        m_result = m_step(evaluator, theta, kernel, config)
        theta = m_result['theta']
        norms, mask = m_result['norms'], m_result['mask']
        record = make_record(iteration=iteration, alpha=estimate.alpha, m_result=m_result,
                             joint_cost=joint_cost(norms[mask], estimate.alpha, c, table),
                             degenerate=estimate.degenerate)
        records.append(record)
        logger.debug(f"EM iteration {iteration}: alpha={estimate.alpha}, cost {m_result['cost']:.10g}, "
                     f"{m_result['iterations']} IRLS iterations")
        if m_result['reason'] in STOP_REASONS:
            reason = m_result['reason']
            break
        if estimate.alpha == alpha_prev and m_result['converged']:
            converged = True
            reason = EM_CONVERGED
            break
        alpha_prev = estimate.alpha

    diagnostics = {'initial_mad': initial_mad, 'function_evaluations': evaluator.nfunc_eval,
                   'jacobian_evaluations': evaluator.njac_eval, 'invalid_blocks': evaluator.invalid_block_count}
    report = SolveReport(theta=theta, converged=converged, reason=reason, records=records, policy='adaptive',
                         kernel=KernelParams(alpha=records[-1]['alpha'] if records else alpha_prev, c=c).name, c=c,
                         diagnostics=diagnostics, wall_time=time.perf_counter() - start)
    if config.verbosity > 5:
        print(report)
    return report


def solve(problem: ProblemInstance, theta0: ztyping.ThetaType, config: SolverConfig,
          table: Optional[PartitionTable] = None) -> SolveReport:
    """Solve with the policy of `config`: EM for 'adaptive', IRLS with the fixed kernel otherwise."""
    if config.adaptive:
        return em_solve(problem, theta0, config, table=table)
    return irls_solve(problem, theta0, config.kernel(), config)
