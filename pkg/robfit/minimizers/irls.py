#  Copyright (c) 2021 robfit
import logging
import time
from typing import Dict, Optional

import numpy as np
import scipy.linalg

from ..core.adaptive import residual_mad
from ..core.interfaces import ProblemInstance, RobustKernel
from ..util import ztyping
from .config import SolverConfig
from .evaluation import (ProblemEval, normal_equations, print_iteration, robust_cost, weighted_squared_cost)
from .report import SolveReport
from .termination import (COST_INCREASE, ITERATION_LIMIT, NO_VALID_BLOCKS, SINGULAR_SYSTEM, STOP_REASONS,
                          RelativeCostChange, StepSize, max_step)

logger = logging.getLogger(__name__)


def _solve_damped(hessian: np.ndarray, gradient: np.ndarray, damping: float) -> Optional[np.ndarray]:
    """Solve (H + damping * I) delta = -g by Cholesky, None if the system is not positive definite."""
    system = hessian + damping * np.eye(hessian.shape[0])
    try:
        factor = scipy.linalg.cho_factor(system)
    except (np.linalg.LinAlgError, ValueError):
        return None
    delta = -scipy.linalg.cho_solve(factor, gradient)
    if not np.all(np.isfinite(delta)):
        return None
    return delta


def m_step(evaluator: ProblemEval, theta0: ztyping.ThetaType, kernel: RobustKernel, config: SolverConfig) -> Dict:
    """Minimize the robust cost with the kernel fixed, by IRLS with Levenberg-Marquardt damping.

    Every iteration weights each residual block with the kernel weight of its norm, solves the damped
    weighted normal equations and accepts the step if the robust cost does not increase and no valid block
    turns invalid. A rejected step increases the damping and is retried from the same linearization. Without
    damping (`lm_lambda = 0`) a rejected Gauss-Newton step ends the M-step with `COST_INCREASE`.

    Returns:
        A dict with the final `theta`, `converged`, `reason`, `iterations`, `max_step` (of the last step),
        `cost`, `cost_history` (accepted iterates, starting with `theta0`), `norms`, `mask` and `weights`.
    """
    problem = evaluator.problem
    criteria = [StepSize(tol=config.step_tol), RelativeCostChange(tol=config.cost_tol)]
    do_print = config.verbosity > 9
    theta = theta0
    residuals, norms, mask = evaluator.norms(theta)
    cost = robust_cost(norms[mask], kernel)
    cost_history = [cost]
    lm_lambda = config.lm_lambda
    converged = False
    reason = ITERATION_LIMIT
    last_step = 0.
    iterations = 0
    weights = np.where(mask, kernel.weight(norms), 0.)
    if not np.any(mask):
        logger.warning(f"All {mask.size} residual blocks of {problem} are invalid, nothing to solve.")
        return {'theta': theta, 'converged': False, 'reason': NO_VALID_BLOCKS, 'iterations': 0, 'max_step': 0.,
                'cost': cost, 'cost_history': cost_history, 'norms': norms, 'mask': mask, 'weights': weights}

    for iterations in range(1, config.max_irls_iterations + 1):
        jacobian = evaluator.jacobian_matrix(theta)
        weights = np.where(mask, kernel.weight(norms), 0.)
        hessian, gradient = normal_equations(residuals, jacobian, weights)
        diag_scale = float(np.mean(np.diag(hessian))) if config.scale_damping else 1.
        accepted = False
        while not accepted:
            delta = _solve_damped(hessian, gradient, lm_lambda * diag_scale)
            if delta is None:
                if lm_lambda == 0 or lm_lambda * config.lm_up > config.lm_lambda_max or diag_scale <= 0:
                    reason = SINGULAR_SYSTEM
                    break
                lm_lambda *= config.lm_up
                continue
            last_step = max_step(delta)
            theta_new = problem.plus(theta, delta)
            residuals_new, norms_new, mask_new = evaluator.norms(theta_new)
            cost_new = robust_cost(norms_new[mask_new], kernel)
            # steps that turn a valid block invalid are rejected
            lost_blocks = bool(np.any(mask & ~mask_new))
            if cost_new <= cost and not lost_blocks:
                accepted = True
                if do_print:
                    print_iteration(iterations, cost_new, lm_lambda, delta, accepted=True)
                step_converged = criteria[0].converged(delta, cost, cost_new)
                cost_converged = criteria[1].converged(delta, cost, cost_new)
                theta, residuals, norms, mask = theta_new, residuals_new, norms_new, mask_new
                cost_old, cost = cost, cost_new
                cost_history.append(cost)
                lm_lambda *= config.lm_down
                logger.debug(f"IRLS iteration {iterations}: cost {cost_old:.10g} -> {cost:.10g}, "
                             f"max step {last_step:.3g}")
                for criterion, criterion_converged in zip(criteria, (step_converged, cost_converged)):
                    if criterion_converged:
                        converged = True
                        reason = criterion.name
                        break
            else:
                if do_print:
                    print_iteration(iterations, cost_new, lm_lambda, delta, accepted=False)
                if last_step < config.step_tol:
                    # the step vanishes before the cost decreases, nothing left to gain
                    converged = True
                    reason = criteria[0].name
                    break
                if lm_lambda == 0:
                    reason = COST_INCREASE
                    break
                if lm_lambda * config.lm_up > config.lm_lambda_max:
                    reason = SINGULAR_SYSTEM
                    break
                lm_lambda *= config.lm_up
        if converged or reason in STOP_REASONS:
            break
    if reason == SINGULAR_SYSTEM:
        logger.warning(f"Singular normal equations in {problem} after {iterations} iterations.")
    weights = np.where(mask, kernel.weight(norms), 0.)
    return {'theta': theta, 'converged': converged, 'reason': reason, 'iterations': iterations,
            'max_step': last_step, 'cost': cost, 'cost_history': cost_history, 'norms': norms, 'mask': mask,
            'weights': weights}


def make_record(iteration: int, alpha: float, m_result: Dict, joint_cost: Optional[float] = None,
                degenerate: bool = False) -> Dict:
    return {
        'iteration': iteration,
        'alpha': alpha,
        'robust_cost': m_result['cost'],
        'weighted_sq_cost': weighted_squared_cost(m_result['norms'], m_result['weights']),
        'irls_iterations': m_result['iterations'],
        'max_step': m_result['max_step'],
        'joint_cost': joint_cost,
        'degenerate': degenerate,
        'm_converged': m_result['converged'],
        'cost_history': m_result['cost_history'],
    }


def irls_solve(problem: ProblemInstance, theta0: ztyping.ThetaType, kernel: RobustKernel,
               config: SolverConfig) -> SolveReport:
    """Robust least squares with a fixed kernel by iteratively reweighted least squares.

    Args:
        problem: The problem.
        theta0: Start state.
        kernel: A :py:class:`~robfit.core.kernel.KernelParams` or named kernel, fixed for the whole call.
        config: Solver controls, only the IRLS and damping fields are used.

    Returns:
        Report with a single record. A singular system is a termination reason, not an error.

    Raises:
        NonFiniteResidualError: if a residual block is not finite.
    """
    start = time.perf_counter()
    evaluator = ProblemEval(problem, do_print=config.verbosity > 9)
    _, initial_norms, _ = evaluator.norms(theta0)
    m_result = m_step(evaluator, theta0, kernel, config)
    record = make_record(iteration=1, alpha=kernel.alpha, m_result=m_result)
    diagnostics = {'initial_mad': residual_mad(initial_norms), 'function_evaluations': evaluator.nfunc_eval,
                   'jacobian_evaluations': evaluator.njac_eval, 'invalid_blocks': evaluator.invalid_block_count}
    report = SolveReport(theta=m_result['theta'], converged=m_result['converged'], reason=m_result['reason'],
                         records=[record], policy=config.policy, kernel=kernel.name, c=kernel.c,
                         diagnostics=diagnostics, wall_time=time.perf_counter() - start)
    if config.verbosity > 5:
        print(report)
    return report
