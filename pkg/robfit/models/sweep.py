"""Convergence basin of bundle adjustment under perturbed initial camera poses, per kernel policy."""

#  Copyright (c) 2021 robfit
import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.spatial.transform import Rotation

from .. import settings
from ..core.partition import PartitionTable
from ..minimizers.config import SolverConfig
from ..minimizers.em import solve, table_for_config
from ..util import ztyping
from ..util.exception import DomainError, SolverError
from .bundle import BAProblem, BAScene, BAState, camera_center_rms, triangulate_midpoint
from .geometry import RigidTransform

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ['policy', 'sigma', 'sample', 'seed', 'success', 'rms_error', 'final_alpha', 'iterations']
SUMMARY_COLUMNS = ['policy', 'sigma', 'success_rate', 'median_rms_error']
DEFAULT_POLICIES = ('squared', 'huber', 'geman_mcclure', 'adaptive')
SUCCESS_THRESHOLD = 0.01


def perturb_poses(scene: BAScene, sigma: float, rng: np.random.Generator, rotation_sigma: float = 0.,
                  frozen_axis: Optional[int] = None) -> Tuple[RigidTransform, ...]:
    """Move the centers of cameras 1..n-1 by isotropic Gaussian noise of `sigma` meters.

    Rotations are perturbed by a random rotation vector of `rotation_sigma` radians per component. Camera 0 is
    left untouched and the frozen translation coordinate of camera 1 keeps its value.
    """
    if frozen_axis is None:
        frozen_axis = int(np.argmax(np.abs(scene.poses[1].translation)))
    poses = [scene.poses[0]]
    for camera, pose in enumerate(scene.poses[1:], start=1):
        center = pose.center() + sigma * rng.standard_normal(3)
        rotation = pose.rotation
        if rotation_sigma > 0:
            rotation = (Rotation.from_rotvec(rotation_sigma * rng.standard_normal(3))
                        * Rotation.from_matrix(rotation)).as_matrix()
        translation = -rotation @ center
        if camera == 1:
            translation[frozen_axis] = pose.translation[frozen_axis]
        poses.append(RigidTransform(rotation, translation))
    return tuple(poses)


def _cell_seeds(seed: ztyping.SeedType, n_sigmas: int, samples: int) -> np.ndarray:
    children = np.random.SeedSequence(seed).spawn(n_sigmas * samples)
    return np.array([int(child.generate_state(1)[0]) for child in children]).reshape(n_sigmas, samples)


def basin_sweep(scene: BAScene, sigmas: Sequence[float], samples: int = 20,
                policies: Sequence[str] = DEFAULT_POLICIES, seed: ztyping.SeedType = 0,
                config: Optional[SolverConfig] = None, rotation_sigma: float = 0.,
                success_threshold: float = SUCCESS_THRESHOLD,
                table: Optional[PartitionTable] = None) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Solve perturbed instances of `scene` with every policy and record which converge to the true cameras.

    For every noise level and sample, the initial camera poses are perturbed (:py:func:`perturb_poses`) and the
    landmarks are re-triangulated from them. All policies start from the identical perturbed state. A solve
    succeeds if the RMS camera center error is below `success_threshold` meters; a solve that fails with a
    solver or domain error counts as a failure.

    Args:
        scene: The scene with the true poses and the observed pixels.
        sigmas: Standard deviations of the camera center perturbation, in meters.
        samples: Instances per noise level.
        policies: Kernel policies to compare.
        seed: Master seed; every (sigma, sample) cell gets a spawned seed shared by all policies.
        config: Base solver config, its policy is replaced. Defaults to c = 1 pixel.
        rotation_sigma: Rotation perturbation in radians.
        success_threshold: Largest RMS camera center error of a success, in meters.
        table: Partition table for the adaptive policy.

    Returns:
        The per sample records (columns `SWEEP_COLUMNS`) and the success rate per policy and noise level
        (columns `SUMMARY_COLUMNS`).
    """
    policies = list(policies)
    if not policies:
        raise DomainError("The sweep needs at least one policy.")
    sigmas = [float(sigma) for sigma in sigmas]
    if any(sigma < 0 for sigma in sigmas):
        raise DomainError(f"Noise levels cannot be negative: {sigmas}.")
    if config is None:
        config = SolverConfig(c=1.)
    configs = {policy: config.copy_with(policy=policy) for policy in policies}
    if 'adaptive' in policies:
        table = table_for_config(configs['adaptive'], table)
    problem = BAProblem(scene)
    seeds = _cell_seeds(seed, len(sigmas), samples)
    cells = [(i_sigma, sample) for i_sigma in range(len(sigmas)) for sample in range(samples)]

    def run_cell(cell):
        i_sigma, sample = cell
        cell_seed = int(seeds[i_sigma, sample])
        rng = np.random.default_rng(cell_seed)
        poses = perturb_poses(scene, sigmas[i_sigma], rng, rotation_sigma=rotation_sigma,
                              frozen_axis=problem.frozen_axis)
        state = BAState(poses, triangulate_midpoint(scene, poses))
        rows = []
        for policy in policies:
            row = {'policy': policy, 'sigma': sigmas[i_sigma], 'sample': sample, 'seed': cell_seed,
                   'success': False, 'rms_error': np.nan, 'final_alpha': np.nan, 'iterations': 0}
            try:
                report = solve(problem, state, configs[policy], table=table)
            except (SolverError, DomainError, np.linalg.LinAlgError) as error:
                logger.warning(f"Policy {policy} failed at sigma {sigmas[i_sigma]}, sample {sample}: {error}")
            else:
                rms_error = camera_center_rms(report.theta.poses, scene.poses)
                row.update(success=bool(rms_error < success_threshold), rms_error=rms_error,
                           final_alpha=report.final_alpha,
                           iterations=sum(record['irls_iterations'] for record in report.records))
            rows.append(row)
        return rows

    results = settings.run.map(run_cell, cells)
    records = pd.DataFrame([row for rows in results for row in rows], columns=SWEEP_COLUMNS)
    logger.info(f"Sweep over {len(sigmas)} noise levels x {samples} samples x {len(policies)} policies done.")
    return records, summarize_sweep(records)


def summarize_sweep(records: pd.DataFrame) -> pd.DataFrame:
    """Success rate and median RMS error per policy and noise level, in the order of appearance."""
    grouped = records.groupby(['policy', 'sigma'], sort=False)
    summary = grouped.agg(success_rate=('success', 'mean'), median_rms_error=('rms_error', 'median'))
    return summary.reset_index()[SUMMARY_COLUMNS]


def success_rates(records: pd.DataFrame) -> pd.Series:
    """Aggregate success rate per policy over the whole sweep."""
    return records.groupby('policy', sort=False)['success'].mean()
