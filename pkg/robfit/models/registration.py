"""Rigid registration of point clouds: data association, the registration problem and the ICP loop."""

#  Copyright (c) 2021 robfit
import logging
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist

from ..core.kernel import KernelParams
from ..core.partition import PartitionTable
from ..core.problem import BaseProblem
from ..core.testing import tester
from ..minimizers.config import SolverConfig
from ..minimizers.em import solve, table_for_config
from ..minimizers.irls import irls_solve
from ..minimizers.report import SolveReport
from ..util import ztyping
from ..util.exception import DomainError, MissingNormalsError
from .cloud import PointCloud
from .geometry import RigidTransform, perp, pose_error, skew
from .synthetic import synthetic_scan

logger = logging.getLogger(__name__)

VARIANTS = ('point_to_plane', 'point_to_point')
CADENCES = ('iteration', 'frame')

ICP_CONVERGED = "transform increment below tolerance"
ICP_ITERATION_LIMIT = "ICP iteration limit reached"


def nearest_correspondences(source: PointCloud, target: PointCloud, transform: Optional[RigidTransform] = None,
                            chunk_size: int = 1024) -> np.ndarray:
    """Index of the Euclidean nearest target point for every transformed source point.

    Exhaustive search; equally distant candidates resolve to the lowest target index.
    """
    if len(source) == 0 or len(target) == 0:
        raise DomainError("Correspondence search needs non-empty clouds.")
    points = source.points if transform is None else transform.apply(source.points)
    indices = np.empty(len(source), dtype=np.int64)
    for start in range(0, len(source), chunk_size):
        distances = cdist(points[start:start + chunk_size], target.points, 'sqeuclidean')
        indices[start:start + chunk_size] = np.argmin(distances, axis=1)
    return indices


class RegistrationProblem(BaseProblem):

    def __init__(self, source: PointCloud, target: PointCloud, correspondences: ztyping.CorrespondenceType,
                 variant: str = 'point_to_plane', name: Optional[str] = None):
        """Align `source` to `target` over SE(2) or SE(3); the state is a :py:class:`RigidTransform`.

        The point-to-plane residual of a pair (p, q) is the scalar n_q^T (T p - q), the point-to-point residual
        the vector T p - q.

        Args:
            source: Points to transform.
            target: Reference points, with normals for point-to-plane.
            correspondences: For every source point the index of its target point.
            variant: 'point_to_plane' or 'point_to_point'.

        Raises:
            MissingNormalsError: if point-to-plane is requested and the target has no normals.
        """
        super().__init__(name=name)
        if variant not in VARIANTS:
            raise DomainError(f"Unknown registration variant {variant}, has to be one of {VARIANTS}.")
        if source.dim != target.dim:
            raise DomainError(f"Cannot register a {source.dim}-D to a {target.dim}-D cloud.")
        correspondences = np.asarray(correspondences, dtype=np.int64)
        if correspondences.shape != (len(source),):
            raise DomainError(f"Expected {len(source)} correspondences, got {correspondences.shape}.")
        if np.any(correspondences < 0) or np.any(correspondences >= len(target)):
            raise DomainError("Correspondence index out of range of the target cloud.")
        if variant == 'point_to_plane' and not target.has_normals:
            raise MissingNormalsError("Point-to-plane registration needs target normals.")
        self.variant = variant
        self.source_points = source.points
        self.target_points = target.points[correspondences]
        self.target_normals = target.normals[correspondences] if target.has_normals else None
        self.point_dim = source.dim
        self._dim = 3 if source.dim == 2 else 6
        self._n_blocks = len(source)
        self._block_dim = 1 if variant == 'point_to_plane' else source.dim

    def _residuals(self, theta: RigidTransform):
        error = theta.apply(self.source_points) - self.target_points
        if self.variant == 'point_to_plane':
            return np.sum(self.target_normals * error, axis=1)
        return error

    def _jacobians(self, theta: RigidTransform):
        rotated = theta.rotate(self.source_points)
        n = self.n_blocks
        if self.point_dim == 2:
            point_jacobian = np.concatenate([np.broadcast_to(np.eye(2), (n, 2, 2)), perp(rotated)[:, :, None]],
                                            axis=2)
        else:
            point_jacobian = np.concatenate([np.broadcast_to(np.eye(3), (n, 3, 3)), -skew(rotated)], axis=2)
        if self.variant == 'point_to_plane':
            return np.einsum('nd,ndk->nk', self.target_normals, point_jacobian)
        return point_jacobian

    def plus(self, theta: RigidTransform, delta: ztyping.DeltaType) -> RigidTransform:
        return theta.plus(delta)


def registration_problem(source: PointCloud, target: PointCloud, correspondences: ztyping.CorrespondenceType,
                         variant: str = 'point_to_plane') -> RegistrationProblem:
    return RegistrationProblem(source, target, correspondences, variant=variant)


class IcpConfig:

    def __init__(self, variant: str = 'point_to_plane', max_icp_iterations: int = 30, rotation_tol: float = 1e-7,
                 translation_tol: float = 1e-7, alpha_cadence: str = 'iteration'):
        """Controls of the ICP loop.

        Args:
            variant: Registration residual, 'point_to_plane' or 'point_to_point'.
            max_icp_iterations: Cap on the association/solve alternations.
            rotation_tol: Stop when the rotation increment of an iteration is below this angle (radians)...
            translation_tol: ...and the translation increment below this length (meters).
            alpha_cadence: 'iteration' re-estimates the shape in every ICP iteration, 'frame' estimates it in
                the first iteration of the call and keeps it frozen afterwards.
        """
        if variant not in VARIANTS:
            raise DomainError(f"Unknown registration variant {variant}, has to be one of {VARIANTS}.")
        if alpha_cadence not in CADENCES:
            raise DomainError(f"Unknown alpha cadence {alpha_cadence}, has to be one of {CADENCES}.")
        if int(max_icp_iterations) < 1:
            raise DomainError(f"max_icp_iterations has to be at least 1, not {max_icp_iterations}.")
        self.variant = variant
        self.max_icp_iterations = int(max_icp_iterations)
        self.rotation_tol = float(rotation_tol)
        self.translation_tol = float(translation_tol)
        self.alpha_cadence = alpha_cadence

    def __repr__(self) -> str:
        return f"<IcpConfig {self.variant} cadence={self.alpha_cadence}>"


def icp_pipeline(source: PointCloud, target: PointCloud, init: RigidTransform, config: SolverConfig,
                 icp_config: Optional[IcpConfig] = None,
                 table: Optional[PartitionTable] = None) -> Tuple[SolveReport, RigidTransform]:
    """Iterative closest point: alternate nearest neighbor association and a robust solve.

    Every ICP iteration associates the transformed source with the target and solves the registration
    problem with the policy of `config`, starting from the current transform.

    Returns:
        A report with one record per ICP iteration (alpha trace) and the final transform.
    """
    start = time.perf_counter()
    if icp_config is None:
        icp_config = IcpConfig()
    if config.adaptive:
        table = table_for_config(config, table)
    transform = init
    frozen_kernel = None
    records = []
    converged = False
    reason = ICP_ITERATION_LIMIT
    kernel_name = None
    inner_iterations = 0
    iteration = 0
    for iteration in range(1, icp_config.max_icp_iterations + 1):
        correspondences = nearest_correspondences(source, target, transform)
        problem = RegistrationProblem(source, target, correspondences, variant=icp_config.variant)
        if frozen_kernel is not None:
            report = irls_solve(problem, transform, frozen_kernel, config)
        else:
            report = solve(problem, transform, config, table=table)
            if config.adaptive and icp_config.alpha_cadence == 'frame':
                frozen_kernel = KernelParams(alpha=report.final_alpha, c=config.c)
        kernel_name = report.kernel
        inner_iterations += sum(record['irls_iterations'] for record in report.records)
        rotation_increment, translation_increment = pose_error(report.theta, transform)
        transform = report.theta
        record = dict(report.records[-1])
        record.update(iteration=iteration, em_iterations=report.n_iterations,
                      rotation_increment=np.radians(rotation_increment),
                      translation_increment=translation_increment)
        records.append(record)
        logger.debug(f"ICP iteration {iteration}: alpha={record['alpha']}, increment "
                     f"{rotation_increment:.3g} deg / {translation_increment:.3g} m")
        if report.failed:
            reason = report.reason
            break
        if (np.radians(rotation_increment) < icp_config.rotation_tol
                and translation_increment < icp_config.translation_tol):
            converged = True
            reason = ICP_CONVERGED
            break
    diagnostics = {'icp_iterations': iteration, 'irls_iterations': inner_iterations,
                   'variant': icp_config.variant, 'alpha_cadence': icp_config.alpha_cadence}
    report = SolveReport(theta=transform, converged=converged, reason=reason, records=records,
                         policy=config.policy, kernel=kernel_name, c=config.c, diagnostics=diagnostics,
                         wall_time=time.perf_counter() - start)
    return report, transform


ODOMETRY_COLUMNS = ['frame', 'alpha', 'converged', 'icp_iterations', 'rotation_error_deg', 'translation_error_m']


def odometry_sequence(frames: Sequence[PointCloud], config: SolverConfig, icp_config: Optional[IcpConfig] = None,
                      truths: Optional[Sequence[RigidTransform]] = None,
                      table: Optional[PartitionTable] = None) -> Tuple[pd.DataFrame, List[RigidTransform]]:
    """Register every frame onto its predecessor, starting from the previous relative motion.

    Args:
        frames: Consecutive scans, at least two.
        config: Solver controls of every registration.
        icp_config: ICP controls.
        truths: True relative transforms as returned by :py:func:`~robfit.models.synthetic.synthetic_sequence`,
            used for the error columns.
        table: Partition table for the adaptive policy.

    Returns:
        A frame with one row per registered frame (columns `ODOMETRY_COLUMNS`, errors NaN without truths) and
        the estimated relative transforms.
    """
    if len(frames) < 2:
        raise DomainError("An odometry sequence needs at least two frames.")
    if config.adaptive:
        table = table_for_config(config, table)
    estimates = []
    rows = []
    guess = RigidTransform.identity(frames[0].dim)
    for k in range(1, len(frames)):
        report, estimate = icp_pipeline(frames[k], frames[k - 1], guess, config, icp_config=icp_config, table=table)
        rotation_error, translation_error = (np.nan, np.nan) if truths is None else pose_error(estimate, truths[k])
        rows.append({'frame': k, 'alpha': report.final_alpha, 'converged': report.converged,
                     'icp_iterations': report.n_iterations, 'rotation_error_deg': rotation_error,
                     'translation_error_m': translation_error})
        logger.info(f"Frame {k}: alpha={report.final_alpha}, {report.n_iterations} ICP iterations")
        estimates.append(estimate)
        guess = estimate
    return pd.DataFrame(rows, columns=ODOMETRY_COLUMNS), estimates


def _random_registration(rng: np.random.Generator):
    cloud = synthetic_scan(n_points=40, seed=rng.integers(2 ** 31))
    problem = RegistrationProblem(cloud, cloud.transformed(RigidTransform.from_rotvec(rng.normal(0, 0.2, 3))),
                                  np.arange(len(cloud)), variant='point_to_plane')

    def random_state(generator):
        return RigidTransform.from_rotvec(generator.normal(0, 0.5, 3), generator.normal(0, 0.5, 3))

    return problem, random_state


def _random_registration_2d(rng: np.random.Generator):
    cloud = synthetic_scan(n_points=30, seed=rng.integers(2 ** 31), dim=2)
    problem = RegistrationProblem(cloud, cloud, np.arange(len(cloud)), variant='point_to_point')

    def random_state(generator):
        return RigidTransform.from_angle(generator.uniform(-np.pi, np.pi), generator.normal(0, 0.5, 2))

    return problem, random_state


tester.register_problem('registration_point_to_plane_3d', _random_registration)
tester.register_problem('registration_point_to_point_2d', _random_registration_2d)
