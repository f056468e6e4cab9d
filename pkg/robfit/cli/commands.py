"""Implementation of the `robfit` subcommands.

Every command takes the parsed arguments and the run configuration and returns the exit code. Primary outputs
are written to the output directory and are byte-identical for identical invocations; timestamps and wall
times only go to the sidecar log.
"""

#  Copyright (c) 2021 robfit
import json
import logging
import os
from typing import Dict, List

import numpy as np
import pandas as pd
from dotmap import DotMap

from ..core.adaptive import estimate_alpha
from ..core.kernel import KernelParams
from ..core.partition import PartitionTable, build_table, density_in_support, log_density, truncated_loss
from ..minimizers.config import SolverConfig
from ..minimizers.em import solve, table_for_config
from ..minimizers.report import SolveReport, to_builtin
from ..models.bundle import (BAProblem, BAState, ba_accuracy, camera_center_rms, load_scene, synthetic_scene,
                             triangulate_midpoint)
from ..models.cloud import load_point_cloud
from ..models.geometry import RigidTransform, pose_error
from ..models.line import LineFitProblem, synthetic_line
from ..models.outliers import OutlierSpec, inject_outliers
from ..models.registration import IcpConfig, icp_pipeline, odometry_sequence
from ..models.sweep import basin_sweep, perturb_poses
from ..models.synthetic import synthetic_scan, synthetic_sequence
from ..util import ztyping
from ..util.container import split_names
from ..util.exception import ConfigError, ResidualFileError, TableFormatError
from .config import solver_fields

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_VERIFICATION = 2
EXIT_SOLVER = 3

DEFAULT_SCALES = {'fit': 1., 'estimate-alpha': 1., 'curves': 1., 'icp': 0.05, 'ba': 1., 'basin-sweep': 1.}
DEFAULT_OUTLIER_MODELS = {'fit': 'uniform', 'icp': 'clustered', 'ba': 'shuffle', 'basin-sweep': 'shuffle'}


def scale(args, config: DotMap) -> float:
    if getattr(args, 'c', None) is not None:
        return float(args.c)
    if config.kernel.c is not None:
        return float(config.kernel.c)
    return DEFAULT_SCALES[args.command]


def solver_config(config: DotMap, policy: str, c: float) -> SolverConfig:
    return SolverConfig(c=c, policy=policy, alpha=config.kernel.alpha, **solver_fields(config))


def outlier_spec(args, config: DotMap, seed: int) -> OutlierSpec:
    outliers = config.outliers
    model = outliers.model if outliers.model is not None else DEFAULT_OUTLIER_MODELS[args.command]
    return OutlierSpec(fraction=outliers.fraction, model=model, low=outliers.low, high=outliers.high,
                       magnitude=outliers.magnitude, cluster_size=outliers.cluster_size, seed=seed)


def policies(args, config: DotMap) -> List[str]:
    if getattr(args, 'compare', None):
        return split_names(args.compare)
    return [config.kernel.policy]


def write_json(data: Dict, path: ztyping.PathType) -> None:
    with open(path, 'w') as file:
        file.write(json.dumps(to_builtin(data), indent=2) + '\n')


def write_csv(frame: pd.DataFrame, path: ztyping.PathType) -> None:
    frame.to_csv(path, index=False, float_format='%.17g')


def write_report(report: SolveReport, stem: str, args, config: DotMap) -> None:
    """Report JSON, trace CSV and final parameters of a solve."""
    include_timing = bool(config.output.include_timing)
    with open(os.path.join(args.output_dir, f"{stem}_report.json"), 'w') as file:
        file.write(report.to_json(include_timing=include_timing) + '\n')
    report.write_trace_csv(os.path.join(args.output_dir, f"{stem}_trace.csv"))
    write_json({'theta': report.to_dict()['theta']}, os.path.join(args.output_dir, f"{stem}_params.json"))
    if report.wall_time is not None:
        logger.info(f"{stem}: solved in {report.wall_time:.3f} s")


def _exit_code(reports: List[SolveReport]) -> int:
    failed = sorted({report.reason for report in reports if report.failed})
    if failed:
        logger.error(f"The solver failed ({', '.join(failed)}), see the reports for the last state.")
        return EXIT_SOLVER
    return EXIT_OK


def load_residuals(path: ztyping.PathType) -> np.ndarray:
    """One residual per line; empty lines and lines starting with `#` are skipped.

    Raises:
        ResidualFileError: with the line of the first value that is not a finite number, or if the file
            contains no residual.
    """
    values = []
    with open(path) as file:
        for lineno, line in enumerate(file, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            try:
                value = float(line)
            except ValueError as error:
                raise ResidualFileError(f"cannot parse {line!r} as a residual", line=lineno) from error
            if not np.isfinite(value):
                raise ResidualFileError(f"residual {line!r} is not finite", line=lineno)
            values.append(value)
    if not values:
        raise ResidualFileError(f"{path} contains no residuals")
    return np.array(values)


def _partition_table(args, config: DotMap, c: float) -> PartitionTable:
    table_path = getattr(args, 'table', None)
    solver = solver_config(config, 'adaptive', c)
    if table_path:
        return table_for_config(solver, PartitionTable.load(table_path))
    return table_for_config(solver)


def cmd_partition_table(args, config: DotMap) -> int:
    path = args.path or os.path.join(args.output_dir, 'partition_table.txt')
    solver = config.solver
    if not args.verify:
        table = build_table(alpha_min=solver.alpha_min, alpha_max=solver.alpha_max, resolution=solver.resolution,
                            tau=solver.tau_factor, intervals=args.intervals)
        table.save(path)
        print(f"Wrote {len(table)} partition values to {path}")
        return EXIT_OK
    try:
        table = PartitionTable.load(path)
    except TableFormatError as error:
        logger.error(f"Verification of {path} failed: {error}")
        return EXIT_VERIFICATION
    if not table.matches(solver.alpha_min, solver.alpha_max, solver.resolution, solver.tau_factor):
        logger.error(f"{table} does not have the configured grid.")
        return EXIT_VERIFICATION
    deviation = table.verify()
    passed = deviation < args.tolerance
    print(f"Max deviation with halved quadrature step: {deviation:.3e} ({'ok' if passed else 'FAILED'})")
    return EXIT_OK if passed else EXIT_VERIFICATION


def cmd_estimate_alpha(args, config: DotMap) -> int:
    c = scale(args, config)
    residuals = load_residuals(args.residuals)
    table = _partition_table(args, config, c)
    estimate = estimate_alpha(residuals, c=c, table=table, subsample_cap=config.solver.subsample_cap,
                              subsample_seed=config.solver.subsample_seed)
    if args.output:
        write_json(estimate.to_dict(), args.output)
    else:
        print(json.dumps(to_builtin(estimate.to_dict()), indent=2))
    return EXIT_OK


def cmd_fit(args, config: DotMap) -> int:
    c = scale(args, config)
    problem_config = config.problem
    truth = None
    if problem_config.input:
        points = load_point_cloud(problem_config.input).points
    else:
        points = synthetic_line(problem_config.n_points, slope=problem_config.slope,
                                intercept=problem_config.intercept, sigma=problem_config.noise, seed=args.seed)
        y, _ = inject_outliers(points[:, 1], outlier_spec(args, config, seed=args.seed))
        points = np.stack([points[:, 0], y], axis=-1)
        truth = np.array([problem_config.slope, problem_config.intercept])
    problem = LineFitProblem(points)
    reports = []
    rows = []
    for policy in policies(args, config):
        report = solve(problem, np.zeros(2), solver_config(config, policy, c))
        write_report(report, f"fit_{policy}", args, config)
        error = np.nan if truth is None else float(np.linalg.norm(report.theta - truth))
        rows.append({'policy': policy, 'converged': report.converged, 'final_alpha': report.final_alpha,
                     'iterations': report.n_iterations, 'slope': report.theta[0], 'intercept': report.theta[1],
                     'parameter_error': error})
        reports.append(report)
    _write_comparison(args, 'fit', rows)
    return _exit_code(reports)


def _write_comparison(args, command: str, rows: List[Dict]) -> None:
    frame = pd.DataFrame(rows)
    if getattr(args, 'compare', None):
        write_csv(frame, os.path.join(args.output_dir, f"{command}_compare.csv"))
    print(frame.to_string(index=False))


def _icp_truth(icp: DotMap) -> RigidTransform:
    return RigidTransform.from_rotvec([0., 0., np.radians(icp.yaw_deg)], icp.translation)


def cmd_icp(args, config: DotMap) -> int:
    c = scale(args, config)
    icp = config.icp
    icp_config = IcpConfig(variant=icp.variant, max_icp_iterations=icp.max_icp_iterations,
                           rotation_tol=icp.rotation_tol, translation_tol=icp.translation_tol,
                           alpha_cadence=icp.alpha_cadence)
    spec = outlier_spec(args, config, seed=args.seed)
    if args.frames:
        return _icp_frames(args, config, c, icp_config, spec)
    truth = None
    if config.problem.input:
        if not icp.target:
            raise ConfigError("icp with an input cloud needs icp.target in the configuration")
        source = load_point_cloud(config.problem.input)
        target = load_point_cloud(icp.target)
    else:
        truth = _icp_truth(icp)
        target = synthetic_scan(n_points=icp.n_points, seed=args.seed, noise=icp.noise)
        source = target.transformed(truth.inverse())
        points, _ = inject_outliers(source.points, spec)
        source = source.with_points(points)
    init = RigidTransform.identity(source.dim)
    reports = []
    rows = []
    for policy in policies(args, config):
        report, estimate = icp_pipeline(source, target, init, solver_config(config, policy, c),
                                        icp_config=icp_config)
        write_report(report, f"icp_{policy}", args, config)
        rotation_error, translation_error = (np.nan, np.nan) if truth is None else pose_error(estimate, truth)
        rows.append({'policy': policy, 'converged': report.converged, 'final_alpha': report.final_alpha,
                     'iterations': report.n_iterations, 'rotation_error_deg': rotation_error,
                     'translation_error_m': translation_error})
        reports.append(report)
    _write_comparison(args, 'icp', rows)
    return _exit_code(reports)


def _icp_frames(args, config: DotMap, c: float, icp_config: IcpConfig, spec: OutlierSpec) -> int:
    icp = config.icp
    moving_frames = range(1, args.frames, 2) if spec.fraction > 0 else ()
    frames, truths = synthetic_sequence(n_frames=args.frames, n_points=icp.n_points, motion=_icp_truth(icp),
                                        noise=icp.noise, moving_frames=moving_frames, outlier_spec=spec,
                                        seed=args.seed)
    rows = []
    for policy in policies(args, config):
        sequence, _ = odometry_sequence(frames, solver_config(config, policy, c), icp_config=icp_config,
                                        truths=truths)
        write_csv(sequence, os.path.join(args.output_dir, f"icp_{policy}_frames.csv"))
        rows.append({'policy': policy, 'median_alpha': float(sequence['alpha'].median()),
                     'mean_rotation_error_deg': float(sequence['rotation_error_deg'].mean()),
                     'mean_translation_error_m': float(sequence['translation_error_m'].mean())})
    _write_comparison(args, 'icp_frames', rows)
    return EXIT_OK


def _ba_scene(args, config: DotMap):
    """The scene to solve, the true scene (None for a loaded scene) and the initial state."""
    if config.problem.input:
        scene = load_scene(config.problem.input)
        return scene, None, BAState(scene.poses, scene.landmarks)
    ba = config.ba
    truth = synthetic_scene(n_cameras=ba.n_cameras, n_landmarks=ba.n_landmarks, seed=args.seed,
                            pixel_noise=ba.pixel_noise)
    pixels, _ = inject_outliers(truth.pixels, outlier_spec(args, config, seed=args.seed))
    scene = truth.copy_with(pixels=pixels)
    rng = np.random.default_rng(args.seed)
    poses = perturb_poses(scene, ba.init_sigma, rng)
    return scene, truth, BAState(poses, triangulate_midpoint(scene, poses))


def cmd_ba(args, config: DotMap) -> int:
    c = scale(args, config)
    scene, truth, state = _ba_scene(args, config)
    problem = BAProblem(scene)
    reference = scene if truth is None else truth
    reports = []
    rows = []
    for policy in policies(args, config):
        report = solve(problem, state, solver_config(config, policy, c))
        write_report(report, f"ba_{policy}", args, config)
        write_csv(ba_accuracy(reference, report.theta), os.path.join(args.output_dir, f"ba_{policy}_accuracy.csv"))
        rows.append({'policy': policy, 'converged': report.converged, 'final_alpha': report.final_alpha,
                     'iterations': report.n_iterations,
                     'rms_error': camera_center_rms(report.theta.poses, reference.poses)})
        reports.append(report)
    _write_comparison(args, 'ba', rows)
    return _exit_code(reports)


def cmd_basin_sweep(args, config: DotMap) -> int:
    c = scale(args, config)
    sweep = config.sweep
    if config.problem.input:
        scene = load_scene(config.problem.input)
    else:
        ba = config.ba
        scene = synthetic_scene(n_cameras=ba.n_cameras, n_landmarks=ba.n_landmarks, seed=args.seed,
                                pixel_noise=ba.pixel_noise)
        pixels, _ = inject_outliers(scene.pixels, outlier_spec(args, config, seed=args.seed))
        scene = scene.copy_with(pixels=pixels)
    sigmas = [float(sigma) for sigma in split_names(args.sigmas)] if args.sigmas else sweep.sigmas
    sweep_policies = split_names(args.policies) if args.policies else list(sweep.policies)
    samples = args.samples if args.samples is not None else sweep.samples
    records, summary = basin_sweep(scene, sigmas=sigmas, samples=samples, policies=sweep_policies,
                                   seed=args.seed, config=solver_config(config, 'adaptive', c),
                                   rotation_sigma=sweep.rotation_sigma,
                                   success_threshold=sweep.success_threshold)
    write_csv(records, os.path.join(args.output_dir, 'sweep_records.csv'))
    write_csv(summary, os.path.join(args.output_dir, 'sweep_summary.csv'))
    print(summary.to_string(index=False))
    return EXIT_OK


CURVE_COLUMNS = ['alpha', 'r', 'rho', 'weight', 'density', 'truncated_loss', 'in_support']


def cmd_curves(args, config: DotMap) -> int:
    c = scale(args, config)
    table = _partition_table(args, config, c)
    r = np.linspace(-args.r_max * c, args.r_max * c, args.points)
    frames = []
    for alpha in split_names(args.alphas):
        alpha = float(alpha)
        grid_alpha = table.quantize(alpha)
        if grid_alpha != alpha:
            logger.warning(f"alpha={alpha} is not on the table grid, using {grid_alpha}.")
        params = KernelParams(alpha=grid_alpha, c=c)
        frames.append(pd.DataFrame({'alpha': grid_alpha, 'r': r, 'rho': params.rho(r), 'weight': params.weight(r),
                                    'density': np.exp(log_density(r, params, table)),
                                    'truncated_loss': truncated_loss(r, params, table),
                                    'in_support': density_in_support(r, c, table)}, columns=CURVE_COLUMNS))
    write_csv(pd.concat(frames, ignore_index=True), os.path.join(args.output_dir, 'curves.csv'))
    return EXIT_OK


COMMANDS = {
    'partition-table': cmd_partition_table,
    'estimate-alpha': cmd_estimate_alpha,
    'fit': cmd_fit,
    'icp': cmd_icp,
    'ba': cmd_ba,
    'basin-sweep': cmd_basin_sweep,
    'curves': cmd_curves,
}


def run_command(args, config: DotMap) -> int:
    return COMMANDS[args.command](args, config)


def seed_from(args, config: DotMap) -> int:
    return int(args.seed if args.seed is not None else config.problem.seed)


def output_directory(args, config: DotMap) -> str:
    return args.output_dir if args.output_dir else config.output.directory
