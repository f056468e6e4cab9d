"""Synthetic desk-scale scans made of planar patches with exact normals."""

#  Copyright (c) 2021 robfit
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..util import ztyping
from ..util.exception import DomainError
from .cloud import PointCloud
from .geometry import RigidTransform
from .outliers import OutlierSpec, inject_outliers


def _split(n_points: int, n_parts: int) -> List[int]:
    sizes = [n_points // n_parts] * n_parts
    for i in range(n_points % n_parts):
        sizes[i] += 1
    return sizes


def _planar_patch(rng, n, origin, axis_u, axis_w, extent_u, extent_w):
    axis_u = np.asarray(axis_u, dtype=np.float64)
    axis_w = np.asarray(axis_w, dtype=np.float64)
    a = rng.uniform(*extent_u, size=n)
    b = rng.uniform(*extent_w, size=n)
    normal = np.cross(axis_u, axis_w)
    normal /= np.linalg.norm(normal)
    points = np.asarray(origin, dtype=np.float64) + a[:, None] * axis_u + b[:, None] * axis_w
    return points, np.tile(normal, (n, 1))


def synthetic_scan(n_points: int = 500, seed: ztyping.SeedType = None, noise: float = 0., dim: int = 3,
                   extent: float = 1.) -> PointCloud:
    """A corner of a room with a slanted board: enough planar structure to constrain every degree of freedom.

    Args:
        n_points: Number of points, split evenly over the patches.
        seed: Seed of the sampling.
        noise: Standard deviation of the displacement of every point along its normal, in meters.
        dim: 3 for a spatial scan, 2 for a planar one made of line segments.
        extent: Half size of the scene in meters.
    """
    rng = np.random.default_rng(seed)
    e = float(extent)
    if dim == 3:
        diagonal = np.array([1., -1., 0.]) / np.sqrt(2.)
        slanted = np.array([1., 1., 1.]) / np.sqrt(3.)
        patches = [
            ((0., 0., 0.), (1., 0., 0.), (0., 1., 0.), (-e, e), (-e, e)),  # floor
            ((-e, 0., 0.), (0., 1., 0.), (0., 0., 1.), (-e, e), (0., e)),  # wall
            ((0., -e, 0.), (0., 0., 1.), (1., 0., 0.), (0., e), (-e, e)),  # wall
            ((0.3 * e, 0.3 * e, 0.4 * e), diagonal, np.cross(slanted, diagonal), (-0.5 * e, 0.5 * e),
             (-0.3 * e, 0.3 * e)),  # board
        ]
    elif dim == 2:
        patches = [
            ((0., -e), (1., 0.), None, (-e, e), None),
            ((-e, 0.), (0., 1.), None, (-e, e), None),
            ((0.4 * e, 0.4 * e), (1. / np.sqrt(2.), -1. / np.sqrt(2.)), None, (-0.5 * e, 0.5 * e), None),
        ]
    else:
        raise DomainError(f"Scans are 2-D or 3-D, not {dim}-D.")
    points = []
    normals = []
    for size, (origin, axis_u, axis_w, extent_u, extent_w) in zip(_split(n_points, len(patches)), patches):
        if dim == 3:
            patch_points, patch_normals = _planar_patch(rng, size, origin, axis_u, axis_w, extent_u, extent_w)
        else:
            axis_u = np.asarray(axis_u)
            patch_points = np.asarray(origin) + rng.uniform(*extent_u, size=size)[:, None] * axis_u
            patch_normals = np.tile([-axis_u[1], axis_u[0]], (size, 1))
        points.append(patch_points)
        normals.append(patch_normals)
    points = np.concatenate(points)
    normals = np.concatenate(normals)
    if noise > 0:
        points = points + noise * rng.standard_normal(points.shape[0])[:, None] * normals
    return PointCloud(points, normals)


def synthetic_sequence(n_frames: int = 5, n_points: int = 500, motion: Optional[RigidTransform] = None,
                       noise: float = 0., moving_frames: Sequence[int] = (), outlier_spec: Optional[OutlierSpec] = None,
                       seed: ztyping.SeedType = None) -> Tuple[List[PointCloud], List[RigidTransform]]:
    """Scans of a static scene taken by a sensor moving with a constant `motion` per frame.

    Args:
        n_frames: Number of scans.
        n_points: Points per scan.
        motion: Sensor motion between consecutive frames. Defaults to 2 degrees of yaw and 5 cm forward.
        noise: Measurement noise along the normals, drawn independently for every frame.
        moving_frames: Frames in which a part of the scene moved, contaminated with `outlier_spec`.
        outlier_spec: Contamination of the moving frames. Defaults to 30% clustered offsets of 0.3 m.
        seed: Master seed.

    Returns:
        The scans in sensor coordinates and, for every frame k >= 1, the true transform mapping frame k into
        frame k - 1 (the first entry is the identity).
    """
    if motion is None:
        motion = RigidTransform.from_rotvec([0., 0., np.radians(2.)], [0.05, 0., 0.])
    if outlier_spec is None:
        outlier_spec = OutlierSpec(fraction=0.3, model='clustered', magnitude=0.3, cluster_size=50)
    seeds = np.random.SeedSequence(seed).spawn(n_frames + 1)
    scene = synthetic_scan(n_points=n_points, seed=seeds[0], dim=motion.dim)
    frames = []
    truths = [RigidTransform.identity(motion.dim)]
    pose = RigidTransform.identity(motion.dim)
    for k in range(n_frames):
        if k > 0:
            pose = pose @ motion
            truths.append(motion)
        rng = np.random.default_rng(seeds[k + 1])
        frame = scene.transformed(pose.inverse())
        points = frame.points
        if noise > 0:
            points = points + noise * rng.standard_normal(points.shape[0])[:, None] * frame.normals
        if k in moving_frames:
            points, _ = inject_outliers(points, outlier_spec, rng=rng)
        frames.append(frame.with_points(points))
    return frames, truths
