"""Bundle adjustment of pinhole cameras and 3-D landmarks from pixel observations."""

#  Copyright (c) 2021 robfit
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import scipy.sparse

from .. import settings
from ..core.problem import BaseProblem
from ..core.testing import tester
from ..util import ztyping
from ..util.exception import DomainError, SceneFormatError
from .geometry import RigidTransform, pose_error, skew

logger = logging.getLogger(__name__)

SECTIONS = ('CAMERAS', 'POSES', 'LANDMARKS', 'OBSERVATIONS')


class BAScene:

    def __init__(self, fx: float, fy: float, cx: float, cy: float, poses: Sequence[RigidTransform],
                 landmarks: ztyping.PointsInput, cam_idx: np.ndarray, lm_idx: np.ndarray, pixels: np.ndarray):
        """Cameras sharing one set of intrinsics, world-to-camera poses, landmarks and their pixel observations.

        Args:
            fx: Focal length along u, in pixels.
            fy: Focal length along v, in pixels.
            cx: Principal point u, in pixels.
            cy: Principal point v, in pixels.
            poses: World-to-camera transforms, one per camera, at least two.
            landmarks: Points in meters, shape (n_landmarks, 3).
            cam_idx: Camera of every observation.
            lm_idx: Landmark of every observation.
            pixels: Measured pixel of every observation, shape (n_observations, 2).

        Raises:
            DomainError: if an index is out of range, a landmark is seen by fewer than two cameras or a pixel
                is not finite.
        """
        self.fx, self.fy, self.cx, self.cy = (float(value) for value in (fx, fy, cx, cy))
        if not (self.fx > 0 and self.fy > 0):
            raise DomainError(f"Focal lengths have to be positive, not {self.fx}, {self.fy}.")
        self.poses = tuple(poses)
        if len(self.poses) < 2:
            raise DomainError("A scene needs at least two cameras.")
        if any(pose.dim != 3 for pose in self.poses):
            raise DomainError("Camera poses have to be spatial transforms.")
        landmarks = np.array(landmarks, dtype=np.float64)
        if landmarks.ndim != 2 or landmarks.shape[1] != 3:
            raise DomainError(f"Landmarks have to be of shape (n, 3), not {landmarks.shape}.")
        cam_idx = np.array(cam_idx, dtype=np.int64).ravel()
        lm_idx = np.array(lm_idx, dtype=np.int64).ravel()
        pixels = np.array(pixels, dtype=np.float64).reshape(-1, 2)
        if not cam_idx.size == lm_idx.size == pixels.shape[0]:
            raise DomainError("Observation arrays have different lengths.")
        if np.any(cam_idx < 0) or np.any(cam_idx >= len(self.poses)):
            raise DomainError("Observation references a camera that does not exist.")
        if np.any(lm_idx < 0) or np.any(lm_idx >= landmarks.shape[0]):
            raise DomainError("Observation references a landmark that does not exist.")
        if not np.all(np.isfinite(pixels)):
            raise DomainError("Observed pixels have to be finite.")
        cameras_per_landmark = np.array([np.unique(cam_idx[lm_idx == i]).size for i in range(landmarks.shape[0])])
        if np.any(cameras_per_landmark < 2):
            raise DomainError(f"Landmarks {np.flatnonzero(cameras_per_landmark < 2).tolist()} are observed by "
                              f"fewer than two cameras.")
        for array in (landmarks, cam_idx, lm_idx, pixels):
            array.flags.writeable = False
        self.landmarks = landmarks
        self.cam_idx = cam_idx
        self.lm_idx = lm_idx
        self.pixels = pixels

    @property
    def n_cameras(self) -> int:
        return len(self.poses)

    @property
    def n_landmarks(self) -> int:
        return self.landmarks.shape[0]

    @property
    def n_observations(self) -> int:
        return self.cam_idx.size

    @property
    def intrinsics(self) -> np.ndarray:
        return np.array([[self.fx, 0., self.cx], [0., self.fy, self.cy], [0., 0., 1.]])

    def copy_with(self, poses: Optional[Sequence[RigidTransform]] = None,
                  landmarks: Optional[ztyping.PointsInput] = None, pixels: Optional[np.ndarray] = None) -> "BAScene":
        return type(self)(self.fx, self.fy, self.cx, self.cy,
                          poses=self.poses if poses is None else poses,
                          landmarks=self.landmarks if landmarks is None else landmarks,
                          cam_idx=self.cam_idx, lm_idx=self.lm_idx,
                          pixels=self.pixels if pixels is None else pixels)

    def __repr__(self) -> str:
        return (f"<BAScene cameras={self.n_cameras} landmarks={self.n_landmarks} "
                f"observations={self.n_observations}>")


class BAState:

    def __init__(self, poses: Sequence[RigidTransform], landmarks: ztyping.PointsInput):
        """Parameter state of a bundle adjustment: all camera poses and landmarks."""
        landmarks = np.array(landmarks, dtype=np.float64)
        landmarks.flags.writeable = False
        self.poses = tuple(poses)
        self.landmarks = landmarks

    def to_dict(self) -> Dict:
        return {'poses': [pose.to_dict() for pose in self.poses], 'landmarks': self.landmarks.tolist()}

    def __repr__(self) -> str:
        return f"<BAState cameras={len(self.poses)} landmarks={self.landmarks.shape[0]}>"


def initial_state(scene: BAScene) -> BAState:
    return BAState(scene.poses, scene.landmarks)


def project(scene: BAScene, poses: Sequence[RigidTransform], landmarks: np.ndarray):
    """Camera frame points, clamped depths and pixels of all observations."""
    rotations = np.stack([pose.rotation for pose in poses])[scene.cam_idx]
    translations = np.stack([pose.translation for pose in poses])[scene.cam_idx]
    camera_points = np.einsum('nij,nj->ni', rotations, landmarks[scene.lm_idx]) + translations
    depth = np.maximum(camera_points[:, 2], settings.options.min_depth)
    pixels = np.stack([scene.fx * camera_points[:, 0] / depth + scene.cx,
                       scene.fy * camera_points[:, 1] / depth + scene.cy], axis=-1)
    return camera_points, depth, pixels


class BAProblem(BaseProblem):

    def __init__(self, scene: BAScene, frozen_axis: Optional[int] = None, name: Optional[str] = None):
        """Reprojection residuals pi(K, T_cam, X) - z of all observations, one 2-D block each.

        The gauge is fixed by freezing camera 0 and one translation coordinate of camera 1, by default the one
        of largest magnitude in `scene`. The tangent holds `[v, omega]` of cameras 1..n-1 (camera 1 without
        the frozen coordinate) followed by the landmark increments.

        Observations whose landmark is not in front of the camera are invalid for the evaluation; their
        residual uses the clamped depth.
        """
        super().__init__(name=name)
        self.scene = scene
        if frozen_axis is None:
            frozen_axis = int(np.argmax(np.abs(scene.poses[1].translation)))
        if frozen_axis not in (0, 1, 2):
            raise DomainError(f"The frozen axis has to be 0, 1 or 2, not {frozen_axis}.")
        self.frozen_axis = frozen_axis
        camera_columns = -np.ones((scene.n_cameras, 6), dtype=np.int64)
        n_free = 0
        for camera in range(1, scene.n_cameras):
            for component in range(6):
                if camera == 1 and component == frozen_axis:
                    continue
                camera_columns[camera, component] = n_free
                n_free += 1
        self.camera_columns = camera_columns
        self.n_camera_params = n_free
        self._dim = n_free + 3 * scene.n_landmarks
        self._n_blocks = scene.n_observations
        self._block_dim = 2

    def _residuals(self, theta: BAState):
        _, _, pixels = project(self.scene, theta.poses, theta.landmarks)
        return pixels - self.scene.pixels

    def valid_mask(self, theta: BAState) -> np.ndarray:
        camera_points, _, _ = project(self.scene, theta.poses, theta.landmarks)
        return camera_points[:, 2] > settings.options.min_depth

    def _jacobian_blocks(self, theta: BAState):
        scene = self.scene
        camera_points, depth, _ = project(scene, theta.poses, theta.landmarks)
        x, y = camera_points[:, 0], camera_points[:, 1]
        zeros = np.zeros_like(depth)
        d_projection = np.stack([np.stack([scene.fx / depth, zeros, -scene.fx * x / depth ** 2], axis=-1),
                                 np.stack([zeros, scene.fy / depth, -scene.fy * y / depth ** 2], axis=-1)],
                                axis=-2)
        rotations = np.stack([pose.rotation for pose in theta.poses])[scene.cam_idx]
        rotated = camera_points - np.stack([pose.translation for pose in theta.poses])[scene.cam_idx]
        d_pose = np.concatenate([d_projection, -d_projection @ skew(rotated)], axis=-1)
        d_landmark = d_projection @ rotations
        return d_pose, d_landmark

    def jacobian_matrix(self, theta: BAState) -> scipy.sparse.csr_matrix:
        """Sparse stacked Jacobian, every row touches one camera and one landmark."""
        scene = self.scene
        d_pose, d_landmark = self._jacobian_blocks(theta)
        rows = np.arange(2 * scene.n_observations).reshape(-1, 2)
        pose_cols = self.camera_columns[scene.cam_idx]
        pose_rows = np.broadcast_to(rows[:, :, None], d_pose.shape)
        pose_cols = np.broadcast_to(pose_cols[:, None, :], d_pose.shape)
        free = pose_cols >= 0
        landmark_cols = self.n_camera_params + 3 * scene.lm_idx[:, None] + np.arange(3)
        landmark_rows = np.broadcast_to(rows[:, :, None], d_landmark.shape)
        landmark_cols = np.broadcast_to(landmark_cols[:, None, :], d_landmark.shape)
        data = np.concatenate([d_pose[free], d_landmark.ravel()])
        row_index = np.concatenate([pose_rows[free], landmark_rows.ravel()])
        col_index = np.concatenate([pose_cols[free], landmark_cols.ravel()])
        return scipy.sparse.csr_matrix((data, (row_index, col_index)), shape=(2 * scene.n_observations, self.dim))

    def _jacobians(self, theta: BAState):
        return self.jacobian_matrix(theta).toarray()

    def plus(self, theta: BAState, delta: ztyping.DeltaType) -> BAState:
        delta = np.asarray(delta, dtype=np.float64)
        camera_delta = np.where(self.camera_columns >= 0, delta[np.maximum(self.camera_columns, 0)], 0.)
        poses = [theta.poses[0]] + [pose.plus(camera_delta[camera])
                                    for camera, pose in enumerate(theta.poses) if camera > 0]
        landmarks = theta.landmarks + delta[self.n_camera_params:].reshape(-1, 3)
        return BAState(poses, landmarks)


def ba_problem(scene: BAScene, frozen_axis: Optional[int] = None) -> BAProblem:
    return BAProblem(scene, frozen_axis=frozen_axis)


def look_at(center: np.ndarray, target: ztyping.PointsInput = (0., 0., 0.)) -> RigidTransform:
    """World-to-camera pose of a camera at `center` looking at `target`, image v pointing along -y."""
    center = np.asarray(center, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - center
    forward /= np.linalg.norm(forward)
    down = np.array([0., -1., 0.])
    down = down - forward * (down @ forward)
    down /= np.linalg.norm(down)
    rotation = np.stack([np.cross(down, forward), down, forward])
    return RigidTransform(rotation, -rotation @ center)


def synthetic_scene(n_cameras: int = 8, n_landmarks: int = 150, seed: ztyping.SeedType = None,
                    radius: float = 10., focal: float = 500., cx: float = 320., cy: float = 240.,
                    pixel_noise: float = 0., arc: float = np.radians(60.), extent: float = 2.) -> BAScene:
    """Cameras on a horizontal arc around the origin, all looking at landmarks in a cube of half size `extent`.

    Every camera observes every landmark; `pixel_noise` is the standard deviation of the pixel measurements.
    """
    rng = np.random.default_rng(seed)
    angles = np.linspace(-arc / 2, arc / 2, n_cameras)
    poses = [look_at(radius * np.array([np.sin(angle), 0., -np.cos(angle)])) for angle in angles]
    landmarks = rng.uniform(-extent, extent, size=(n_landmarks, 3))
    cam_idx = np.repeat(np.arange(n_cameras), n_landmarks)
    lm_idx = np.tile(np.arange(n_landmarks), n_cameras)
    scene = BAScene(focal, focal, cx, cy, poses, landmarks, cam_idx, lm_idx, np.zeros((cam_idx.size, 2)))
    _, _, pixels = project(scene, poses, landmarks)
    if pixel_noise > 0:
        pixels = pixels + pixel_noise * rng.standard_normal(pixels.shape)
    return scene.copy_with(pixels=pixels)


def triangulate_midpoint(scene: BAScene, poses: Sequence[RigidTransform],
                         landmarks: Optional[ztyping.PointsInput] = None) -> np.ndarray:
    """Forward intersection of every landmark from the two observing cameras nearest to its current estimate.

    The landmark is the midpoint of the shortest segment between the two viewing rays; a landmark whose rays
    are parallel keeps its current estimate.
    """
    landmarks = np.array(scene.landmarks if landmarks is None else landmarks, dtype=np.float64)
    centers = np.stack([pose.center() for pose in poses])
    inverse_intrinsics = np.linalg.inv(scene.intrinsics)
    result = landmarks.copy()
    for landmark in range(scene.n_landmarks):
        observations = np.flatnonzero(scene.lm_idx == landmark)
        cameras, first = np.unique(scene.cam_idx[observations], return_index=True)
        distances = np.linalg.norm(centers[cameras] - landmarks[landmark], axis=1)
        nearest = np.argsort(distances, kind='stable')[:2]
        rays = []
        for idx in nearest:
            camera = cameras[idx]
            pixel = scene.pixels[observations[first[idx]]]
            direction = poses[camera].rotation.T @ (inverse_intrinsics @ np.array([pixel[0], pixel[1], 1.]))
            rays.append((centers[camera], direction / np.linalg.norm(direction)))
        (origin1, dir1), (origin2, dir2) = rays
        offset = origin1 - origin2
        cosine = dir1 @ dir2
        denominator = 1. - cosine ** 2
        if denominator < 1e-12:
            continue
        s = (cosine * (dir2 @ offset) - dir1 @ offset) / denominator
        t = ((dir2 @ offset) - cosine * (dir1 @ offset)) / denominator
        result[landmark] = 0.5 * (origin1 + s * dir1 + origin2 + t * dir2)
    return result


def camera_center_rms(estimate: Sequence[RigidTransform], truth: Sequence[RigidTransform]) -> float:
    """Root mean square distance between estimated and true camera centers, in meters."""
    errors = [np.linalg.norm(est.center() - true.center()) for est, true in zip(estimate, truth)]
    return float(np.sqrt(np.mean(np.square(errors))))


BA_ACCURACY_COLUMNS = ['camera', 'rotation_error_deg', 'translation_error_m', 'center_error_m']


def ba_accuracy(scene: BAScene, estimate: BAState) -> pd.DataFrame:
    """Per camera rotation, translation and center errors of `estimate` against the poses of `scene`."""
    rows = []
    for camera, (est, true) in enumerate(zip(estimate.poses, scene.poses)):
        rotation_error, translation_error = pose_error(est, true)
        rows.append({'camera': camera, 'rotation_error_deg': rotation_error,
                     'translation_error_m': translation_error,
                     'center_error_m': float(np.linalg.norm(est.center() - true.center()))})
    return pd.DataFrame(rows, columns=BA_ACCURACY_COLUMNS)


def save_scene(scene: BAScene, path: ztyping.PathType) -> None:
    lines = ['CAMERAS', f"{scene.fx!r} {scene.fy!r} {scene.cx!r} {scene.cy!r}", 'POSES']
    for pose in scene.poses:
        lines.append(' '.join(repr(float(value)) for value in (*pose.quaternion(), *pose.translation)))
    lines.append('LANDMARKS')
    lines.extend(' '.join(repr(float(value)) for value in point) for point in scene.landmarks)
    lines.append('OBSERVATIONS')
    lines.extend(f"{cam} {lm} {pixel[0]!r} {pixel[1]!r}"
                 for cam, lm, pixel in zip(scene.cam_idx, scene.lm_idx, scene.pixels.tolist()))
    with open(path, 'w') as file:
        file.write('\n'.join(lines) + '\n')


def _parse_row(line: str, lineno: int, n_values: int) -> List[float]:
    parts = line.split()
    if len(parts) != n_values:
        raise SceneFormatError(f"line {lineno}: expected {n_values} values, got {len(parts)}")
    try:
        return [float(value) for value in parts]
    except ValueError as error:
        raise SceneFormatError(f"line {lineno}: cannot parse {line!r}") from error


def load_scene(path: ztyping.PathType) -> BAScene:
    """Read a scene with the sections CAMERAS (fx fy cx cy), POSES (qw qx qy qz tx ty tz per camera),
    LANDMARKS (x y z) and OBSERVATIONS (cam_idx lm_idx u v).

    Raises:
        SceneFormatError: with the line number of the first malformed line, or if the scene is invalid.
    """
    content = {section: [] for section in SECTIONS}
    n_values = {'CAMERAS': 4, 'POSES': 7, 'LANDMARKS': 3, 'OBSERVATIONS': 4}
    section = None
    with open(path) as file:
        for lineno, line in enumerate(file, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            if line in SECTIONS:
                section = line
                continue
            if section is None:
                raise SceneFormatError(f"line {lineno}: data before the first section header")
            content[section].append(_parse_row(line, lineno, n_values[section]))
    if len(content['CAMERAS']) != 1:
        raise SceneFormatError(f"{path}: expected exactly one CAMERAS line, got {len(content['CAMERAS'])}")
    observations = np.array(content['OBSERVATIONS'], dtype=np.float64).reshape(-1, 4)
    if np.any(observations[:, :2] != np.round(observations[:, :2])):
        raise SceneFormatError(f"{path}: observation indices have to be integers")
    try:
        poses = [RigidTransform.from_quaternion(row[:4], row[4:]) for row in content['POSES']]
        return BAScene(*content['CAMERAS'][0], poses=poses, landmarks=np.reshape(content['LANDMARKS'], (-1, 3)),
                       cam_idx=observations[:, 0].astype(np.int64), lm_idx=observations[:, 1].astype(np.int64),
                       pixels=observations[:, 2:])
    except DomainError as error:
        raise SceneFormatError(f"{path}: {error}") from error


def _random_ba(rng: np.random.Generator):
    scene = synthetic_scene(n_cameras=3, n_landmarks=4, seed=rng.integers(2 ** 31), pixel_noise=1.)
    problem = BAProblem(scene)

    def random_state(generator):
        poses = [pose.plus(np.concatenate([generator.normal(0, 0.2, 3), generator.normal(0, 0.05, 3)]))
                 for pose in scene.poses]
        return BAState(poses, scene.landmarks + generator.normal(0, 0.2, scene.landmarks.shape))

    return problem, random_state


tester.register_problem('bundle_adjustment', _random_ba)
