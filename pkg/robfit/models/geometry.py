"""Rigid transforms in 2-D and 3-D with the left tangent update used by the registration and BA problems.

Tangent increments are ordered translation first, rotation second: `[v, omega]`, with
``plus(T, [v, omega]) = (Exp(omega) R, t + v)``. This is a retraction on SE(3) built from the SO(3)
exponential map, not the SE(3) exponential: the translation is not coupled to the rotation increment. The
Jacobians of the registration and bundle adjustment problems are taken with respect to this update.
"""

#  Copyright (c) 2021 robfit
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from ..util import ztyping
from ..util.exception import DomainError


def skew(vector: np.ndarray) -> np.ndarray:
    """Skew symmetric matrices of one or many 3-vectors, shape (..., 3, 3)."""
    vector = np.asarray(vector, dtype=np.float64)
    zeros = np.zeros(vector.shape[:-1])
    x, y, z = vector[..., 0], vector[..., 1], vector[..., 2]
    return np.stack([np.stack([zeros, -z, y], axis=-1),
                     np.stack([z, zeros, -x], axis=-1),
                     np.stack([-y, x, zeros], axis=-1)], axis=-2)


def perp(vector: np.ndarray) -> np.ndarray:
    """The 2-D vectors rotated by 90 degrees, the derivative of a planar rotation."""
    vector = np.asarray(vector, dtype=np.float64)
    return np.stack([-vector[..., 1], vector[..., 0]], axis=-1)


def rotation_2d(angle: float) -> np.ndarray:
    cos, sin = np.cos(angle), np.sin(angle)
    return np.array([[cos, -sin], [sin, cos]])


class RigidTransform:

    def __init__(self, rotation: np.ndarray, translation: Optional[np.ndarray] = None):
        """Rotation matrix and translation, acting on points as `R p + t`.

        Args:
            rotation: Orthonormal matrix with determinant 1, 2x2 or 3x3.
            translation: Translation vector in meters. Defaults to zero.

        Raises:
            DomainError: if the rotation is not a proper rotation within 1e-9.
        """
        rotation = np.array(rotation, dtype=np.float64)
        dim = rotation.shape[0]
        if rotation.shape not in ((2, 2), (3, 3)):
            raise DomainError(f"Rotation has to be 2x2 or 3x3, not {rotation.shape}.")
        if translation is None:
            translation = np.zeros(dim)
        translation = np.array(translation, dtype=np.float64).reshape(-1)
        if translation.shape != (dim,):
            raise DomainError(f"Translation has to have {dim} entries, not {translation.shape}.")
        if not (np.allclose(rotation @ rotation.T, np.eye(dim), atol=1e-9, rtol=0)
                and np.linalg.det(rotation) > 0):
            raise DomainError(f"Not a rotation matrix: {rotation}")
        rotation.flags.writeable = False
        translation.flags.writeable = False
        self._rotation = rotation
        self._translation = translation

    @classmethod
    def identity(cls, dim: int = 3) -> "RigidTransform":
        return cls(np.eye(dim), np.zeros(dim))

    @classmethod
    def from_angle(cls, angle: float, translation: Optional[np.ndarray] = None) -> "RigidTransform":
        """Planar transform from the rotation angle in radians."""
        return cls(rotation_2d(angle), translation)

    @classmethod
    def from_quaternion(cls, quaternion: np.ndarray, translation: Optional[np.ndarray] = None) -> "RigidTransform":
        """Spatial transform from a quaternion in (w, x, y, z) order, normalized internally."""
        qw, qx, qy, qz = np.asarray(quaternion, dtype=np.float64)
        return cls(Rotation.from_quat([qx, qy, qz, qw]).as_matrix(), translation)

    @classmethod
    def from_rotvec(cls, rotvec: np.ndarray, translation: Optional[np.ndarray] = None) -> "RigidTransform":
        return cls(Rotation.from_rotvec(rotvec).as_matrix(), translation)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "RigidTransform":
        """From a homogeneous (dim + 1) x (dim + 1) matrix."""
        matrix = np.asarray(matrix, dtype=np.float64)
        dim = matrix.shape[0] - 1
        return cls(matrix[:dim, :dim], matrix[:dim, dim])

    @property
    def dim(self) -> int:
        return self._translation.size

    @property
    def tangent_dim(self) -> int:
        return 3 if self.dim == 2 else 6

    @property
    def rotation(self) -> np.ndarray:
        return self._rotation

    @property
    def translation(self) -> np.ndarray:
        return self._translation

    @property
    def angle(self) -> float:
        """Rotation angle of a planar transform."""
        if self.dim != 2:
            raise DomainError("Only planar transforms have a single angle.")
        return float(np.arctan2(self._rotation[1, 0], self._rotation[0, 0]))

    def quaternion(self) -> np.ndarray:
        """Unit quaternion in (w, x, y, z) order with w >= 0."""
        if self.dim != 3:
            raise DomainError("Only spatial transforms have a quaternion.")
        qx, qy, qz, qw = Rotation.from_matrix(self._rotation).as_quat()
        quaternion = np.array([qw, qx, qy, qz])
        return quaternion if qw >= 0 else -quaternion

    def rotvec(self) -> np.ndarray:
        if self.dim == 2:
            return np.array([self.angle])
        return Rotation.from_matrix(self._rotation).as_rotvec()

    def as_matrix(self) -> np.ndarray:
        matrix = np.eye(self.dim + 1)
        matrix[:self.dim, :self.dim] = self._rotation
        matrix[:self.dim, self.dim] = self._translation
        return matrix

    def apply(self, points: ztyping.PointsInput) -> np.ndarray:
        """Transform points of shape (n, dim) or (dim,)."""
        points = np.asarray(points, dtype=np.float64)
        return points @ self._rotation.T + self._translation

    def rotate(self, vectors: ztyping.PointsInput) -> np.ndarray:
        """Rotate direction vectors, e.g. normals."""
        return np.asarray(vectors, dtype=np.float64) @ self._rotation.T

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """`self * other`, applying `other` first."""
        return type(self)(self._rotation @ other.rotation, self._rotation @ other.translation + self._translation)

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return self.compose(other)

    def inverse(self) -> "RigidTransform":
        return type(self)(self._rotation.T, -self._rotation.T @ self._translation)

    def plus(self, delta: ztyping.DeltaType) -> "RigidTransform":
        """Retraction with the tangent increment `[v, omega]`: rotate by Exp(omega) on the left, add `v`.

        The rotation stays orthonormal. For planar transforms `omega` is a single angle.
        """
        delta = np.asarray(delta, dtype=np.float64)
        if delta.shape != (self.tangent_dim,):
            raise DomainError(f"Increment has to have {self.tangent_dim} entries, not {delta.shape}.")
        if self.dim == 2:
            return type(self).from_angle(self.angle + delta[2], self._translation + delta[:2])
        rotation = Rotation.from_rotvec(delta[3:]) * Rotation.from_matrix(self._rotation)
        return type(self)(rotation.as_matrix(), self._translation + delta[:3])

    def center(self) -> np.ndarray:
        """Position of the origin of the transformed frame in the reference frame, -R^T t."""
        return -self._rotation.T @ self._translation

    def to_dict(self) -> Dict:
        result = {'rotation': self._rotation.tolist(), 'translation': self._translation.tolist()}
        if self.dim == 3:
            result['quaternion'] = self.quaternion().tolist()
        else:
            result['angle'] = self.angle
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RigidTransform):
            return NotImplemented
        return np.array_equal(self._rotation, other.rotation) and np.array_equal(self._translation,
                                                                                  other.translation)

    def __hash__(self):
        return hash((self._rotation.tobytes(), self._translation.tobytes()))

    def __repr__(self) -> str:
        return f"<RigidTransform dim={self.dim} rotvec={self.rotvec()} t={self._translation}>"


def pose_error(estimate: RigidTransform, truth: RigidTransform) -> Tuple[float, float]:
    """Rotation error in degrees (geodesic angle of R_est R_truth^T) and translation error in meters."""
    difference = estimate.rotation @ truth.rotation.T
    if estimate.dim == 2:
        angle = abs(np.arctan2(difference[1, 0], difference[0, 0]))
    else:
        angle = Rotation.from_matrix(difference).magnitude()
    return float(np.degrees(angle)), float(np.linalg.norm(estimate.translation - truth.translation))
