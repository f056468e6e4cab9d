#  Copyright (c) 2021 robfit
from typing import Optional

import numpy as np

from ..util import ztyping
from ..util.exception import DomainError, PointCloudFormatError
from .geometry import RigidTransform


class PointCloud:

    def __init__(self, points: ztyping.PointsInput, normals: Optional[ztyping.PointsInput] = None):
        """2-D or 3-D points in meters with optional unit normals, one per point.

        Raises:
            DomainError: if the shapes do not match or a normal is not of unit length within 1e-6.
        """
        points = np.array(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] not in (2, 3):
            raise DomainError(f"Points have to be of shape (n, 2) or (n, 3), not {points.shape}.")
        if not np.all(np.isfinite(points)):
            raise DomainError("Points have to be finite.")
        if normals is not None:
            normals = np.array(normals, dtype=np.float64)
            if normals.shape != points.shape:
                raise DomainError(f"Normals of shape {normals.shape} do not match the points {points.shape}.")
            if not np.allclose(np.linalg.norm(normals, axis=1), 1., atol=1e-6, rtol=0):
                raise DomainError("Normals have to be of unit length.")
            normals.flags.writeable = False
        points.flags.writeable = False
        self._points = points
        self._normals = normals

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def normals(self) -> Optional[np.ndarray]:
        return self._normals

    @property
    def has_normals(self) -> bool:
        return self._normals is not None

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    def __len__(self) -> int:
        return self._points.shape[0]

    def transformed(self, transform: RigidTransform) -> "PointCloud":
        normals = None if self._normals is None else transform.rotate(self._normals)
        return type(self)(transform.apply(self._points), normals)

    def with_points(self, points: ztyping.PointsInput) -> "PointCloud":
        """Same normals, new point positions (e.g. after outlier injection)."""
        return type(self)(points, self._normals)

    def __repr__(self) -> str:
        return f"<PointCloud n={len(self)} dim={self.dim} normals={self.has_normals}>"


def load_point_cloud(path: ztyping.PathType) -> PointCloud:
    """Read whitespace separated text, one point per line: `x y [z] [nx ny [nz]]`.

    Empty lines and lines starting with `#` are skipped.

    Raises:
        PointCloudFormatError: with the line number of the first malformed line.
    """
    rows = []
    n_columns = None
    with open(path) as file:
        for lineno, line in enumerate(file, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            try:
                row = [float(value) for value in line.split()]
            except ValueError as error:
                raise PointCloudFormatError(f"line {lineno}: cannot parse {line!r}") from error
            if n_columns is None:
                n_columns = len(row)
                if n_columns not in (2, 3, 4, 6):
                    raise PointCloudFormatError(f"line {lineno}: expected 2, 3, 4 or 6 columns, got {n_columns}")
            elif len(row) != n_columns:
                raise PointCloudFormatError(f"line {lineno}: expected {n_columns} columns, got {len(row)}")
            rows.append(row)
    if not rows:
        raise PointCloudFormatError(f"{path} contains no points.")
    data = np.array(rows)
    dim = 2 if n_columns in (2, 4) else 3
    normals = data[:, dim:] if n_columns in (4, 6) else None
    try:
        return PointCloud(data[:, :dim], normals)
    except DomainError as error:
        raise PointCloudFormatError(f"{path}: {error}") from error


def save_point_cloud(cloud: PointCloud, path: ztyping.PathType) -> None:
    data = cloud.points if not cloud.has_normals else np.hstack([cloud.points, cloud.normals])
    np.savetxt(path, data, fmt='%.17g')
