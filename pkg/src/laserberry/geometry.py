"""Colored point clouds, rigid transforms, boxes, and radius queries.

Coordinates are metric and expressed in named frames; color channels are
8-bit RGB. All containers are immutable after construction so they can be
shared freely between the localization pipeline and tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import ValidationError

# Canonical frame names used throughout the pipeline.
BASE_FRAME = "harvester-base"
CAMERA_1_FRAME = "camera-1"
CAMERA_2_FRAME = "camera-2"

_ROT_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ColoredPoint:
    """A single metric point with an 8-bit RGB color."""

    x: float
    y: float
    z: float
    r: int
    g: int
    b: int

    def __post_init__(self):
        if not all(np.isfinite((self.x, self.y, self.z))):
            raise ValidationError("point coordinates must be finite")
        for name in ("r", "g", "b"):
            c = getattr(self, name)
            if not 0 <= c <= 255:
                raise ValidationError(f"channel {name}={c} outside [0, 255]")


@dataclass(frozen=True)
class PointCloud:
    """An ordered set of colored points in a named frame.

    Parameters
    ----------
    xyz : (n, 3) float64 array
        Metric coordinates. Must be finite.
    rgb : (n, 3) uint8 array
        Color channels, row-aligned with ``xyz``.
    frame : str
        Name of the coordinate frame the points are expressed in.
    """

    xyz: np.ndarray
    rgb: np.ndarray
    frame: str

    def __post_init__(self):
        xyz = np.asarray(self.xyz, dtype=np.float64)
        rgb = np.asarray(self.rgb)
        if xyz.ndim != 2 or xyz.shape[1] != 3:
            raise ValidationError(f"xyz must be (n, 3), got {xyz.shape}")
        if rgb.shape != xyz.shape:
            raise ValidationError(f"rgb shape {rgb.shape} != xyz shape {xyz.shape}")
        if xyz.size and not np.isfinite(xyz).all():
            raise ValidationError("cloud contains non-finite coordinates")
        if rgb.dtype != np.uint8:
            if rgb.size and (rgb.min() < 0 or rgb.max() > 255):
                raise ValidationError("color channels outside [0, 255]")
            rgb = rgb.astype(np.uint8)
        object.__setattr__(self, "xyz", _readonly(xyz))
        object.__setattr__(self, "rgb", _readonly(rgb))

    @classmethod
    def empty(cls, frame: str) -> "PointCloud":
        return cls(np.empty((0, 3)), np.empty((0, 3), dtype=np.uint8), frame)

    @classmethod
    def from_points(cls, points, frame: str) -> "PointCloud":
        """Build a cloud from an iterable of :class:`ColoredPoint`."""
        pts = list(points)
        if not pts:
            return cls.empty(frame)
        xyz = np.array([(p.x, p.y, p.z) for p in pts], dtype=np.float64)
        rgb = np.array([(p.r, p.g, p.b) for p in pts], dtype=np.uint8)
        return cls(xyz, rgb, frame)

    def __len__(self) -> int:
        return self.xyz.shape[0]

    def __getitem__(self, i: int) -> ColoredPoint:
        x, y, z = self.xyz[i]
        r, g, b = self.rgb[i]
        return ColoredPoint(float(x), float(y), float(z), int(r), int(g), int(b))

    def select(self, mask_or_indices) -> "PointCloud":
        """Return the sub-cloud at the given boolean mask or index array."""
        return PointCloud(self.xyz[mask_or_indices], self.rgb[mask_or_indices], self.frame)


@dataclass(frozen=True)
class RigidTransform:
    """A proper rigid transform ``p_out = rotation @ p_in + translation``.

    The rotation must be orthonormal with determinant +1 (checked to 1e-9).
    """

    rotation: np.ndarray     # (3, 3)
    translation: np.ndarray  # (3,)

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=np.float64)
        tra = np.asarray(self.translation, dtype=np.float64).reshape(-1)
        if rot.shape != (3, 3):
            raise ValidationError(f"rotation must be (3, 3), got {rot.shape}")
        if tra.shape != (3,):
            raise ValidationError(f"translation must be (3,), got {tra.shape}")
        if not (np.isfinite(rot).all() and np.isfinite(tra).all()):
            raise ValidationError("transform contains non-finite values")
        if np.abs(rot @ rot.T - np.eye(3)).max() > _ROT_TOL:
            raise ValidationError("rotation is not orthonormal")
        if abs(np.linalg.det(rot) - 1.0) > _ROT_TOL:
            raise ValidationError("rotation determinant is not +1 (improper rotation)")
        object.__setattr__(self, "rotation", _readonly(rot))
        object.__setattr__(self, "translation", _readonly(tra))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_euler_deg(cls, roll: float, pitch: float, yaw: float,
                       translation=(0.0, 0.0, 0.0)) -> "RigidTransform":
        """Build from intrinsic x-y-z Euler angles in degrees."""
        from scipy.spatial.transform import Rotation

        rot = Rotation.from_euler("xyz", [roll, pitch, yaw], degrees=True)
        return cls(rot.as_matrix(), np.asarray(translation, dtype=np.float64))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform an (n, 3) array of points."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Return the transform equivalent to applying ``other`` first."""
        return RigidTransform(self.rotation @ other.rotation,
                              self.rotation @ other.translation + self.translation)

    def inverse(self) -> "RigidTransform":
        rot_t = self.rotation.T
        return RigidTransform(rot_t, -rot_t @ self.translation)


def transform_cloud(t: RigidTransform, cloud: PointCloud, target_frame: str) -> PointCloud:
    """Re-express a cloud in ``target_frame`` through the rigid transform ``t``.

    Colors and point order are preserved; only coordinates change.
    """
    return PointCloud(t.apply(cloud.xyz), cloud.rgb, target_frame)


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box with inclusive bounds."""

    min: np.ndarray  # (3,)
    max: np.ndarray  # (3,)

    def __post_init__(self):
        lo = np.asarray(self.min, dtype=np.float64).reshape(-1)
        hi = np.asarray(self.max, dtype=np.float64).reshape(-1)
        if lo.shape != (3,) or hi.shape != (3,):
            raise ValidationError("Aabb bounds must be 3-vectors")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValidationError("Aabb bounds must be finite")
        if (lo > hi).any():
            raise ValidationError("Aabb min exceeds max")
        object.__setattr__(self, "min", _readonly(lo))
        object.__setattr__(self, "max", _readonly(hi))

    @classmethod
    def of_points(cls, xyz: np.ndarray) -> "Aabb":
        xyz = np.asarray(xyz, dtype=np.float64)
        if xyz.shape[0] == 0:
            raise ValidationError("cannot bound an empty point set")
        return cls(xyz.min(axis=0), xyz.max(axis=0))

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=np.float64)
        return bool((p >= self.min).all() and (p <= self.max).all())


class KdTree:
    """Spatial index over a fixed point set supporting exact radius queries.

    Median splits along the widest axis (``balanced_tree`` construction), so
    the structure is deterministic for a fixed input order. Radius queries
    return sorted index arrays and are exact: a linear scan over
    ``‖p - q‖ <= r`` yields the same set.
    """

    def __init__(self, points: np.ndarray):
        points = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
        if points.ndim != 2 or points.shape[1] != 3:
            raise ValidationError(f"points must be (n, 3), got {points.shape}")
        if points.size and not np.isfinite(points).all():
            raise ValidationError("points contain non-finite coordinates")
        self.points = _readonly(points)
        self._tree = cKDTree(points, balanced_tree=True) if len(points) else None

    def __len__(self) -> int:
        return self.points.shape[0]

    def radius_search(self, query, radius: float) -> np.ndarray:
        """Indices of all points within ``radius`` of ``query`` (inclusive).

        Returns an ascending int64 array; empty for an empty tree.
        """
        if radius < 0:
            raise ValidationError(f"radius must be non-negative, got {radius}")
        q = np.asarray(query, dtype=np.float64).reshape(-1)
        if q.shape != (3,):
            raise ValidationError("query must be a 3-vector")
        if self._tree is None:
            return np.empty(0, dtype=np.int64)
        idx = self._tree.query_ball_point(q, radius)
        return np.sort(np.asarray(idx, dtype=np.int64))

    def pairs_within(self, radius: float) -> np.ndarray:
        """All index pairs (i < j) whose points lie within ``radius``."""
        if radius < 0:
            raise ValidationError(f"radius must be non-negative, got {radius}")
        if self._tree is None:
            return np.empty((0, 2), dtype=np.int64)
        return self._tree.query_pairs(radius, output_type="ndarray")


def build_kdtree(cloud: PointCloud) -> KdTree:
    """Index a cloud's coordinates for radius queries."""
    return KdTree(cloud.xyz)


def radius_search(tree: KdTree, query, radius: float) -> np.ndarray:
    """Functional alias for :meth:`KdTree.radius_search`."""
    return tree.radius_search(query, radius)
