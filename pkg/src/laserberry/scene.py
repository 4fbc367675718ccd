"""Synthetic scene generation with per-point ground truth.

Scenes are drawn from a counter-based Philox generator keyed by the
scenario seed, so output is bit-identical across runs and platforms. Draw
order is fixed: stem diameters for all berries, then per berry its surface
directions and colors, then foliage positions / colors / camera
assignment, then palette positions and colors.

Each berry is a slightly prolate ellipsoid sampled on its surface; berry
and foliage points are partitioned between the two cameras by which camera
each point faces, while the palette patch is fully visible to both (it
calibrates each camera independently).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CAMERA_1_FRAME, CAMERA_2_FRAME, PointCloud
from .scenario import Scenario

#: Ground-truth label values for non-berry points.
LABEL_FOLIAGE = -1
LABEL_PALETTE = -2

#: Ratio of the vertical semi-axis to the equatorial one.
_ELONGATION = 1.15

#: Stem diameters are drawn uniformly from this band (mm) when unspecified.
STEM_DIAMETER_RANGE_MM = (2.0, 2.4)


@dataclass(frozen=True)
class SceneTruth:
    """Generator-side ground truth for a synthetic scene."""

    berry_centers: np.ndarray        # (B, 3) m
    berry_diameters_m: np.ndarray    # (B,)
    stem_diameters_mm: np.ndarray    # (B,)
    stem_bottom_z: np.ndarray        # (B,) m, berry top
    stem_top_z: np.ndarray           # (B,) m
    toughness: np.ndarray            # (B,)
    labels_cam1: np.ndarray          # per-point: berry index, -1 foliage, -2 palette
    labels_cam2: np.ndarray


def generate_scene(scenario: Scenario) -> tuple[PointCloud, PointCloud, SceneTruth]:
    """Synthesize the two camera clouds and their ground truth."""
    rng = np.random.Generator(np.random.Philox(scenario.seed))
    colors = scenario.colors
    cam1_pos = scenario.camera_1.translation
    cam2_pos = scenario.camera_2.translation

    nb = len(scenario.berries)
    drawn_stems = rng.uniform(*STEM_DIAMETER_RANGE_MM, size=nb)
    stem_diameters = np.array([
        spec.stem_diameter_mm if spec.stem_diameter_mm is not None else drawn_stems[i]
        for i, spec in enumerate(scenario.berries)])

    parts1: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []  # xyz, rgb, labels
    parts2: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []

    def _colored(n: int, base: tuple[int, int, int], jitter: int) -> np.ndarray:
        jit = rng.integers(-jitter, jitter + 1, size=(n, 3))
        return np.clip(np.asarray(base, dtype=np.int16) + jit, 0, 255).astype(np.uint8)

    centers = np.zeros((nb, 3))
    for i, spec in enumerate(scenario.berries):
        center = np.asarray(spec.center, dtype=np.float64)
        centers[i] = center
        n = scenario.berry_points
        directions = rng.normal(size=(n, 3))
        directions /= np.maximum(np.linalg.norm(directions, axis=1, keepdims=True), 1e-12)
        radius = spec.diameter_m / 2.0
        semi = np.array([radius, radius, _ELONGATION * radius])
        pts = center + directions * semi
        rgb = _colored(n, colors.berry_base, colors.berry_jitter)
        labels = np.full(n, i, dtype=np.int32)
        outward = pts - center
        facing1 = np.einsum("ij,ij->i", outward, cam1_pos - pts)
        facing2 = np.einsum("ij,ij->i", outward, cam2_pos - pts)
        to_cam1 = facing1 >= facing2
        parts1.append((pts[to_cam1], rgb[to_cam1], labels[to_cam1]))
        parts2.append((pts[~to_cam1], rgb[~to_cam1], labels[~to_cam1]))

    fw = scenario.foliage_window
    nf = scenario.foliage_points
    fol_pts = rng.uniform([fw.x_min, fw.y_min, fw.z_min],
                          [fw.x_max, fw.y_max, fw.z_max], size=(nf, 3))
    fol_rgb = _colored(nf, colors.foliage_base, colors.foliage_jitter)
    fol_labels = np.full(nf, LABEL_FOLIAGE, dtype=np.int32)
    to_cam1 = rng.integers(0, 2, size=nf) == 0
    parts1.append((fol_pts[to_cam1], fol_rgb[to_cam1], fol_labels[to_cam1]))
    parts2.append((fol_pts[~to_cam1], fol_rgb[~to_cam1], fol_labels[~to_cam1]))

    pal = scenario.palette
    c = np.asarray(pal.center)
    half = np.asarray(pal.size) / 2.0
    pal_pts = rng.uniform(c - half, c + half, size=(pal.points, 3))
    pal_rgb = _colored(pal.points, colors.berry_base, colors.palette_jitter)
    pal_labels = np.full(pal.points, LABEL_PALETTE, dtype=np.int32)
    parts1.append((pal_pts, pal_rgb, pal_labels))
    parts2.append((pal_pts, pal_rgb, pal_labels))

    def _assemble(parts, frame, pose):
        xyz = np.vstack([p[0] for p in parts]) if parts else np.empty((0, 3))
        rgb = np.vstack([p[1] for p in parts]) if parts else np.empty((0, 3), np.uint8)
        labels = np.concatenate([p[2] for p in parts]) if parts else np.empty(0, np.int32)
        cloud = PointCloud(pose.inverse().apply(xyz), rgb, frame)
        return cloud, labels

    cloud1, labels1 = _assemble(parts1, CAMERA_1_FRAME, scenario.camera_1)
    cloud2, labels2 = _assemble(parts2, CAMERA_2_FRAME, scenario.camera_2)

    diameters = np.array([s.diameter_m for s in scenario.berries])
    stem_bottom = centers[:, 2] + _ELONGATION * diameters / 2.0 if nb else np.zeros(0)
    stem_lengths = np.array([s.stem_length_m for s in scenario.berries])
    toughness = np.array([
        s.toughness if s.toughness is not None else scenario.laser.toughness
        for s in scenario.berries])

    truth = SceneTruth(
        berry_centers=centers,
        berry_diameters_m=diameters,
        stem_diameters_mm=stem_diameters,
        stem_bottom_z=stem_bottom,
        stem_top_z=stem_bottom + stem_lengths if nb else np.zeros(0),
        toughness=toughness,
        labels_cam1=labels1,
        labels_cam2=labels2,
    )
    return cloud1, cloud2, truth


def apply_color_gain(cloud: PointCloud, gain: float) -> PointCloud:
    """Scale every channel by ``gain`` (rounded, clipped to 8 bits)."""
    rgb = np.clip(np.rint(cloud.rgb.astype(np.float64) * gain), 0, 255).astype(np.uint8)
    return PointCloud(cloud.xyz, rgb, cloud.frame)


@dataclass
class FruitBody:
    """Mutable physical fruit used by the harvest simulation.

    The stem hangs the fruit from directly above its centroid; capture by
    the trapper snaps the stem onto the groove center, severing detaches
    the body, and gravity then integrates its fall.
    """

    uid: int
    x: float
    y: float
    z: float
    stem_x: float
    stem_y: float
    stem_diameter_mm: float
    toughness: float
    prev_z: float = 0.0
    fall_velocity: float = 0.0      # m/s, downward positive
    attached: bool = True
    attempted: bool = False
    landed: bool = False

    def __post_init__(self):
        self.prev_z = self.z

    @property
    def center(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def snap_to(self, x: float, y: float) -> None:
        """Funnel the stem (and the hanging fruit) onto the groove center."""
        self.x = self.stem_x = x
        self.y = self.stem_y = y

    def fall_step(self, dt: float, gravity: float) -> None:
        self.prev_z = self.z
        self.fall_velocity += gravity * dt
        self.z -= self.fall_velocity * dt
        if self.z <= 0.0:
            self.landed = True


def make_world(truth: SceneTruth) -> list[FruitBody]:
    """Instantiate fruit bodies from scene ground truth."""
    world = []
    for i in range(len(truth.berry_centers)):
        cx, cy, cz = truth.berry_centers[i]
        world.append(FruitBody(
            uid=i, x=float(cx), y=float(cy), z=float(cz),
            stem_x=float(cx), stem_y=float(cy),
            stem_diameter_mm=float(truth.stem_diameters_mm[i]),
            toughness=float(truth.toughness[i]),
        ))
    return world
