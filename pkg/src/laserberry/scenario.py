"""Scenario files: flat sectioned key-value descriptions of a bench setup.

A scenario pins everything a run needs — RNG seed, berry layout, palette
placement, camera poses, clutter density, and parameter overrides for the
gantry, localization, and laser models — so simulations replay exactly.
Unknown sections or keys are rejected rather than ignored; duplicated keys
are parse errors. See ``docs/formats.md`` for the key reference.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ScenarioError
from .gantry import GantryConfig
from .geometry import RigidTransform
from .localization import ClusterParams, LocalizationConfig, SpatialWindow


@dataclass(frozen=True)
class BerrySpec:
    """One fruit: centroid pose and stem properties."""

    center: tuple[float, float, float]          # m, base frame
    diameter_m: float = 0.025
    stem_diameter_mm: float | None = None       # drawn from the seed when omitted
    stem_length_m: float = 0.035
    toughness: float | None = None              # falls back to [laser] toughness

    def __post_init__(self):
        if self.diameter_m <= 0 or self.stem_length_m <= 0:
            raise ScenarioError("berry diameter and stem length must be positive")
        if self.stem_diameter_mm is not None and self.stem_diameter_mm <= 0:
            raise ScenarioError("stem diameter must be positive")


@dataclass(frozen=True)
class PaletteSpec:
    """Calibration patch: a small dense box of reference-colored points."""

    center: tuple[float, float, float] = (-0.08, 0.105, 0.325)
    size: tuple[float, float, float] = (0.015, 0.008, 0.040)
    points: int = 400

    def __post_init__(self):
        if self.points <= 0:
            raise ScenarioError("palette needs a positive point count")
        if any(s <= 0 for s in self.size):
            raise ScenarioError("palette size must be positive per axis")


@dataclass(frozen=True)
class ColorSettings:
    """Base colors and per-channel jitter used by the scene generator."""

    berry_base: tuple[int, int, int] = (190, 35, 45)
    berry_jitter: int = 20
    foliage_base: tuple[int, int, int] = (60, 140, 60)
    foliage_jitter: int = 25
    palette_jitter: int = 3


@dataclass(frozen=True)
class LaserSettings:
    """Cut parameters applied during simulated harvesting."""

    spot_diameter_mm: float = 0.9
    lateral_velocity_mm_s: float = 50.0
    dataset: str = "fine"           # which pierce sweep feeds the model
    toughness: float = 1.0

    def __post_init__(self):
        if self.dataset not in ("fine", "coarse"):
            raise ScenarioError(f"laser dataset must be 'fine' or 'coarse', got {self.dataset!r}")


@dataclass(frozen=True)
class DemoSettings:
    """Controller timestep and timeouts."""

    dt_s: float = 0.001
    cut_timeout_s: float = 30.0
    fall_timeout_s: float = 2.0


@dataclass(frozen=True)
class Scenario:
    """A complete, replayable bench setup."""

    seed: int
    berries: tuple[BerrySpec, ...] = ()
    palette: PaletteSpec = field(default_factory=PaletteSpec)
    camera_1: RigidTransform = field(default_factory=lambda: _default_camera(1))
    camera_2: RigidTransform = field(default_factory=lambda: _default_camera(2))
    berry_points: int = 600
    foliage_points: int = 3000
    foliage_window: SpatialWindow = field(
        default_factory=lambda: SpatialWindow(-0.35, 0.35, -0.25, 0.25, 0.45, 0.75))
    colors: ColorSettings = field(default_factory=ColorSettings)
    gantry: GantryConfig = field(default_factory=GantryConfig)
    localization: LocalizationConfig = field(default_factory=LocalizationConfig)
    laser: LaserSettings = field(default_factory=LaserSettings)
    demo: DemoSettings = field(default_factory=DemoSettings)

    def __post_init__(self):
        if self.seed < 0:
            raise ScenarioError("seed must be a non-negative integer")
        if self.berry_points <= 0:
            raise ScenarioError("berry_points must be positive")
        if self.foliage_points < 0:
            raise ScenarioError("foliage_points must be non-negative")
        w = self.localization.palette_window
        c, s = self.palette.center, self.palette.size
        for axis, (ctr, sz) in enumerate(zip(c, s)):
            lo = (w.x_min, w.y_min, w.z_min)[axis]
            hi = (w.x_max, w.y_max, w.z_max)[axis]
            if ctr - sz / 2 < lo or ctr + sz / 2 > hi:
                raise ScenarioError(
                    "palette patch extends outside the palette calibration window")


def _default_camera(index: int) -> RigidTransform:
    if index == 1:
        return RigidTransform.from_euler_deg(60.0, 0.0, 20.0, (-0.20, -0.45, 0.40))
    return RigidTransform.from_euler_deg(-60.0, 5.0, -160.0, (0.20, 0.45, 0.40))


# ---------------------------------------------------------------------------
# parsing

_BERRY_SECTION = re.compile(r"^berry (\d+)$")

_SECTION_KEYS = {
    "scenario": {"seed", "berry_points", "foliage_points"},
    "colors": {"berry_base", "berry_jitter", "foliage_base", "foliage_jitter",
               "palette_jitter"},
    "foliage": {"x_min", "x_max", "y_min", "y_max", "z_min", "z_max"},
    "palette": {"x", "y", "z", "dx", "dy", "dz", "points"},
    "camera 1": {"x", "y", "z", "roll_deg", "pitch_deg", "yaw_deg"},
    "camera 2": {"x", "y", "z", "roll_deg", "pitch_deg", "yaw_deg"},
    "berry": {"x", "y", "z", "diameter", "stem_diameter_mm", "stem_length",
              "toughness"},
    "gantry": {"max_velocity", "max_accel", "x_min", "x_max", "y_min", "y_max",
               "z_min", "z_max", "home_x", "home_y", "home_z"},
    "localization": {"r_th", "g_th", "b_th", "tolerance", "min_cluster",
                     "max_cluster",
                     "reduced_x_min", "reduced_x_max", "reduced_y_min",
                     "reduced_y_max", "reduced_z_min", "reduced_z_max",
                     "palette_x_min", "palette_x_max", "palette_y_min",
                     "palette_y_max", "palette_z_min", "palette_z_max"},
    "laser": {"spot_diameter_mm", "lateral_velocity_mm_s", "dataset", "toughness"},
    "demo": {"dt", "cut_timeout_s", "fall_timeout_s"},
}


class _Section:
    """One parsed section with typed, tracked key access."""

    def __init__(self, name: str, raw: dict[str, str]):
        self.name = name
        self.raw = raw

    def _fetch(self, key: str, required: bool) -> str | None:
        if key not in self.raw:
            if required:
                raise ScenarioError(f"missing required key '{key}' in [{self.name}]")
            return None
        return self.raw[key]

    def get_float(self, key: str, default: float | None = None, required: bool = False):
        text = self._fetch(key, required)
        if text is None:
            return default
        try:
            return float(text)
        except ValueError as exc:
            raise ScenarioError(f"[{self.name}] {key}: not a number: {text!r}") from exc

    def get_int(self, key: str, default: int | None = None, required: bool = False):
        text = self._fetch(key, required)
        if text is None:
            return default
        try:
            return int(text)
        except ValueError as exc:
            raise ScenarioError(f"[{self.name}] {key}: not an integer: {text!r}") from exc

    def get_str(self, key: str, default: str | None = None, required: bool = False):
        text = self._fetch(key, required)
        return default if text is None else text.strip()

    def get_rgb(self, key: str, default: tuple[int, int, int]) -> tuple[int, int, int]:
        text = self._fetch(key, required=False)
        if text is None:
            return default
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ScenarioError(f"[{self.name}] {key}: expected 'r,g,b', got {text!r}")
        try:
            r, g, b = (int(p) for p in parts)
        except ValueError as exc:
            raise ScenarioError(f"[{self.name}] {key}: bad channel in {text!r}") from exc
        if not all(0 <= c <= 255 for c in (r, g, b)):
            raise ScenarioError(f"[{self.name}] {key}: channels outside [0, 255]")
        return (r, g, b)


def _check_keys(name: str, raw: dict[str, str]) -> None:
    allowed = _SECTION_KEYS["berry"] if _BERRY_SECTION.match(name) else _SECTION_KEYS.get(name)
    if allowed is None:
        raise ScenarioError(f"unknown section [{name}]")
    for key in raw:
        if key not in allowed:
            raise ScenarioError(f"unknown key '{key}' in [{name}]")


def _parse_camera(sec: _Section, index: int) -> RigidTransform:
    default = _default_camera(index)
    if not sec.raw:
        return default
    return RigidTransform.from_euler_deg(
        sec.get_float("roll_deg", 0.0),
        sec.get_float("pitch_deg", 0.0),
        sec.get_float("yaw_deg", 0.0),
        (sec.get_float("x", required=True),
         sec.get_float("y", required=True),
         sec.get_float("z", required=True)),
    )


def _parse_window(sec: _Section, prefix: str, default: SpatialWindow) -> SpatialWindow:
    keys = [f"{prefix}_{k}" for k in ("x_min", "x_max", "y_min", "y_max", "z_min", "z_max")]
    present = [k for k in keys if k in sec.raw]
    if not present:
        return default
    if len(present) != 6:
        raise ScenarioError(
            f"[{sec.name}] {prefix} window needs all six bounds, got {present}")
    return SpatialWindow(*(sec.get_float(k) for k in keys))


def bundled_scenario_path(name: str) -> Path | None:
    """Filesystem path of a scenario shipped with the package.

    Args:
        name: bare scenario name, e.g. ``"demo_11"``.

    Returns:
        The path, or None when no such scenario is bundled.
    """
    entry = resources.files("laserberry") / "data" / "scenarios" / f"{name}.ini"
    path = Path(str(entry))
    return path if path.is_file() else None


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario file.

    Raises
    ------
    ScenarioError
        On unknown sections or keys, duplicated keys, missing required
        keys, or values outside their documented domains.
    """
    path = Path(path)
    parser = configparser.ConfigParser(strict=True, delimiters=("=",),
                                       comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=None,
                                       interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh, source=str(path))
    except configparser.DuplicateOptionError as exc:
        raise ScenarioError(f"duplicate key '{exc.option}' in [{exc.section}] "
                            f"(line {exc.lineno})") from exc
    except configparser.DuplicateSectionError as exc:
        raise ScenarioError(f"duplicate section [{exc.section}] (line {exc.lineno})") from exc
    except configparser.Error as exc:
        raise ScenarioError(f"malformed scenario file: {exc}") from exc

    sections = {name: dict(parser[name]) for name in parser.sections()}
    for name, raw in sections.items():
        _check_keys(name, raw)
    if "scenario" not in sections:
        raise ScenarioError("missing required section [scenario]")

    def sec(name: str) -> _Section:
        return _Section(name, sections.get(name, {}))

    s = sec("scenario")
    seed = s.get_int("seed", required=True)

    berries = []
    berry_names = sorted(
        ((int(m.group(1)), name) for name, m in
         ((n, _BERRY_SECTION.match(n)) for n in sections) if m))
    for _, name in berry_names:
        b = sec(name)
        berries.append(BerrySpec(
            center=(b.get_float("x", required=True),
                    b.get_float("y", required=True),
                    b.get_float("z", required=True)),
            diameter_m=b.get_float("diameter", 0.025),
            stem_diameter_mm=b.get_float("stem_diameter_mm", None),
            stem_length_m=b.get_float("stem_length", 0.035),
            toughness=b.get_float("toughness", None),
        ))

    col = sec("colors")
    colors = ColorSettings(
        berry_base=col.get_rgb("berry_base", (190, 35, 45)),
        berry_jitter=col.get_int("berry_jitter", 20),
        foliage_base=col.get_rgb("foliage_base", (60, 140, 60)),
        foliage_jitter=col.get_int("foliage_jitter", 25),
        palette_jitter=col.get_int("palette_jitter", 3),
    )

    fol = sec("foliage")
    default_fw = SpatialWindow(-0.35, 0.35, -0.25, 0.25, 0.45, 0.75)
    if fol.raw:
        foliage_window = SpatialWindow(
            fol.get_float("x_min", required=True), fol.get_float("x_max", required=True),
            fol.get_float("y_min", required=True), fol.get_float("y_max", required=True),
            fol.get_float("z_min", required=True), fol.get_float("z_max", required=True))
    else:
        foliage_window = default_fw

    pal = sec("palette")
    palette = PaletteSpec(
        center=(pal.get_float("x", -0.08), pal.get_float("y", 0.105),
                pal.get_float("z", 0.325)),
        size=(pal.get_float("dx", 0.015), pal.get_float("dy", 0.008),
              pal.get_float("dz", 0.040)),
        points=pal.get_int("points", 400),
    )

    g = sec("gantry")
    base = GantryConfig()
    gantry = GantryConfig(
        max_velocity=g.get_float("max_velocity", base.max_velocity),
        max_accel=g.get_float("max_accel", base.max_accel),
        x_limits=(g.get_float("x_min", base.x_limits[0]),
                  g.get_float("x_max", base.x_limits[1])),
        y_limits=(g.get_float("y_min", base.y_limits[0]),
                  g.get_float("y_max", base.y_limits[1])),
        z_limits=(g.get_float("z_min", base.z_limits[0]),
                  g.get_float("z_max", base.z_limits[1])),
        home_position=(g.get_float("home_x", base.home_position[0]),
                       g.get_float("home_y", base.home_position[1]),
                       g.get_float("home_z", base.home_position[2])),
    )

    loc = sec("localization")
    base_loc = LocalizationConfig()
    localization = LocalizationConfig(
        reduced_window=_parse_window(loc, "reduced", base_loc.reduced_window),
        palette_window=_parse_window(loc, "palette", base_loc.palette_window),
        r_th=loc.get_float("r_th", base_loc.r_th),
        g_th=loc.get_float("g_th", base_loc.g_th),
        b_th=loc.get_float("b_th", base_loc.b_th),
        cluster=ClusterParams(
            tolerance=loc.get_float("tolerance", base_loc.cluster.tolerance),
            min_size=loc.get_int("min_cluster", base_loc.cluster.min_size),
            max_size=loc.get_int("max_cluster", base_loc.cluster.max_size)),
    )

    las = sec("laser")
    laser = LaserSettings(
        spot_diameter_mm=las.get_float("spot_diameter_mm", 0.9),
        lateral_velocity_mm_s=las.get_float("lateral_velocity_mm_s", 50.0),
        dataset=las.get_str("dataset", "fine"),
        toughness=las.get_float("toughness", 1.0),
    )

    d = sec("demo")
    demo = DemoSettings(
        dt_s=d.get_float("dt", 0.001),
        cut_timeout_s=d.get_float("cut_timeout_s", 30.0),
        fall_timeout_s=d.get_float("fall_timeout_s", 2.0),
    )

    return Scenario(seed=seed, berries=tuple(berries), palette=palette,
                    camera_1=_parse_camera(sec("camera 1"), 1),
                    camera_2=_parse_camera(sec("camera 2"), 2),
                    berry_points=s.get_int("berry_points", 600),
                    foliage_points=s.get_int("foliage_points", 3000),
                    foliage_window=foliage_window, colors=colors, gantry=gantry,
                    localization=localization, laser=laser, demo=demo)
