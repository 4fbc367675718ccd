"""Stepped kinematic simulation of the three-axis harvester gantry.

Axes follow trapezoidal velocity profiles (triangular when the move is too
short to reach cruise speed), the focus lens homes against a limit switch
and oscillates the beam laterally, the v-groove trapper sweeps between its
open and closed angles, and three interrupter beams below the groove report
when a severed fruit falls past. Everything advances on a fixed timestep;
per-step state is evaluated from closed-form profiles so repeated runs are
bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import MotionError, ValidationError

GRAVITY = 9.81  # m/s^2


# ---------------------------------------------------------------------------
# axis motion profiles

@dataclass(frozen=True)
class MotionProfile:
    """Closed-form trapezoidal (or triangular) move between two positions."""

    start: float
    end: float
    t0: float          # sim time when the move was commanded, s
    t_acc: float       # acceleration leg duration, s
    t_cruise: float    # constant-velocity leg duration, s
    v_peak: float      # signed cruise/peak velocity, m/s
    accel: float       # unsigned acceleration magnitude, m/s^2

    @property
    def duration(self) -> float:
        return 2.0 * self.t_acc + self.t_cruise

    @classmethod
    def plan(cls, start: float, end: float, t0: float, v_max: float,
             a_max: float) -> "MotionProfile":
        d = abs(end - start)
        sign = 1.0 if end >= start else -1.0
        if d == 0.0:
            return cls(start, end, t0, 0.0, 0.0, 0.0, a_max)
        if d >= v_max * v_max / a_max:
            # long move: accelerate to v_max, cruise, decelerate
            t_acc = v_max / a_max
            t_cruise = (d - v_max * v_max / a_max) / v_max
            v_peak = sign * v_max
        else:
            # short move: triangular profile peaking below v_max
            t_acc = math.sqrt(d / a_max)
            t_cruise = 0.0
            v_peak = sign * a_max * t_acc
        return cls(start, end, t0, t_acc, t_cruise, v_peak, a_max)

    def sample(self, t: float) -> tuple[float, float]:
        """(position, velocity) at absolute sim time ``t``."""
        tau = t - self.t0
        if tau <= 0.0:
            return self.start, 0.0
        t_acc, t_cruise = self.t_acc, self.t_cruise
        if tau >= self.duration:
            return self.end, 0.0
        a = self.accel if self.v_peak >= 0 else -self.accel
        if tau < t_acc:
            return self.start + 0.5 * a * tau * tau, a * tau
        d_acc = 0.5 * a * t_acc * t_acc
        if tau < t_acc + t_cruise:
            return self.start + d_acc + self.v_peak * (tau - t_acc), self.v_peak
        td = tau - t_acc - t_cruise   # time into deceleration leg
        return (self.start + d_acc + self.v_peak * t_cruise
                + self.v_peak * td - 0.5 * a * td * td,
                self.v_peak - a * td)


@dataclass
class AxisState:
    """One linear axis: position, travel limits, and the active profile."""

    name: str
    position: float
    limits: tuple[float, float]     # m, (low, high)
    max_velocity: float             # m/s
    max_accel: float                # m/s^2
    velocity: float = 0.0
    profile: MotionProfile | None = None

    def command(self, target: float, now: float) -> None:
        lo, hi = self.limits
        if not lo <= target <= hi:
            raise MotionError(
                f"{self.name}-axis target {target:.4f} m outside travel [{lo}, {hi}] m")
        if target == self.position:
            self.profile = None   # already there: completes immediately
            return
        self.profile = MotionProfile.plan(self.position, target, now,
                                          self.max_velocity, self.max_accel)

    def advance(self, now: float) -> None:
        if self.profile is not None:
            self.position, self.velocity = self.profile.sample(now)
            if now - self.profile.t0 >= self.profile.duration:
                self.profile = None
                self.velocity = 0.0

    @property
    def idle(self) -> bool:
        return self.profile is None


# ---------------------------------------------------------------------------
# lens, trapper, interrupters

class LensMode(Enum):
    IDLE = "idle"
    HOMING = "homing"
    OSCILLATING = "oscillating"


@dataclass
class LensAxis:
    """Focus-lens axis: limit-switch homing and lateral beam oscillation.

    Positions are millimetres on a short stroke. Oscillation sweeps the
    beam as a triangle wave from the home end; it is refused until the
    axis has been referenced at least once.
    """

    travel_mm: float = 5.0
    stroke_mm: float = 4.0          # oscillation sweep length
    homing_speed_mm_s: float = 10.0
    position_mm: float = 5.0        # powered up at the far end, unreferenced
    homed: bool = False
    mode: LensMode = LensMode.IDLE
    _t_start: float = 0.0
    _start_pos: float = 0.0
    _osc_speed: float = 0.0         # mm/s

    def begin_homing(self, now: float) -> None:
        if self.position_mm == 0.0:
            self.homed = True      # already on the switch
            self.mode = LensMode.IDLE
            return
        self.mode = LensMode.HOMING
        self._t_start = now
        self._start_pos = self.position_mm

    def begin_oscillation(self, lateral_velocity_mm_s: float, now: float) -> None:
        if not self.homed:
            raise ValidationError("lens oscillation requested before homing")
        if lateral_velocity_mm_s <= 0:
            raise ValidationError("lens oscillation speed must be positive")
        self.mode = LensMode.OSCILLATING
        self._t_start = now
        self._start_pos = self.position_mm
        self._osc_speed = lateral_velocity_mm_s

    def stop(self) -> None:
        self.mode = LensMode.IDLE

    def advance(self, now: float) -> None:
        if self.mode is LensMode.HOMING:
            travelled = self.homing_speed_mm_s * (now - self._t_start)
            if travelled >= self._start_pos:
                self.position_mm = 0.0
                self.homed = True
                self.mode = LensMode.IDLE
            else:
                self.position_mm = self._start_pos - travelled
        elif self.mode is LensMode.OSCILLATING:
            # triangle wave over [0, stroke] starting from the home end
            u = (self._osc_speed * (now - self._t_start)) % (2.0 * self.stroke_mm)
            self.position_mm = u if u <= self.stroke_mm else 2.0 * self.stroke_mm - u

    @property
    def homing_done(self) -> bool:
        return self.mode is not LensMode.HOMING


class TrapperMode(Enum):
    OPEN = "open"
    CLOSED = "closed"
    MOVING = "moving"


@dataclass
class TrapperState:
    """V-groove trapper jaw: angle slews between open and closed stops."""

    open_angle_deg: float = 90.0
    closed_angle_deg: float = 120.0
    rate_deg_s: float = 150.0
    angle_deg: float = 90.0
    target_deg: float = 90.0

    def command(self, closed: bool) -> None:
        self.target_deg = self.closed_angle_deg if closed else self.open_angle_deg

    def advance(self, dt: float) -> None:
        delta = self.target_deg - self.angle_deg
        step = self.rate_deg_s * dt
        if abs(delta) <= step:
            self.angle_deg = self.target_deg
        else:
            self.angle_deg += step if delta > 0 else -step

    @property
    def mode(self) -> TrapperMode:
        if self.angle_deg == self.open_angle_deg == self.target_deg:
            return TrapperMode.OPEN
        if self.angle_deg == self.closed_angle_deg == self.target_deg:
            return TrapperMode.CLOSED
        return TrapperMode.MOVING

    @property
    def idle(self) -> bool:
        return self.angle_deg == self.target_deg


@dataclass(frozen=True)
class FallEvent:
    """A severed fruit crossed an interrupter beam."""

    time: float
    fruit_uid: int
    beam_index: int


@dataclass
class InterrupterBank:
    """Three horizontal light beams below the trapper groove.

    Beam planes sit at fixed drops below the groove center; each spans a
    limited lateral window in the tool frame. A fruit triggers at most one
    event, on the first step its center crosses any beam plane inside that
    window.
    """

    offsets_m: tuple[float, ...] = (0.030, 0.045, 0.060)
    halfspan_m: float = 0.0125
    _fired: set = field(default_factory=set)

    def check(self, now: float, tool_xyz: tuple[float, float, float],
              fruits) -> FallEvent | None:
        tx, ty, tz = tool_xyz
        for fruit in fruits:
            if fruit.attached or fruit.uid in self._fired:
                continue
            x, y, z_now = fruit.center
            z_prev = fruit.prev_z
            if abs(x - tx) > self.halfspan_m or abs(y - ty) > self.halfspan_m:
                continue
            for i, off in enumerate(self.offsets_m):
                plane = tz - off
                if z_prev > plane >= z_now:
                    self._fired.add(fruit.uid)
                    return FallEvent(now, fruit.uid, i)
        return None


# ---------------------------------------------------------------------------
# the gantry

@dataclass(frozen=True)
class GantryConfig:
    """Travel limits, speed limits, and tool geometry.

    The x stroke is the full 0.48 m of the frame; per-axis speed and
    acceleration limits apply to all three axes.
    """

    max_velocity: float = 0.5       # m/s
    max_accel: float = 2.0          # m/s^2
    x_limits: tuple[float, float] = (-0.24, 0.24)
    y_limits: tuple[float, float] = (-0.30, 0.30)
    z_limits: tuple[float, float] = (0.0, 0.80)
    trapper_open_deg: float = 90.0
    trapper_closed_deg: float = 120.0
    trapper_rate_deg_s: float = 150.0
    lens_travel_mm: float = 5.0
    lens_stroke_mm: float = 4.0
    lens_homing_speed_mm_s: float = 10.0
    capture_halfwidth_m: float = 0.020   # stem funneling reach of the groove
    interrupter_offsets_m: tuple[float, ...] = (0.030, 0.045, 0.060)
    interrupter_halfspan_m: float = 0.0125
    home_position: tuple[float, float, float] = (0.0, -0.25, 0.30)

    def __post_init__(self):
        if self.max_velocity <= 0 or self.max_accel <= 0:
            raise ValidationError("axis speed and acceleration limits must be positive")
        for name in ("x_limits", "y_limits", "z_limits"):
            lo, hi = getattr(self, name)
            if lo >= hi:
                raise ValidationError(f"{name} must be an increasing pair")


class GantrySim:
    """Mutable simulation state for the gantry, lens, trapper, and beams."""

    def __init__(self, config: GantryConfig | None = None):
        self.config = config if config is not None else GantryConfig()
        c = self.config
        hx, hy, hz = c.home_position
        self.time = 0.0
        self.x = AxisState("x", hx, c.x_limits, c.max_velocity, c.max_accel)
        self.y = AxisState("y", hy, c.y_limits, c.max_velocity, c.max_accel)
        self.z = AxisState("z", hz, c.z_limits, c.max_velocity, c.max_accel)
        self.lens = LensAxis(travel_mm=c.lens_travel_mm, stroke_mm=c.lens_stroke_mm,
                             homing_speed_mm_s=c.lens_homing_speed_mm_s,
                             position_mm=c.lens_travel_mm)
        self.trapper = TrapperState(open_angle_deg=c.trapper_open_deg,
                                    closed_angle_deg=c.trapper_closed_deg,
                                    rate_deg_s=c.trapper_rate_deg_s,
                                    angle_deg=c.trapper_open_deg,
                                    target_deg=c.trapper_open_deg)
        self.interrupters = InterrupterBank(offsets_m=c.interrupter_offsets_m,
                                            halfspan_m=c.interrupter_halfspan_m)
        self.laser_on = False
        self.homing_count = 0

    # -- commands ----------------------------------------------------------

    def command_move(self, x: float, y: float, z: float) -> None:
        """Retarget all three axes; they move concurrently.

        Raises :class:`MotionError` for targets outside the travel limits.
        A command equal to the current pose completes immediately.
        """
        now = self.time
        self.x.command(x, now)
        self.y.command(y, now)
        self.z.command(z, now)

    def home_lens(self) -> None:
        """Reference the lens against its limit switch at homing speed."""
        self.homing_count += 1
        self.lens.begin_homing(self.time)

    def start_lens_oscillation(self, lateral_velocity_mm_s: float) -> None:
        self.lens.begin_oscillation(lateral_velocity_mm_s, self.time)

    def stop_lens_oscillation(self) -> None:
        self.lens.stop()

    def set_trapper(self, closed: bool) -> None:
        self.trapper.command(closed)

    def set_laser(self, on: bool) -> None:
        if on and self.trapper.mode is not TrapperMode.CLOSED:
            raise ValidationError("laser may only be energized with the trapper closed")
        self.laser_on = on

    # -- queries -----------------------------------------------------------

    def tool_position(self) -> tuple[float, float, float]:
        """Groove-center position in the base frame, metres."""
        return (self.x.position, self.y.position, self.z.position)

    @property
    def axes_idle(self) -> bool:
        return self.x.idle and self.y.idle and self.z.idle

    def captures(self, stem_x: float, stem_y: float) -> bool:
        """Would closing the trapper funnel a stem at (x, y) into the groove?"""
        dx = stem_x - self.x.position
        dy = stem_y - self.y.position
        return math.hypot(dx, dy) <= self.config.capture_halfwidth_m

    # -- integration -------------------------------------------------------

    def step(self, dt: float) -> None:
        """Advance the whole mechanism by ``dt`` seconds."""
        if dt <= 0:
            raise ValidationError(f"timestep must be positive, got {dt}")
        self.time += dt
        now = self.time
        self.x.advance(now)
        self.y.advance(now)
        self.z.advance(now)
        self.lens.advance(now)
        self.trapper.advance(dt)


def check_interrupters(sim: GantrySim, fruits) -> FallEvent | None:
    """Edge-triggered fall detection for the given fruit bodies.

    ``fruits`` is any iterable of objects exposing ``uid``, ``attached``,
    ``center`` (x, y, z) and ``prev_z``. At most one event fires per fruit.
    """
    return sim.interrupters.check(sim.time, sim.tool_position(), fruits)
