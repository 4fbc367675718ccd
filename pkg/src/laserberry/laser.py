"""Calibrated laser stem-cutting model.

The model rests on a single bench observation: a stationary beam of spot
diameter ``phi_ls`` pierces a stem of diameter ``phi_s`` in time ``t_p``,
giving a pierce velocity ``v_p = phi_s / t_p`` and a pierce constant
``C_p = v_p * phi_ls`` (mm^2/s) that captures how much stem section the
beam removes per second. Severing a stem of cross-section
``pi * (phi_s / 2)^2`` with an oscillating beam then takes

    t_c = k * pi * (phi_s / 2)^2 / C_p(phi_ls)

where ``k`` scales stem toughness (1.0 for fresh stems). Cut time is
insensitive to the lateral beam speed within the calibrated regime (10 to
96 mm/s); below that the cut is unreliable and the model refuses to
predict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

from .errors import DomainError, UnsupportedRegimeError, ValidationError

if TYPE_CHECKING:  # pragma: no cover
    from .datasets import Datasets

#: Lateral beam speeds below this (mm/s) are outside the calibrated regime.
DEFAULT_V_L_MIN = 10.0


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not (np.isfinite(value) and value > 0):
            raise ValidationError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class PierceRecord:
    """One stationary-beam piercing measurement (averaged trials)."""

    spot_diameter_mm: float
    stem_diameter_mm: float
    pierce_time_s: float
    pierce_velocity_mm_s: float
    pierce_constant_mm2_s: float

    def __post_init__(self):
        _require_positive(spot_diameter_mm=self.spot_diameter_mm,
                          stem_diameter_mm=self.stem_diameter_mm,
                          pierce_time_s=self.pierce_time_s,
                          pierce_velocity_mm_s=self.pierce_velocity_mm_s,
                          pierce_constant_mm2_s=self.pierce_constant_mm2_s)


@dataclass(frozen=True)
class LateralCutRecord:
    """One oscillating-beam cutting measurement (averaged trials)."""

    spot_diameter_mm: float
    lateral_velocity_mm_s: float
    stem_diameter_mm: float
    cut_time_s: float
    cut_velocity_mm_s: float

    def __post_init__(self):
        _require_positive(spot_diameter_mm=self.spot_diameter_mm,
                          lateral_velocity_mm_s=self.lateral_velocity_mm_s,
                          stem_diameter_mm=self.stem_diameter_mm,
                          cut_time_s=self.cut_time_s,
                          cut_velocity_mm_s=self.cut_velocity_mm_s)


def pierce_velocity(stem_diameter_mm: float, pierce_time_s: float) -> float:
    """Stem diameter over pierce time, mm/s. Zero diameter gives zero."""
    if stem_diameter_mm < 0:
        raise ValidationError(f"stem diameter must be non-negative, got {stem_diameter_mm}")
    _require_positive(pierce_time_s=pierce_time_s)
    return stem_diameter_mm / pierce_time_s


def pierce_constant(pierce_velocity_mm_s: float, spot_diameter_mm: float) -> float:
    """Pierce velocity times spot diameter, mm^2/s. Zero velocity gives zero."""
    if pierce_velocity_mm_s < 0:
        raise ValidationError(
            f"pierce velocity must be non-negative, got {pierce_velocity_mm_s}")
    _require_positive(spot_diameter_mm=spot_diameter_mm)
    return pierce_velocity_mm_s * spot_diameter_mm


def interpolate_cp(spot_diameter_mm: float, records: Sequence[PierceRecord]) -> float:
    """Piecewise-linear pierce constant between calibrated knots.

    Records must be sorted by strictly ascending spot diameter. Queries
    outside the knot range raise :class:`DomainError` — the bench data sets
    no basis for extrapolation.
    """
    if not records:
        raise ValidationError("no pierce records to interpolate")
    knots = np.array([r.spot_diameter_mm for r in records])
    if len(knots) > 1 and not (np.diff(knots) > 0).all():
        raise ValidationError("pierce records must be sorted by ascending spot diameter")
    if not (knots[0] <= spot_diameter_mm <= knots[-1]):
        raise DomainError(
            f"spot diameter {spot_diameter_mm} mm outside calibrated range "
            f"[{knots[0]}, {knots[-1]}] mm")
    values = np.array([r.pierce_constant_mm2_s for r in records])
    return float(np.interp(spot_diameter_mm, knots, values))


@dataclass(frozen=True)
class CutModel:
    """Pierce-constant curve plus toughness and regime floor.

    ``records`` are re-sorted by ascending spot diameter at construction;
    ``toughness`` scales cut time (>1 for woodier stems), and ``v_l_min``
    is the slowest lateral beam speed the model will accept.
    """

    records: tuple[PierceRecord, ...]
    toughness: float = 1.0
    v_l_min: float = DEFAULT_V_L_MIN

    def __post_init__(self):
        if not self.records:
            raise ValidationError("cut model needs at least one pierce record")
        _require_positive(toughness=self.toughness, v_l_min=self.v_l_min)
        ordered = tuple(sorted(self.records, key=lambda r: r.spot_diameter_mm))
        diameters = [r.spot_diameter_mm for r in ordered]
        if len(set(diameters)) != len(diameters):
            raise ValidationError("duplicate spot diameters in pierce records")
        object.__setattr__(self, "records", ordered)

    def cp(self, spot_diameter_mm: float) -> float:
        """Interpolated pierce constant at the given spot diameter."""
        return interpolate_cp(spot_diameter_mm, self.records)


def cut_time(stem_diameter_mm: float, model: CutModel, spot_diameter_mm: float,
             lateral_velocity_mm_s: float) -> float:
    """Predicted time to sever a stem, in seconds.

    Insensitive to the lateral beam speed within the calibrated regime;
    speeds below ``model.v_l_min`` raise :class:`UnsupportedRegimeError`.
    """
    if stem_diameter_mm < 0:
        raise ValidationError(f"stem diameter must be non-negative, got {stem_diameter_mm}")
    if lateral_velocity_mm_s < model.v_l_min:
        raise UnsupportedRegimeError(
            f"lateral velocity {lateral_velocity_mm_s} mm/s below calibrated "
            f"minimum {model.v_l_min} mm/s")
    area = math.pi * (stem_diameter_mm / 2.0) ** 2
    return model.toughness * area / model.cp(spot_diameter_mm)


@dataclass(frozen=True)
class EtchState:
    """Progress of an in-flight cut, in stem cross-section area (mm^2)."""

    cut_area: float
    target_area: float
    severed: bool

    def __post_init__(self):
        if self.target_area <= 0:
            raise ValidationError("target area must be positive")
        if not 0.0 <= self.cut_area <= self.target_area:
            raise ValidationError("cut area must lie in [0, target_area]")
        if self.severed != (self.cut_area == self.target_area):
            raise ValidationError("severed flag inconsistent with cut area")

    @classmethod
    def for_stem(cls, stem_diameter_mm: float) -> "EtchState":
        _require_positive(stem_diameter_mm=stem_diameter_mm)
        return cls(0.0, math.pi * (stem_diameter_mm / 2.0) ** 2, False)


def etch_step(state: EtchState, dt: float, laser_on: bool, model: CutModel,
              spot_diameter_mm: float, lateral_velocity_mm_s: float) -> EtchState:
    """Advance a cut by one timestep.

    With the laser on and the lateral speed inside the calibrated regime,
    removed area grows at ``C_p(spot) / toughness`` per second, clamped at
    the target; any other condition leaves the state unchanged. Integrating
    the whole cut at a fixed dt therefore reaches severed within one step of
    :func:`cut_time`.
    """
    if state.severed or not laser_on or lateral_velocity_mm_s < model.v_l_min:
        return state
    rate = model.cp(spot_diameter_mm) / model.toughness  # mm^2/s removed
    area = min(state.target_area, state.cut_area + dt * rate)
    return EtchState(area, state.target_area, area == state.target_area)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # golden ratio step


def _golden_section_max(f: Callable[[float], float], lo: float, hi: float,
                        tol: float = 1e-4) -> float:
    """Abscissa of the maximum of a unimodal function on [lo, hi]."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def optimal_spot(records: Sequence[PierceRecord], lo_mm: float, hi_mm: float,
                 continuous: bool = False) -> float:
    """Spot diameter with the highest pierce constant in [lo_mm, hi_mm].

    The discrete default scans calibrated knots only — the honest choice,
    since between-knot values are interpolation artifacts — breaking ties
    toward the smaller diameter. ``continuous=True`` instead runs a
    golden-section search over the interpolated curve (exploration only).

    Raises
    ------
    ValidationError
        If the restriction is empty or no knot falls inside it.
    """
    if lo_mm > hi_mm:
        raise ValidationError(f"empty spot range [{lo_mm}, {hi_mm}]")
    ordered = sorted(records, key=lambda r: r.spot_diameter_mm)
    inside = [r for r in ordered if lo_mm <= r.spot_diameter_mm <= hi_mm]
    if not inside:
        raise ValidationError(
            f"no calibrated spot diameters inside [{lo_mm}, {hi_mm}] mm")
    if continuous:
        a = max(lo_mm, ordered[0].spot_diameter_mm)
        b = min(hi_mm, ordered[-1].spot_diameter_mm)
        return _golden_section_max(lambda x: interpolate_cp(x, ordered), a, b)
    best = inside[0]
    for rec in inside[1:]:
        if rec.pierce_constant_mm2_s > best.pierce_constant_mm2_s:
            best = rec
    return best.spot_diameter_mm


@dataclass(frozen=True)
class RowDeviation:
    """One audited quantity of one dataset row."""

    table: str
    row: int            # 1-based, in file order
    spot_diameter_mm: float
    column: str
    published: float
    recomputed: float

    @property
    def deviation(self) -> float:
        return abs(self.published - self.recomputed)

    def describe(self) -> str:
        return (f"{self.table} row {self.row} (spot {self.spot_diameter_mm} mm): "
                f"{self.column} published {self.published:g} "
                f"recomputed {self.recomputed:.4f} deviation {self.deviation:.4f}")


@dataclass(frozen=True)
class TableAudit:
    """Outcome of re-deriving every derived column of the datasets."""

    deviations: tuple[RowDeviation, ...]
    tolerance: float

    @property
    def max_deviation(self) -> float:
        return max((d.deviation for d in self.deviations), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def failures(self) -> list[RowDeviation]:
        return [d for d in self.deviations if d.deviation > self.tolerance]


def verify_tables(datasets: "Datasets", tolerance: float = 0.03) -> TableAudit:
    """Re-derive velocity and pierce-constant columns and compare.

    For each pierce row, recompute the pierce velocity from stem diameter
    and time, and the pierce constant from the published velocity and the
    spot diameter; for each lateral row, recompute the cut velocity.
    Published values carry rounding, so deviations up to ``tolerance``
    (default 0.03) are expected.
    """
    _require_positive(tolerance=tolerance)
    out: list[RowDeviation] = []
    for table, records in (("pierce-coarse", datasets.coarse),
                           ("pierce-fine", datasets.fine)):
        for i, r in enumerate(records, start=1):
            v = pierce_velocity(r.stem_diameter_mm, r.pierce_time_s)
            out.append(RowDeviation(table, i, r.spot_diameter_mm,
                                    "pierce_velocity_mm_s",
                                    r.pierce_velocity_mm_s, v))
            c = pierce_constant(r.pierce_velocity_mm_s, r.spot_diameter_mm)
            out.append(RowDeviation(table, i, r.spot_diameter_mm,
                                    "pierce_constant_mm2_s",
                                    r.pierce_constant_mm2_s, c))
    for i, r in enumerate(datasets.lateral, start=1):
        v = r.stem_diameter_mm / r.cut_time_s
        out.append(RowDeviation("lateral", i, r.spot_diameter_mm,
                                "cut_velocity_mm_s", r.cut_velocity_mm_s, v))
    return TableAudit(tuple(out), tolerance)
