"""Loading of the embedded stem-cutting calibration datasets.

Three CSV files ship with the package: a coarse and a fine stationary-beam
piercing sweep over spot diameter, and a lateral beam-speed sweep. Headers
are fixed; lines starting with ``#`` are comments.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ValidationError
from .laser import LateralCutRecord, PierceRecord

PIERCE_HEADER = ["spot_diameter_mm", "stem_diameter_mm", "pierce_time_s",
                 "pierce_velocity_mm_s", "pierce_constant_mm2_s"]
LATERAL_HEADER = ["spot_diameter_mm", "lateral_velocity_mm_s", "stem_diameter_mm",
                  "cut_time_s", "cut_velocity_mm_s"]


@dataclass(frozen=True)
class Datasets:
    """The three embedded calibration tables."""

    lateral: tuple[LateralCutRecord, ...]
    coarse: tuple[PierceRecord, ...]
    fine: tuple[PierceRecord, ...]


def _read_rows(text: str, header: list[str], source: str) -> list[list[float]]:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(io.StringIO("\n".join(lines)))
    rows = list(reader)
    if not rows:
        raise ValidationError(f"{source}: empty dataset")
    got = [h.strip() for h in rows[0]]
    if got != header:
        raise ValidationError(f"{source}: bad header {got}, expected {header}")
    out = []
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise ValidationError(f"{source} row {i}: expected {len(header)} fields, got {len(row)}")
        try:
            out.append([float(v) for v in row])
        except ValueError as exc:
            raise ValidationError(f"{source} row {i}: {exc}") from exc
    return out


def _pierce_records(text: str, source: str) -> tuple[PierceRecord, ...]:
    records = []
    for i, row in enumerate(_read_rows(text, PIERCE_HEADER, source), start=1):
        try:
            records.append(PierceRecord(*row))
        except ValidationError as exc:
            raise ValidationError(f"{source} row {i}: {exc}") from exc
    return tuple(records)


def _lateral_records(text: str, source: str) -> tuple[LateralCutRecord, ...]:
    records = []
    for i, row in enumerate(_read_rows(text, LATERAL_HEADER, source), start=1):
        try:
            records.append(LateralCutRecord(*row))
        except ValidationError as exc:
            raise ValidationError(f"{source} row {i}: {exc}") from exc
    return tuple(records)


def load_pierce_csv(path: str | Path) -> tuple[PierceRecord, ...]:
    """Parse a piercing-sweep CSV from an arbitrary path."""
    path = Path(path)
    return _pierce_records(path.read_text(), path.name)


def load_lateral_csv(path: str | Path) -> tuple[LateralCutRecord, ...]:
    """Parse a lateral-sweep CSV from an arbitrary path."""
    path = Path(path)
    return _lateral_records(path.read_text(), path.name)


def _embedded(name: str) -> str:
    return (resources.files("laserberry") / "data" / name).read_text()


def load_datasets() -> Datasets:
    """Load the three embedded calibration tables."""
    return Datasets(
        lateral=_lateral_records(_embedded("lateral_velocity.csv"), "lateral_velocity.csv"),
        coarse=_pierce_records(_embedded("pierce_coarse.csv"), "pierce_coarse.csv"),
        fine=_pierce_records(_embedded("pierce_fine.csv"), "pierce_fine.csv"),
    )
