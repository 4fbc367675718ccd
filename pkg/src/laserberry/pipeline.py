"""End-to-end scenario runs shared by the CLI, the demos, and the tests."""

from __future__ import annotations

from dataclasses import dataclass

from .controller import CycleMetrics, HarvestConfig, run_demo
from .datasets import load_datasets
from .gantry import GantrySim
from .laser import CutModel
from .localization import BerryBox, localize
from .scenario import Scenario
from .scene import SceneTruth, generate_scene, make_world


def cut_model_for(scenario: Scenario) -> CutModel:
    """The cut model a scenario asks for (fine or coarse pierce sweep)."""
    ds = load_datasets()
    records = ds.fine if scenario.laser.dataset == "fine" else ds.coarse
    return CutModel(records, toughness=scenario.laser.toughness)


def harvest_config_for(scenario: Scenario) -> HarvestConfig:
    return HarvestConfig(
        spot_diameter_mm=scenario.laser.spot_diameter_mm,
        lateral_velocity_mm_s=scenario.laser.lateral_velocity_mm_s,
        dt_s=scenario.demo.dt_s,
        cut_timeout_s=scenario.demo.cut_timeout_s,
        fall_timeout_s=scenario.demo.fall_timeout_s,
    )


@dataclass(frozen=True)
class SimulationResult:
    """Everything a full scenario run produces."""

    boxes: list[BerryBox]
    metrics: CycleMetrics
    truth: SceneTruth


def localize_scenario(scenario: Scenario) -> tuple[list[BerryBox], SceneTruth]:
    """Generate the scenario's scene and localize it."""
    cloud1, cloud2, truth = generate_scene(scenario)
    boxes = localize(cloud1, cloud2, scenario.camera_1, scenario.camera_2,
                     scenario.localization)
    return boxes, truth


def simulate_scenario(scenario: Scenario,
                      boxes: list[BerryBox] | None = None) -> SimulationResult:
    """Generate, localize, and harvest a scenario.

    ``boxes`` may be supplied to harvest from externally perturbed
    localizations (robustness studies); by default the scenario's own
    scene is localized.
    """
    cloud1, cloud2, truth = generate_scene(scenario)
    if boxes is None:
        boxes = localize(cloud1, cloud2, scenario.camera_1, scenario.camera_2,
                         scenario.localization)
    sim = GantrySim(scenario.gantry)
    world = make_world(truth)
    metrics = run_demo(sim, world, boxes, cut_model_for(scenario),
                       harvest_config_for(scenario))
    return SimulationResult(boxes=boxes, metrics=metrics, truth=truth)
