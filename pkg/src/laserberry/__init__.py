"""Software twin of a table-top laser stem-cutting strawberry harvester.

Three layers, importable separately:

* perception — point clouds, rigid transforms, kd-tree radius search,
  color-window filtering and Euclidean clustering (:mod:`geometry`,
  :mod:`localization`, :mod:`pcdio`);
* laser — calibrated pierce/cut model, spot-diameter optimization and
  calibration-table audit (:mod:`laser`, :mod:`datasets`);
* machine — gantry kinematics, lens/trapper/interrupter peripherals and
  the harvest-cycle state machine (:mod:`gantry`, :mod:`controller`).

Scenario files tie the layers together (:mod:`scenario`, :mod:`scene`,
:mod:`pipeline`); the ``laserberry`` CLI fronts the common runs.
"""

from .controller import (CycleMetrics, CycleRecord, HarvestConfig,
                         HarvestPhase, plan_approach, run_cycle, run_demo)
from .datasets import Datasets, load_datasets, load_lateral_csv, load_pierce_csv
from .errors import (CalibrationError, DomainError, MotionError,
                     PcdParseError, ScenarioError, UnsupportedRegimeError,
                     ValidationError)
from .gantry import GantryConfig, GantrySim, MotionProfile
from .geometry import (Aabb, ColoredPoint, KdTree, PointCloud,
                       RigidTransform, build_kdtree, radius_search,
                       transform_cloud)
from .laser import (CutModel, EtchState, LateralCutRecord, PierceRecord,
                    TableAudit, cut_time, etch_step, interpolate_cp,
                    optimal_spot, pierce_constant, pierce_velocity,
                    verify_tables)
from .localization import (BerryBox, ClusterParams, ColorReference,
                           LocalizationConfig, SpatialWindow,
                           bounding_boxes, calibration_reference,
                           euclidean_clusters, extract_window, filter_red,
                           localize, localize_clusters, merge_clouds)
from .pcdio import read_pcd, write_pcd
from .pipeline import (SimulationResult, cut_model_for, harvest_config_for,
                       localize_scenario, simulate_scenario)
from .scenario import (BerrySpec, Scenario, bundled_scenario_path,
                       load_scenario)
from .scene import SceneTruth, apply_color_gain, generate_scene, make_world

__version__ = "0.1.0"

__all__ = [
    "Aabb", "BerryBox", "BerrySpec", "CalibrationError", "ClusterParams",
    "ColorReference", "ColoredPoint", "CutModel", "CycleMetrics",
    "CycleRecord", "Datasets", "DomainError", "EtchState", "GantryConfig",
    "GantrySim", "HarvestConfig", "HarvestPhase", "KdTree",
    "LateralCutRecord", "LocalizationConfig", "MotionError", "MotionProfile",
    "PcdParseError", "PierceRecord", "PointCloud", "RigidTransform",
    "Scenario", "ScenarioError", "SceneTruth", "SimulationResult",
    "SpatialWindow", "TableAudit", "UnsupportedRegimeError",
    "ValidationError", "apply_color_gain", "bounding_boxes", "build_kdtree",
    "bundled_scenario_path", "calibration_reference", "cut_model_for",
    "cut_time", "etch_step", "euclidean_clusters", "extract_window",
    "filter_red", "generate_scene", "harvest_config_for", "interpolate_cp",
    "load_datasets", "load_lateral_csv", "load_pierce_csv", "load_scenario",
    "localize", "localize_clusters", "localize_scenario", "make_world",
    "merge_clouds", "optimal_spot", "pierce_constant", "pierce_velocity",
    "plan_approach", "radius_search", "read_pcd", "run_cycle", "run_demo",
    "simulate_scenario", "transform_cloud", "verify_tables", "write_pcd",
]
