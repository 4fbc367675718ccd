"""
Locating fruit in a two-camera point cloud
==========================================

Walks the localization pipeline one stage at a time on the bundled
eleven-fruit scene: transform both camera clouds into the machine base
frame, calibrate the target color on the palette patch, crop to the
workspace, keep the red points, merge, cluster, and box.

Run with::

    python3 demos/localization_walkthrough.py
"""

import numpy as np

from laserberry import load_scenario
from laserberry.geometry import transform_cloud
from laserberry.localization import (bounding_boxes, calibration_reference,
                                     euclidean_clusters, extract_window,
                                     filter_red, merge_clouds)
from laserberry.scenario import bundled_scenario_path
from laserberry.scene import generate_scene

scenario = load_scenario(bundled_scenario_path("demo_11"))
cloud1, cloud2, truth = generate_scene(scenario)
print(f"scene: {len(cloud1)} points from camera 1, {len(cloud2)} from camera 2")

# Each camera reports points in its own frame. The extrinsic poses move
# them into the shared base frame so the rest works in machine space.
base1 = transform_cloud(scenario.camera_1, cloud1, "harvester-base")
base2 = transform_cloud(scenario.camera_2, cloud2, "harvester-base")
merged = merge_clouds(base1, base2)

# Lighting drifts between runs, so the target color is not hardcoded:
# a painted palette patch at a known little volume gives the mean red to
# look for, per channel.
cfg = scenario.localization
palette = extract_window(merged, cfg.palette_window)
ref = calibration_reference(palette, cfg.r_th, cfg.g_th, cfg.b_th)
print(f"palette: {len(palette)} points, mean color "
      f"({ref.mean_r:.1f}, {ref.mean_g:.1f}, {ref.mean_b:.1f})")

# Crop to the tray volume, then keep points near the calibrated color.
workspace = extract_window(merged, cfg.reduced_window)
red = filter_red(workspace, ref)
print(f"workspace crop: {len(workspace)} points, red after color gate: {len(red)}")

# Euclidean clustering splits the red points into one group per fruit;
# groups outside the size band are noise and are dropped.
clusters = euclidean_clusters(red, cfg.cluster)
boxes = bounding_boxes(clusters)
print(f"clusters: {len(boxes)}")

# Compare with the generator's ground truth, pairing by pick order
# (ascending y, then x).
centers = truth.berry_centers
order = np.lexsort((centers[:, 0], centers[:, 1]))
print("\nrank   centroid (m)                 truth error   points")
for box, i in zip(boxes, order):
    c = box.centroid
    err = np.linalg.norm(c - centers[i]) * 1e3
    print(f"  {box.rank:2d}   ({c[0]:+.4f}, {c[1]:+.4f}, {c[2]:+.4f})"
          f"   {err:5.2f} mm     {box.point_count}")
