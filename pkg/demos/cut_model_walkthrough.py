"""
From bench tables to a stem cutting model
=========================================

Shows how the three embedded bench tables become a predictive model:
audit the derived columns, find the most productive spot diameter, and
predict severing times for the stem sizes the rig actually sees.

Run with::

    python3 demos/cut_model_walkthrough.py
"""

import numpy as np

from laserberry import (CutModel, cut_time, load_datasets, optimal_spot,
                        verify_tables)

datasets = load_datasets()

# The published tables carry derived columns (velocities, pierce
# constants) next to raw measurements. Re-deriving them catches typos
# before they become model error; rounding keeps deviations below 0.03.
audit = verify_tables(datasets)
print(f"table audit: {len(audit.deviations)} derived values, "
      f"max deviation {audit.max_deviation:.4f} "
      f"-> {'PASS' if audit.passed else 'FAIL'}")

# The pierce constant C_p = v * spot diameter is the area removal rate.
# The coarse sweep brackets the productive band; the fine sweep pins it.
print("\nfine sweep (spot mm -> C_p mm^2/s):")
for r in sorted(datasets.fine, key=lambda r: r.spot_diameter_mm):
    bar = "#" * int(r.pierce_constant_mm2_s * 30)
    print(f"  {r.spot_diameter_mm:4.2f}  {r.pierce_constant_mm2_s:5.2f}  {bar}")

best_coarse = optimal_spot(datasets.coarse, 0.09, 3.79)
best_fine = optimal_spot(datasets.fine, 0.5, 1.1)
print(f"\ncoarse sweep optimum: {best_coarse} mm; fine sweep optimum: "
      f"{best_fine} mm (the production setting)")

# Severing time scales with stem cross-section over C_p. At the 0.9 mm
# spot, a typical 2.2 mm stem takes about 2.8 s, matching the measured
# cut share of a harvest cycle.
model = CutModel(records=datasets.fine, toughness=1.0)
print("\npredicted severing times at the 0.9 mm spot:")
for stem in np.arange(2.0, 2.45, 0.1):
    t = cut_time(float(stem), model, best_fine, 50.0)
    print(f"  stem {stem:.1f} mm -> {t:.2f} s")

mean = np.mean([cut_time(float(s), model, best_fine, 50.0)
                for s in np.linspace(2.0, 2.4, 201)])
print(f"\nmean over the 2.0-2.4 mm stem population: {mean:.2f} s "
      f"(bench mean 2.88 s)")
