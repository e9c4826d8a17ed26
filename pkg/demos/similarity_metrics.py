"""Score a predicted trajectory against a reference with the metric suite.

A cosine arc is compared against a noisy, slightly shifted version of
itself and against a straight chord. Lower is better for everything
except the coverage rows.

Run: python3 demos/similarity_metrics.py
"""

import numpy as np

import trajkit as tk

rng = np.random.default_rng(11)
s = np.linspace(0.0, 1.0, 60)
reference = np.stack([s, 0.2 * np.sin(np.pi * s)], axis=1)

noisy = reference + rng.normal(scale=0.006, size=reference.shape) + [0.01, 0.0]
chord = np.stack([s, np.zeros_like(s)], axis=1)

print(f"{'metric':18s} {'noisy copy':>12s} {'straight chord':>15s}")
near = tk.full_report(noisy, reference, tau=0.05).as_dict()
far = tk.full_report(chord, reference, tau=0.05).as_dict()
for name in tk.REPORT_ROW_NAMES:
    print(f"{name:18s} {near[name]:12.4f} {far[name]:15.4f}")
print(f"\nconfig echoed with the report: {near['config']}")

# the DP metrics agree with their definitions on degenerate inputs
p = np.array([[0.0, 0.0]])
q = np.array([[3.0, 4.0]])
print(f"\nsingle-point sanity: dtw = {tk.dtw(p, q)}, "
      f"frechet = {tk.discrete_frechet(p, q)}, hausdorff = {tk.hausdorff(p, q)}")
