"""Optimistic AO-GD next to diagonal AdaGrad on linear losses.

Prints realized regret and the bound each method certifies. On a constant
gradient the optimistic bound stops growing after the first round; on a
slowly drifting gradient it stays far below AdaGrad's worst-case bound,
while realized regret is often identical (both sit on the same vertex).
"""

import numpy as np

from aoftrl import AOGD, Hyperrectangle, LastGradient, run_online
from aoftrl.harness.baselines import run_baseline
from aoftrl.harness.streams import FixedLinear, SlowlyVaryingLinear, generate_stream

box = Hyperrectangle.cube(5)

print("constant gradient, regret by horizon")
for T in (100, 1_000, 10_000):
    stream = generate_stream(FixedLinear((0.3, -0.2, 0.5, -0.1, 0.4)), 0, T, box)
    rep = run_online(stream, box, LastGradient(), AOGD(), T)
    print(f"  T={T:>6}  AO-GD regret={rep.regret:.6f}  corollary bound={rep.bounds['aogd']:.3f}")

print("\nslow drift (sigma=1e-3, T=5000), five seeds")
for seed in range(5):
    stream = generate_stream(SlowlyVaryingLinear(0.001), seed, 5_000, box)
    ao = run_online(stream, box, LastGradient(), AOGD(), 5_000)
    ada = run_baseline("adagrad", stream, box, 5_000)
    print(f"  seed {seed}: AO-GD {ao.regret:8.3f} (bound {ao.bounds['aogd']:7.2f})   "
          f"AdaGrad {ada.regret:8.3f}")
