"""Functions that vanish at every sample point yet keep a large L2 norm.

No algorithm that only sees the samples can tell such an f from zero, so
its norm bounds the error of every method (including quadrature) from below.

Run: python3 demos/fooling_functions.py
"""

import math

import numpy as np

from samplerec.haar import HaarClassSpec, class_budget_ok, haar_adversary

spec = HaarClassSpec(beta=2.0, L_max=40, grid_level=20)
print("  n   ||f||_2     ||f|| sqrt(n) log n   max|f(x_i)|")
for n in (8, 16, 32, 64, 128):
    pts = np.random.default_rng(n).integers(0, 2 ** spec.grid_level, size=n)
    f = haar_adversary(spec, pts)
    scaled = f.l2_norm * math.sqrt(n) * math.log(n)
    print(f"{n:4d}  {f.l2_norm:.3e}   {scaled:.4f}              {f.max_abs_at_points:.1e}")
    assert class_budget_ok(spec, f)

# with log-log decay the error cannot go below one no matter how many points
spec = HaarClassSpec(variant="loglog", grid_level=20)
for n in (1, 2, 4):
    pts = np.random.default_rng(n).integers(0, 2 ** spec.grid_level, size=n)
    f = haar_adversary(spec, pts, epsilon=0.1)
    print(f"loglog n={n}: levels {f.L + 1}..{f.top}, lower bound {f.lower_bound:.4f}")
