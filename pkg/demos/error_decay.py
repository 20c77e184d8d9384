"""How the worst-case error falls with m, next to the width sigma_m.

Run: python3 demos/error_decay.py
"""

import numpy as np

from samplerec import fourier_sobolev, rate_fit
from samplerec.harness import SCHEMA, run_cell

cfg = {k: v[1] for k, v in SCHEMA.items()}
model = fourier_sobolev(alpha=1.0, M=256, grid_size=512)
ms = [4, 8, 16, 32]
medians = []
print(" m   |J|   g_ls     g_spline  sigma_m  bound_main")
for m in ms:
    rows = [run_cell(model, cfg, m, seed)[0] for seed in range(3)]
    g = np.median([r.g_emp_ls for r in rows])
    medians.append(g)
    r = rows[0]
    print(f"{m:3d} {r.n_sub:4d}  {g:.5f}  {r.g_emp_spline:.5f}  {r.d_m:.5f}  {r.bound_main:.5f}")

fit = rate_fit(ms, medians)
print(f"log-log slope {fit.slope:.3f}; the widths decay like m^-1")
