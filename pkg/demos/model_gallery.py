"""Singular value profiles of the tensor-product and surrogate models.

Run: python3 demos/model_gallery.py
"""

import numpy as np

from samplerec import surrogate_rkhs, tensor_product_model
from samplerec.spectral import DomainGrid
from samplerec.zoo import haar_level_spaces, sobolev_sigma

base = sobolev_sigma(np.arange(128), 1.0)
for d in (1, 2, 3):
    model = tensor_product_model(base, d, 128)
    print(f"d={d}: sigma_10 = {model.sigma[10]:.4f}, sigma_100 = {model.sigma[100]:.5f}, "
          f"grid {model.grid.size} nodes")

# nested Haar level spaces give an orthonormal system adapted to the class
G = 6
grid = DomainGrid.uniform(2 ** G)
spaces = haar_level_spaces(G, G + 1)
for profile in ("poly", "boundary"):
    model = surrogate_rkhs(spaces, grid, alpha=0.7, p=1.0, profile=profile)
    print(f"surrogate ({profile}): first sigmas {np.round(model.sigma[:5], 4)}, "
          f"orthonormality defect {model.orthonormality_defect():.1e}")
