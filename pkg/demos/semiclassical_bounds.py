"""Eigenvalue sums of -Laplacian - V against their semiclassical value.

For a few Gaussian wells of growing depth the exact sum of negative
eigenvalues lies between the (loose) coherent-state bounds, and the ratio to
the phase-space integral tends to one.
"""
import numpy as np

from hfatom.grid import RadialGrid, sample
from hfatom.semiclassics import check_semiclassical_bounds

grid = RadialGrid.log(1e-6, 60.0, 4000)
print("  depth      lower        exact        upper   exact/semi")
for c in (5.0, 20.0, 80.0, 320.0):
    V = sample(grid, lambda r: c * np.exp(-(r / 2) ** 2), "potential")
    rep = check_semiclassical_bounds(V, f"gauss{c:g}")
    print(f"{c:7g} {rep.lower:10.4g} {rep.e_exact:12.6g} {rep.upper:12.4g} {rep.e_exact / rep.e_semi:10.4f}")
