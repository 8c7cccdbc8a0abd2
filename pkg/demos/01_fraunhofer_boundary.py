"""
Where does the near field end?
==============================

A square array of fixed physical size keeps the same aperture at every
carrier, so its Fraunhofer distance grows with frequency. Counting elements
instead (fixed half-wavelength spacing) gives a boundary linear in N.
"""

import numpy as np

from elaa_isac.geometry import (
    build_upa_fixed_aperture,
    fraunhofer_distance,
    fraunhofer_element_formula,
    wavelength_of,
)

# %%
# A 1.243 m aperture at three carriers.
for f in (3.5e9, 7.8e9, 15e9):
    g = build_upa_fixed_aperture(f, 1.243)
    print(f"{f / 1e9:5.1f} GHz  {g.side_count:4d} x {g.side_count:<4d} elements  "
          f"d_FA = {fraunhofer_distance(g):7.2f} m")

# %%
# Element-count boundary: doubling N doubles the distance.
lam = wavelength_of(7.8e9)
d_a = lam / 2
for n in (100, 200, 400, 800):
    print(f"N = {n:4d}  d_FA = {fraunhofer_element_formula(n, d_a, lam):6.2f} m")

# %%
# The same element count at a higher carrier reaches a shorter distance.
print(np.round([fraunhofer_element_formula(961, lam / 2, wavelength_of(f)) for f in (7.8e9, 15e9)], 2))
