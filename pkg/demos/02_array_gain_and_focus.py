"""
Array gain and depth of focus
=============================

Close to a large array the spherical wavefront makes the per-element
amplitudes uneven, so the normalized array gain drops below one. Range
focusing shows up as a correlation that falls and recovers as a second
point moves along the line of sight.
"""

import numpy as np

from elaa_isac.analytics import (
    array_gain_curve,
    correlation_range_sweep,
    local_maxima,
    steering_correlation,
)
from elaa_isac.geometry import build_upa_fixed_aperture, fraunhofer_distance
from elaa_isac.propagation import SourcePoint

# %%
# Gain against distance for the 7.8 GHz array.
g = build_upa_fixed_aperture(7.8e9, 1.243)
d_fa = fraunhofer_distance(g)
for p in array_gain_curve(g, [0.5, 1.0, 3.0, d_fa, 100 * d_fa]):
    print(f"{p.abscissa:9.2f} m  gain {p.value:.4f}  ({p.db:6.2f} dB)")

# %%
# Correlation with a UE fixed at 30 m, 15 GHz.
g15 = build_upa_fixed_aperture(15e9, 1.243)
anchor = SourcePoint(30.0)
curve = correlation_range_sweep(g15, anchor, np.linspace(1.0, 60.0, 600))
c = np.array([p.value for p in curve])
r = np.array([p.abscissa for p in curve])
print("maxima at", np.round(r[local_maxima(c)], 2), "m")
print("30 m vs 31 m:", steering_correlation(g15, anchor, SourcePoint(31.0)))
