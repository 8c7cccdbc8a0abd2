"""
Rate against detection probability
==================================

The packaged scenario reduced to its smallest carrier (N = 400) so it runs in seconds.
``elaa-isac-sim tradeoff`` runs the full grid and writes the same tables.
"""

from elaa_isac.runner import tradeoff_sweep
from elaa_isac.runner.config import scenario_from_mapping

s = scenario_from_mapping(dict(carrier_frequencies=[3.5e9], side_counts=[20], mrt_frequency=3.5e9,
                               trials=2000, csi_realizations=2, rho_grid=[0.1, 0.3, 0.5, 0.7, 0.9]))
res = tradeoff_sweep(s)
for label, curve in res.curves.items():
    print(label)
    for row in curve.rows:
        print(f"   rho {row.rho:.1f}  rate {row.per_user_rate:6.3f}  P_D {row.pd.p_hat:.3f}")
print(res.manifest.to_csv())
