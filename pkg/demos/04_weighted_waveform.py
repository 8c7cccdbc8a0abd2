"""
Trading communication fidelity for a radar-friendly waveform
============================================================

The weighted design interpolates between the orthogonal radar reference
(rho = 0) and zero-forcing the users' symbols (rho = 1). Rates are
evaluated on the true channels after least-squares estimation.
"""

import numpy as np

from elaa_isac.geometry import build_upa
from elaa_isac.propagation import SourcePoint, build_channels
from elaa_isac.waveform import (
    achievable_rates,
    design_weighted_waveform,
    estimate_channels_ls,
    qpsk_symbols,
    reference_radar_waveform,
)

g = build_upa(7.8e9, 8)
N, K, L, P = g.n_antennas, 4, 64, 10.0
ues = [SourcePoint(r, np.deg2rad(az)) for r, az in [(3, -40), (4, -10), (5, 15), (6, 40)]]
H = build_channels(g, ues, reference_distance=3.0)
H_hat = estimate_channels_ls(H, K, 0.0, seed=1).matrix
S = qpsk_symbols(K, L, rng=2)
X0 = reference_radar_waveform(N, L, P)

for rho in (0.0, 0.2, 0.5, 0.8, 1.0):
    # per-element-normalized design channels, symbols at a quarter of the received power
    w = design_weighted_waveform(H_hat / np.sqrt(N), S.matrix * np.sqrt(0.25 * P), X0, rho, P)
    rep = achievable_rates(H, w, S, 1.0, tau_p=K, tau_c=L + K)
    dist = np.linalg.norm(w.matrix - X0.matrix) / np.linalg.norm(X0.matrix)
    print(f"rho {rho:.1f}: mean rate {rep.mean_rate:5.2f} bit/s/Hz, distance to reference {dist:.3f}")
