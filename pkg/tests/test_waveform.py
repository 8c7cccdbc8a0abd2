import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elaa_isac.errors import (
    DegenerateChannelError,
    InfeasibleNullingError,
    InfeasibleOrthogonalityError,
    InvalidArgumentError,
    PilotContaminationError,
)
from elaa_isac.geometry import build_upa
from elaa_isac.propagation import (
    SourcePoint,
    build_channels,
    far_field_counterpart,
    far_field_steering,
    near_field_steering,
)
from elaa_isac.waveform import (
    IsacWaveform,
    achievable_rates,
    design_weighted_waveform,
    estimate_channels_ls,
    mrt_isac_waveform,
    mrt_waveform,
    mui_energy,
    null_projection,
    prelog_factor,
    project_null_constraints,
    qpsk_symbols,
    reference_radar_waveform,
    weighted_objective,
    weighted_solution,
    zadoff_chu,
)

from conftest import DEG, crandn


def gradient_descent(H, S, X0, rho, tol=1e-14, max_iter=200_000):
    """Plain fixed-step gradient descent on the weighted objective (oracle)."""
    lip = rho * np.linalg.norm(H, 2) ** 2 + (1 - rho)
    X = np.zeros_like(X0)
    for _ in range(max_iter):
        grad = rho * H.conj().T @ (H @ X - S) + (1 - rho) * (X - X0)
        step = grad / lip
        X = X - step
        if np.linalg.norm(step) < tol:
            break
    return X


def random_instance(rng):
    K = int(rng.integers(1, 4))
    N = int(rng.integers(K, 9))
    L = int(rng.integers(N, 17))
    return crandn(rng, K, N), crandn(rng, K, L), reference_radar_waveform(N, L, 2.0), float(rng.uniform(0.05, 0.95))


@pytest.mark.parametrize("seed", range(20))
def test_closed_form_matches_iterative_oracle(seed):
    H, S, ref, rho = random_instance(np.random.default_rng(seed))
    X, _ = weighted_solution(H, S, ref.matrix, rho)
    X_gd = gradient_descent(H, S, ref.matrix, rho)
    assert np.linalg.norm(X - X_gd) < 1e-6


def test_rho_half_on_2x8():
    rng = np.random.default_rng(5)
    H, S = crandn(rng, 2, 8), crandn(rng, 2, 12)
    X0 = reference_radar_waveform(8, 12).matrix
    X, _ = weighted_solution(H, S, X0, 0.5)
    assert np.linalg.norm(X - gradient_descent(H, S, X0, 0.5)) < 1e-6


def test_rho_zero_returns_reference():
    rng = np.random.default_rng(1)
    ref = reference_radar_waveform(8, 16, 3.0)
    w = design_weighted_waveform(crandn(rng, 3, 8), crandn(rng, 3, 16), ref, 0.0, 3.0)
    assert np.linalg.norm(w.matrix - ref.matrix) < 1e-9


def test_rho_one_zero_forces():
    rng = np.random.default_rng(2)
    H, S = crandn(rng, 3, 8), crandn(rng, 3, 16)
    w = design_weighted_waveform(H, S, reference_radar_waveform(8, 16), 1.0, 1.0)
    assert w.mui_energy < 1e-9
    assert not w.rank_deficient
    # power projection only rescales the zero-forcing solution
    np.testing.assert_allclose(H @ w.matrix / w.scale, S, atol=1e-9)


def test_rank_deficient_flagged():
    rng = np.random.default_rng(3)
    h = crandn(rng, 1, 6)
    H = np.vstack([h, 2 * h])
    w = design_weighted_waveform(H, crandn(rng, 2, 8), reference_radar_waveform(6, 8), 1.0, 1.0)
    assert w.rank_deficient


@pytest.mark.parametrize("seed", range(10))
def test_objective_not_above_endpoints(seed):
    H, S, ref, rho = random_instance(np.random.default_rng(100 + seed))
    X0 = ref.matrix
    X, _ = weighted_solution(H, S, X0, rho)
    X_zf, _ = weighted_solution(H, S, X0, 1.0)
    f = weighted_objective(H, X, S, X0, rho)
    assert f <= weighted_objective(H, X0, S, X0, rho) + 1e-12
    assert f <= weighted_objective(H, X_zf, S, X0, rho) + 1e-12


@given(rho=st.floats(0.0, 1.0), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_power_projection(rho, seed):
    H, S, ref, _ = random_instance(np.random.default_rng(seed))
    w = design_weighted_waveform(H, S, ref, rho, 2.0)
    assert w.energy() == pytest.approx(w.frame_length * 2.0, rel=1e-9)


def test_design_argument_checks():
    rng = np.random.default_rng(4)
    ref = reference_radar_waveform(4, 8)
    with pytest.raises(InvalidArgumentError):
        design_weighted_waveform(crandn(rng, 2, 4), crandn(rng, 2, 8), ref, 1.5, 1.0)
    with pytest.raises(InvalidArgumentError):
        design_weighted_waveform(crandn(rng, 5, 4), crandn(rng, 5, 8), ref, 0.5, 1.0)
    with pytest.raises(InvalidArgumentError):
        design_weighted_waveform(crandn(rng, 2, 4), crandn(rng, 2, 9), ref, 0.5, 1.0)


def test_reference_orthogonal_and_constant_modulus():
    X0 = reference_radar_waveform(4, 16, 2.0).matrix
    assert np.linalg.norm(X0 @ X0.conj().T - (16 * 2.0 / 4) * np.eye(4)) < 1e-9
    assert np.ptp(np.abs(X0)) < 1e-12
    with pytest.raises(InfeasibleOrthogonalityError):
        reference_radar_waveform(17, 16)


@pytest.mark.parametrize("L", [16, 17, 196, 961])
def test_reference_row_sidelobes(L):
    X0 = reference_radar_waveform(3, L).matrix
    for row in X0:
        ac = np.array([abs(np.vdot(row[: L - k], row[k:])) for k in range(L)])
        assert ac[1:].max() < ac[0] / math.sqrt(L)


def test_zadoff_chu_periodic_autocorrelation():
    z = zadoff_chu(196)
    pac = np.array([abs(np.vdot(z, np.roll(z, k))) for k in range(1, 196)])
    assert pac.max() < 1e-10
    with pytest.raises(InvalidArgumentError):
        zadoff_chu(196, root=2)


def test_qpsk_unit_power():
    s = qpsk_symbols(6, 4096, 7).matrix
    assert np.mean(np.abs(s) ** 2) == pytest.approx(1.0, rel=1e-12)
    assert np.array_equal(s, qpsk_symbols(6, 4096, 7).matrix)


def test_single_user_mrt_sinr():
    rng = np.random.default_rng(8)
    h = crandn(rng, 1, 16)
    s = qpsk_symbols(1, 64, 9)
    P, sigma2 = 10.0, 0.5
    w = mrt_waveform(h, s, P)
    rep = achievable_rates(h, w, s, sigma2, 1, 196)
    assert rep.sinr[0] == pytest.approx(P * np.linalg.norm(h) ** 2 / sigma2, rel=1e-12)


def test_single_user_mrt_maximizes_received_power():
    rng = np.random.default_rng(10)
    h = crandn(rng, 16)
    best = abs(h @ (h.conj() / np.linalg.norm(h))) ** 2
    for _ in range(200):
        v = crandn(rng, 16)
        assert abs(h @ (v / np.linalg.norm(v))) ** 2 <= best + 1e-12


def test_mrt_degenerate_row():
    with pytest.raises(DegenerateChannelError):
        mrt_waveform(np.zeros((1, 4)), qpsk_symbols(1, 8, 0), 1.0)


def test_mrt_isac_endpoints():
    rng = np.random.default_rng(11)
    H, s = crandn(rng, 2, 8), qpsk_symbols(2, 16, 1)
    ref = reference_radar_waveform(8, 16, 3.0)
    np.testing.assert_allclose(mrt_isac_waveform(H, s, ref, 0.0).matrix, ref.matrix, atol=1e-12)
    np.testing.assert_allclose(mrt_isac_waveform(H, s, ref, 1.0).matrix, mrt_waveform(H, s, 3.0).matrix,
                               atol=1e-12)


def test_far_field_beam_loses_gain_in_near_field(scenario, tradeoff_array):
    g = tradeoff_array(7.8e9)
    nf = build_channels(g, scenario.ue_points(4))
    ff = far_field_counterpart(nf, g)
    for h, h_ff in zip(nf.matrix, ff.matrix):
        v5 = h.conj() / np.linalg.norm(h)
        v6 = h_ff.conj() / np.linalg.norm(h_ff)
        assert abs(h @ v6) ** 2 / abs(h @ v5) ** 2 < 1.0


def test_null_projection():
    rng = np.random.default_rng(12)
    g = build_upa(7.8e9, 6)
    N, L = g.n_antennas, 48
    w = IsacWaveform(reference_radar_waveform(N, L, 1.0).matrix + 0.3 * crandn(rng, N, L), 1.0)
    w = IsacWaveform(w.matrix * math.sqrt(L / w.energy()), 1.0)
    assert project_null_constraints(w, []) is w

    cpes = [far_field_steering(g, 30 * DEG, 10 * DEG), near_field_steering(g, SourcePoint(20.0, -0.5))]
    out = project_null_constraints(w, cpes)
    assert out.energy() == pytest.approx(L, rel=1e-9)
    for a in cpes:
        leak = np.abs(a.entries.conj() @ out.matrix) ** 2
        assert np.all(leak < 1e-18 * np.sum(np.abs(out.matrix) ** 2, axis=0))

    # MUI grows once the nulls take part of the beam
    H = build_channels(g, [SourcePoint(30.0, 28 * DEG, 8 * DEG)]).matrix
    S = qpsk_symbols(1, L, 3)
    zf = design_weighted_waveform(H, S, reference_radar_waveform(N, L), 1.0, 1.0)
    nulled = project_null_constraints(zf, cpes[:1])
    assert mui_energy(H, nulled.matrix / nulled.scale, S) > mui_energy(H, zf.matrix / zf.scale, S)


def test_null_of_own_beam_is_infeasible():
    g = build_upa(7.8e9, 4)
    a = far_field_steering(g, 0.0, 0.0)
    X = np.outer(a.entries, np.ones(8))
    assert np.linalg.norm(null_projection(X, [a])) < 1e-12
    with pytest.raises(InfeasibleNullingError):
        project_null_constraints(IsacWaveform(X * math.sqrt(8 / np.vdot(X, X).real), 1.0), [a])
    full = [np.eye(2)[:, i] for i in range(2)]
    with pytest.raises(InfeasibleNullingError):
        null_projection(np.ones((2, 3)), full)


def test_ls_estimate_noiseless_limit_and_determinism():
    rng = np.random.default_rng(13)
    H = crandn(rng, 4, 12)
    est = estimate_channels_ls(H, 4, 200.0, 1)
    assert np.max(np.abs(est.matrix - H)) < 1e-8
    a = estimate_channels_ls(H, 4, 0.0, 99).matrix
    assert np.array_equal(a, estimate_channels_ls(H, 4, 0.0, 99).matrix)
    with pytest.raises(PilotContaminationError):
        estimate_channels_ls(H, 3, 0.0, 1)


def test_ls_error_variance():
    H = build_channels(build_upa(7.8e9, 3), [SourcePoint(30.0 + 10 * k, 0.3 * k) for k in range(4)]).matrix
    err = np.array([np.mean(np.abs(estimate_channels_ls(H, 4, 0.0, sd).matrix - H) ** 2)
                    for sd in range(10_000)])
    assert err.mean() == pytest.approx(1 / 4, rel=0.05)
    assert estimate_channels_ls(H, 4, 0.0, 0).error_variance == 0.25


def test_prelog_and_rate_identity():
    assert prelog_factor(4, 196) == 1 - 4 / 196
    assert prelog_factor(4, 196) == pytest.approx(0.9796, abs=5e-5)
    with pytest.raises(InvalidArgumentError):
        prelog_factor(197, 196)
    rng = np.random.default_rng(14)
    H, s = crandn(rng, 3, 8), qpsk_symbols(3, 16, 2)
    w = design_weighted_waveform(H, s.matrix, reference_radar_waveform(8, 16), 0.6, 1.0)
    rep = achievable_rates(H, w, s, 1.0, 3, 196)
    np.testing.assert_allclose(rep.per_user_rate, rep.prelog * np.log2(1 + rep.sinr), rtol=1e-12)
    assert rep.sum_rate == pytest.approx(3 * rep.mean_rate)


def test_noiseless_zero_forcing_rate_capped():
    rng = np.random.default_rng(15)
    H, s = crandn(rng, 2, 8), qpsk_symbols(2, 16, 4)
    w = design_weighted_waveform(H, s.matrix, reference_radar_waveform(8, 16), 1.0, 1.0)
    rep = achievable_rates(H, w, s, 0.0, 2, 196)
    assert rep.capped
    np.testing.assert_allclose(rep.per_user_rate, rep.prelog * np.log2(1 + 1e15))
    noisy = achievable_rates(H, w, s, 1.0, 2, 196)
    assert not noisy.capped
    # no MUI, so the SINR is the scaled symbol energy over the noise
    np.testing.assert_allclose(noisy.sinr, w.scale**2, rtol=1e-9)
