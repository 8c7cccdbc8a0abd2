"""
ISAC transmit waveform design, uplink channel estimation and achievable rates.

Conventions: the downlink channel ``H`` is K x N with ``y = H x + n``; a
transmit block ``X`` is N x L and carries per-slot power ``P`` so that
``||X||_F**2 == L * P``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateChannelError,
    InfeasibleNullingError,
    InfeasibleOrthogonalityError,
    InvalidArgumentError,
    PilotContaminationError,
)

#: SINR substituted when both interference and noise vanish.
SINR_CAP = 1e15


def _as_matrix(obj):
    m = getattr(obj, "matrix", obj)
    return np.asarray(m)


@dataclass(frozen=True, eq=False)
class SymbolBlock:
    matrix: np.ndarray  # K x L

    @property
    def n_users(self):
        return self.matrix.shape[0]

    @property
    def frame_length(self):
        return self.matrix.shape[1]


def qpsk_symbols(n_users, frame_length, rng=None, amplitude=1.0):
    """Random QPSK block with per-entry power ``amplitude**2``."""
    rng = np.random.default_rng(rng)
    bits = rng.integers(0, 2, size=(2, n_users, frame_length))
    s = ((2 * bits[0] - 1) + 1j * (2 * bits[1] - 1)) / math.sqrt(2.0)
    return SymbolBlock(amplitude * s)


@dataclass(frozen=True, eq=False)
class IsacWaveform:
    """
    N x L transmit block.

    ``scale`` is the factor applied by the final power projection and
    ``mui_energy`` the design residual ``||H X - S||_F**2`` before it (both
    only set by the designers that have them).
    """

    matrix: np.ndarray
    total_power: float
    scale: float = 1.0
    mui_energy: float | None = None
    rank_deficient: bool = False

    @property
    def n_antennas(self):
        return self.matrix.shape[0]

    @property
    def frame_length(self):
        return self.matrix.shape[1]

    def energy(self):
        return float(np.vdot(self.matrix, self.matrix).real)


def _project_power(X, power):
    energy = float(np.vdot(X, X).real)
    if energy <= 0.0:
        raise InvalidArgumentError("cannot scale an all-zero waveform to the power budget")
    scale = math.sqrt(X.shape[1] * power / energy)
    return X * scale, scale


def zadoff_chu(length, root=1):
    """Zadoff-Chu sequence; constant modulus with zero periodic autocorrelation sidelobes."""
    if math.gcd(root, length) != 1:
        raise InvalidArgumentError("root must be coprime with the length")
    n = np.arange(length)
    if length % 2:
        return np.exp(-1j * math.pi * root * n * (n + 1) / length)
    return np.exp(-1j * math.pi * root * n * n / length)


def reference_radar_waveform(n_antennas, frame_length, power=1.0):
    """Orthogonal constant-modulus reference: row i is the ZC sequence cyclically shifted by i.

    ``X0 @ X0^H == (L P / N) I``.
    """
    if n_antennas < 1:
        raise InvalidArgumentError("n_antennas must be >= 1")
    if frame_length < n_antennas:
        raise InfeasibleOrthogonalityError(
            f"frame length {frame_length} < {n_antennas} antennas: rows cannot be orthogonal"
        )
    base = zadoff_chu(frame_length)
    idx = (np.arange(frame_length)[None, :] - np.arange(n_antennas)[:, None]) % frame_length
    X0 = math.sqrt(power / n_antennas) * base[idx]
    return IsacWaveform(X0, float(power))


def weighted_objective(H, X, S, X0, rho):
    """``rho ||H X - S||^2 + (1 - rho) ||X - X0||^2``."""
    r1 = H @ X - S
    r2 = X - X0
    return float(rho * np.vdot(r1, r1).real + (1.0 - rho) * np.vdot(r2, r2).real)


def weighted_solution(H, S, X0, rho):
    """
    Unconstrained minimizer of :func:`weighted_objective`.

    Uses the K x K push-through form of ``(rho H^H H + (1-rho) I)^-1`` so the
    cost does not grow with N**3. At ``rho == 1`` the minimum-norm
    least-squares solution is returned.

    Returns
    -------
    X : np.ndarray
    rank_deficient : bool
    """
    H = np.asarray(H)
    K = H.shape[0]
    if rho == 0.0:
        return np.array(X0, dtype=complex), False
    rank = np.linalg.matrix_rank(H)
    deficient = rank < K
    if rho == 1.0:
        X, *_ = np.linalg.lstsq(H, S, rcond=None)
        return X, deficient
    mu = 1.0 - rho
    B = rho * (H.conj().T @ S) + mu * X0
    gram = rho * (H @ H.conj().T) + mu * np.eye(K)
    X = (B - rho * (H.conj().T @ np.linalg.solve(gram, H @ B))) / mu
    return X, deficient


def design_weighted_waveform(channels, symbols, reference, rho, power=None):
    """
    Trade multi-user interference against similarity to the radar reference.

    Solves the weighted least-squares problem in closed form and then
    rescales the block to the total power budget ``L * power``.
    """
    H = _as_matrix(channels)
    S = _as_matrix(symbols)
    X0 = _as_matrix(reference)
    if power is None:
        power = getattr(reference, "total_power", None)
    if power is None or not power > 0:
        raise InvalidArgumentError("a positive power budget is required")
    if not 0.0 <= rho <= 1.0:
        raise InvalidArgumentError(f"rho must lie in [0, 1], got {rho!r}")
    K, N = H.shape
    if K > N:
        raise InvalidArgumentError(f"more users ({K}) than antennas ({N})")
    if S.shape[0] != K or X0.shape[0] != N or S.shape[1] != X0.shape[1]:
        raise InvalidArgumentError("channel, symbol and reference dimensions disagree")
    X, deficient = weighted_solution(H, S, X0, rho)
    resid = H @ X - S
    mui = float(np.vdot(resid, resid).real)
    Xp, scale = _project_power(X, power)
    return IsacWaveform(Xp, float(power), scale, mui, deficient)


def mrt_waveform(channels_for_design, symbols, power):
    """Maximum-ratio transmission: one unit-norm conjugate beam per user, then power projection."""
    H = _as_matrix(channels_for_design)
    S = _as_matrix(symbols)
    norms = np.linalg.norm(H, axis=1)
    if np.any(norms == 0.0):
        raise DegenerateChannelError("zero-norm channel row")
    X = H.conj().T @ (S / norms[:, None])
    Xp, scale = _project_power(X, power)
    return IsacWaveform(Xp, float(power), scale)


def mrt_isac_waveform(channels_for_design, symbols, reference, rho, power=None):
    """
    MRT-based ISAC block: power split ``sqrt(rho) X_mrt + sqrt(1 - rho) X0``.

    Both parts are first brought to the full budget; the sum is projected
    back onto it. ``rho = 1`` gives plain MRT, ``rho = 0`` the reference.
    """
    if not 0.0 <= rho <= 1.0:
        raise InvalidArgumentError(f"rho must lie in [0, 1], got {rho!r}")
    if power is None:
        power = reference.total_power
    X0, _ = _project_power(_as_matrix(reference), power)
    Xm = mrt_waveform(channels_for_design, symbols, power).matrix
    X, scale = _project_power(math.sqrt(rho) * Xm + math.sqrt(1.0 - rho) * X0, power)
    return IsacWaveform(X, float(power), scale)


def null_projection(X, cpe_steering):
    """Project the columns of ``X`` onto the orthogonal complement of the CPE steering vectors."""
    X = np.asarray(X)
    vecs = [_as_entries(a) for a in cpe_steering]
    if not vecs:
        return np.array(X, copy=True)
    A = np.stack(vecs, axis=1)
    N = X.shape[0]
    if A.shape[0] != N:
        raise InvalidArgumentError("steering vector length does not match the waveform")
    Q, R = np.linalg.qr(A)
    rank = int(np.sum(np.abs(np.diag(R)) > 1e-10 * np.abs(R).max()))
    if rank >= N:
        raise InfeasibleNullingError("CPE directions span the whole array space")
    Q = Q[:, :rank] if rank < Q.shape[1] else Q
    out = X - Q @ (Q.conj().T @ X)
    # second pass removes the rounding left by the first
    return out - Q @ (Q.conj().T @ out)


def _as_entries(a):
    return np.asarray(getattr(a, "entries", a))


def project_null_constraints(waveform, cpe_steering):
    """Null every column towards the CPEs and restore the power budget."""
    cpe_steering = list(cpe_steering)
    if len(cpe_steering) >= waveform.n_antennas:
        raise InfeasibleNullingError("need fewer null directions than antennas")
    if not cpe_steering:
        return waveform
    X = null_projection(waveform.matrix, cpe_steering)
    left = float(np.vdot(X, X).real)
    if left <= 1e-24 * waveform.energy():
        err = InfeasibleNullingError("waveform lies entirely in the CPE subspace")
        err.residual_energy = left
        raise err
    Xp, scale = _project_power(X, waveform.total_power)
    return IsacWaveform(Xp, waveform.total_power, scale * waveform.scale, waveform.mui_energy,
                        waveform.rank_deficient)


def mui_energy(channels, waveform, symbols):
    H = _as_matrix(channels)
    r = H @ _as_matrix(waveform) - _as_matrix(symbols)
    return float(np.vdot(r, r).real)


@dataclass(frozen=True, eq=False)
class EstimatedChannels:
    matrix: np.ndarray  # K x N
    pilot_length: int
    pilot_snr: float  # dB

    @property
    def error_variance(self):
        """Per-entry LS error variance for unit uplink noise."""
        return 1.0 / (self.pilot_length * 10.0 ** (self.pilot_snr / 10.0))


def orthogonal_pilots(n_users, pilot_length):
    """First ``n_users`` rows of the DFT matrix of size ``pilot_length``; unit-modulus entries."""
    if pilot_length < n_users:
        raise PilotContaminationError(
            f"pilot length {pilot_length} < {n_users} users; orthogonal pilots impossible"
        )
    k = np.arange(n_users)[:, None]
    t = np.arange(pilot_length)[None, :]
    return np.exp(-2j * math.pi * k * t / pilot_length)


def estimate_channels_ls(true_channels, pilot_length, pilot_snr, seed):
    """
    Least-squares estimate from one orthogonal uplink pilot phase.

    The base station observes ``sqrt(p) H^T Phi + W`` with unit-variance
    circular noise and ``p = 10**(pilot_snr / 10)``; correlating with the
    pilots gives ``H + E`` with per-entry error variance ``1 / (tau_p p)``.
    """
    H = _as_matrix(true_channels)
    K, N = H.shape
    phi = orthogonal_pilots(K, pilot_length)
    p = 10.0 ** (pilot_snr / 10.0)
    rng = np.random.default_rng(seed)
    W = (rng.standard_normal((N, pilot_length)) + 1j * rng.standard_normal((N, pilot_length))) / math.sqrt(2.0)
    Y = math.sqrt(p) * (H.T @ phi) + W
    H_hat = (Y @ phi.conj().T).T / (pilot_length * math.sqrt(p))
    return EstimatedChannels(H_hat, int(pilot_length), float(pilot_snr))


@dataclass(frozen=True, eq=False)
class RateReport:
    per_user_rate: np.ndarray  # bits/s/Hz, prelog included
    sinr: np.ndarray
    prelog: float
    capped: bool = False

    @property
    def mean_rate(self):
        return float(np.mean(self.per_user_rate))

    @property
    def sum_rate(self):
        return float(np.sum(self.per_user_rate))


def prelog_factor(tau_p, tau_c):
    if not 0 <= tau_p <= tau_c or tau_c <= 0:
        raise InvalidArgumentError(f"need 0 <= tau_p <= tau_c, got tau_p={tau_p}, tau_c={tau_c}")
    return 1.0 - tau_p / tau_c


def achievable_rates(true_channels, waveform, symbols, noise_power, tau_p, tau_c):
    """
    Per-user rate from the empirical decomposition of the received frame.

    For user k the noiseless received row ``y_k = h_k X`` is split into its
    projection ``g_k s_k`` on the intended symbols and the remainder, which
    counts as interference. The SINR is ``|g_k|^2 ||s_k||^2`` over the
    remainder energy plus ``L * noise_power``.
    """
    H = _as_matrix(true_channels)
    X = _as_matrix(waveform)
    S = _as_matrix(symbols)
    if H.shape[1] != X.shape[0] or S.shape != (H.shape[0], X.shape[1]):
        raise InvalidArgumentError("channel, waveform and symbol dimensions disagree")
    if noise_power < 0:
        raise InvalidArgumentError("noise power must be non-negative")
    prelog = prelog_factor(tau_p, tau_c)
    L = X.shape[1]
    Y = H @ X
    s_energy = np.einsum("kl,kl->k", S.conj(), S).real
    gain = np.einsum("kl,kl->k", S.conj(), Y) / s_energy
    signal = np.abs(gain) ** 2 * s_energy
    resid = Y - gain[:, None] * S
    interference = np.einsum("kl,kl->k", resid.conj(), resid).real
    denom = interference + L * noise_power
    with np.errstate(divide="ignore", invalid="ignore"):
        sinr = np.where(denom > 0.0, signal / np.where(denom > 0.0, denom, 1.0), SINR_CAP)
    capped = bool(np.any(sinr >= SINR_CAP))
    sinr = np.minimum(sinr, SINR_CAP)
    rate = prelog * np.log2(1.0 + sinr)
    return RateReport(rate, sinr, prelog, capped)
