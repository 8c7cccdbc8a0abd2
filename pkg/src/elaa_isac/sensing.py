"""
Radar echo synthesis, detector calibration and Monte Carlo detection probability.

Detector
--------
The transmit block ``X`` is known and the target response is not, so the
received frame ``Y`` (N x L) is projected on the row space of ``X`` and,
on the receive side, on the orthogonal complement of the known clutter
steering vectors. The statistic is the energy left:

    T = || P_c_perp  Y  P_X ||_F**2

Under H0 the clutter echo lies in the nulled subspace and only white noise of
power ``sigma2`` remains, so ``T / (sigma2 / 2)`` is chi-square with
``2 (N - n_clutter) rank(X)`` degrees of freedom. Under H1 it is noncentral
chi-square with noncentrality ``2 ||P_c_perp G X||_F**2 / sigma2``.

Random streams
--------------
Trials are grouped in fixed blocks of :data:`BLOCK_SIZE`; block ``b`` draws
from ``SeedSequence(seed, spawn_key=(b,))``. Results therefore do not depend
on how many workers evaluate the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import stats
from scipy.linalg import lapack

from .errors import CalibrationInfeasibleError, InvalidArgumentError
from .propagation import ChannelModel, SourcePoint, steering_matrix
from .rcs import DiskTarget, far_field_rcs_disk, near_field_rcs_disk

BLOCK_SIZE = 4096
Z95 = 1.959963984540054


@dataclass(frozen=True)
class Scatterer:
    point: SourcePoint
    reflectivity: complex = 1.0 + 0.0j


@dataclass(frozen=True)
class ScattererSet:
    scatterers: tuple

    def __post_init__(self):
        object.__setattr__(self, "scatterers", tuple(self.scatterers))
        if not self.scatterers:
            raise InvalidArgumentError("a scatterer set needs at least one scatterer")

    @property
    def count(self):
        return len(self.scatterers)

    @property
    def points(self):
        return [s.point for s in self.scatterers]

    @property
    def reflectivities(self):
        return np.array([s.reflectivity for s in self.scatterers], dtype=complex)

    def scaled_ranges(self, factor):
        return ScattererSet(
            Scatterer(s.point.at_range(s.point.range * factor), s.reflectivity)
            for s in self.scatterers
        )


@dataclass(frozen=True)
class EchoModel:
    noise_power: float
    clutter_power: float = 0.0
    clutter_scatterers: ScattererSet | None = None

    def __post_init__(self):
        if self.noise_power < 0 or self.clutter_power < 0:
            raise InvalidArgumentError("noise and clutter powers must be non-negative")


@dataclass(frozen=True)
class DetectionOutcome:
    statistic: float
    threshold: float

    @property
    def decision(self) -> bool:
        return self.statistic > self.threshold


def wilson_interval(successes, trials, z=Z95):
    """Wilson score interval ``(center, halfwidth)`` for a binomial proportion."""
    if trials <= 0:
        raise InvalidArgumentError("trials must be positive")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z / denom * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials))
    return center, half


@dataclass(frozen=True)
class PdEstimate:
    p_hat: float
    trials: int
    ci95_halfwidth: float
    detections: int

    @classmethod
    def from_counts(cls, detections, trials):
        _, half = wilson_interval(detections, trials)
        return cls(detections / trials, int(trials), half, int(detections))

    @property
    def interval(self):
        center, half = wilson_interval(self.detections, self.trials)
        return max(0.0, center - half), min(1.0, center + half)


# ---------------------------------------------------------------------
# responses
# ---------------------------------------------------------------------
def target_response(geometry, target: ScattererSet, model=ChannelModel.NEAR_FIELD):
    """Monostatic N x N response ``sum_s alpha_s a_s a_s^T`` with unit-modulus steering entries."""
    A = steering_matrix(geometry, target.points, model)
    return (A * target.reflectivities[None, :]) @ A.T


def clutter_response(geometry, echo_model: EchoModel, model=ChannelModel.NEAR_FIELD):
    """Clutter response with reflectivities rescaled so that ``sum |c_i|**2 == clutter_power``.

    Returns ``(C, A_c)`` with ``A_c`` the clutter steering matrix, or
    ``(None, None)`` when the model has no clutter.
    """
    cs = echo_model.clutter_scatterers
    if cs is None or echo_model.clutter_power == 0.0:
        return None, None
    c = cs.reflectivities
    norm = float(np.sum(np.abs(c) ** 2))
    if norm == 0.0:
        raise InvalidArgumentError("clutter scatterers have zero reflectivity")
    c = c * math.sqrt(echo_model.clutter_power / norm)
    A = steering_matrix(geometry, cs.points, model)
    return (A * c[None, :]) @ A.T, A


def default_clutter(rng=None):
    """Three near-field point scatterers between 20 and 70 m with random phases."""
    rng = np.random.default_rng(rng)
    deg = math.pi / 180.0
    pts = [SourcePoint(20.0, -30 * deg, -10 * deg),
           SourcePoint(45.0, 25 * deg, -5 * deg),
           SourcePoint(70.0, 60 * deg, -15 * deg)]
    phases = np.exp(2j * math.pi * rng.random(len(pts)))
    return ScattererSet(Scatterer(p, complex(ph)) for p, ph in zip(pts, phases))


def rcs_scatterers(points, wavelength, disk_radius=0.25, gain_db=-37.0, reference_range=30.0,
                   rng=None):
    """
    Scatterers whose power reflectivity follows the range-dependent disk RCS.

    ``|alpha|**2 = 10**(gain_db/10) * (sigma_nf(r) / sigma_ff) * (reference_range / r)**4``:
    the two-way spreading loss relative to ``reference_range`` and the
    near-field RCS deficit of a disk facing the array. Phases are uniform.
    """
    rng = np.random.default_rng(rng)
    ff = far_field_rcs_disk(disk_radius, wavelength)
    out = []
    for p in points:
        nf = near_field_rcs_disk(DiskTarget(disk_radius, p), wavelength)
        power = 10.0 ** (gain_db / 10.0) * (nf / ff) * (reference_range / p.range) ** 4
        out.append(Scatterer(p, complex(math.sqrt(power) * np.exp(2j * math.pi * rng.random()))))
    return ScattererSet(out)


def _complex_normal(rng, shape, power):
    scale = math.sqrt(power / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def synthesize_echo(response, waveform, echo_model: EchoModel, target_present, seed, clutter=None):
    """
    One received frame ``[G X] + C X + W``.

    ``clutter`` is the clutter response matrix (see :func:`clutter_response`);
    it must be given when the echo model has clutter power.
    """
    X = np.asarray(getattr(waveform, "matrix", waveform))
    N, L = X.shape
    if response is not None and np.shape(response) != (N, N):
        raise InvalidArgumentError("response and waveform dimensions disagree")
    if echo_model.clutter_power > 0 and echo_model.clutter_scatterers is not None and clutter is None:
        raise InvalidArgumentError("clutter response matrix required for a cluttered echo model")
    rng = np.random.default_rng(seed)
    Y = np.zeros((N, L), dtype=complex)
    if target_present:
        Y += response @ X
    if clutter is not None:
        Y += clutter @ X
    if echo_model.noise_power > 0:
        Y += _complex_normal(rng, (N, L), echo_model.noise_power)
    return Y


# ---------------------------------------------------------------------
# detector
# ---------------------------------------------------------------------
def _gram_rank(gram, rank_tol):
    """
    Number of eigenvalues of the Hermitian PSD ``gram`` above ``rank_tol * max``.

    A Cholesky factorization with a 1-norm condition estimate certifies full
    rank cheaply: for Hermitian matrices the 2-norm is bounded by the 1-norm,
    so ``rcond_1 <= lambda_min / lambda_max``. The estimator can overshoot
    ``rcond_1`` by a small factor, hence the margin; eigenvalues decide
    otherwise.
    """
    n = gram.shape[0]
    c, info = lapack.zpotrf(gram, lower=0, clean=1) if np.iscomplexobj(gram) else \
        lapack.dpotrf(gram, lower=0, clean=1)
    if info == 0:
        anorm = float(np.max(np.sum(np.abs(gram), axis=0)))
        pocon = lapack.zpocon if np.iscomplexobj(gram) else lapack.dpocon
        rcond, info = pocon(c, anorm)
        if info == 0 and rcond > 100.0 * rank_tol:
            return n
    w = np.linalg.eigvalsh(gram)
    if not w.max() > 0:
        return 0
    return int(np.count_nonzero(w > rank_tol * w.max()))


class MatchedSubspaceDetector:
    """Energy of the echo in the transmit row space, with receive-side clutter nulling."""

    def __init__(self, waveform, noise_power, clutter_steering=None, rank_tol=1e-10):
        X = np.asarray(getattr(waveform, "matrix", waveform))
        if not noise_power > 0:
            raise InvalidArgumentError("detector needs positive noise power")
        self.noise_power = float(noise_power)
        self.n_antennas, self.frame_length = X.shape
        self._X = X
        self._gram = X @ X.conj().T
        self.rank = _gram_rank(self._gram, rank_tol)
        if self.rank == 0:
            raise InvalidArgumentError("waveform is identically zero")
        if clutter_steering is not None and np.size(clutter_steering):
            Qc, _ = np.linalg.qr(np.asarray(clutter_steering))
            self._Qc = Qc
        else:
            self._Qc = None

    @cached_property
    def _V(self):
        # rows of V^H = Sigma^-1 U^H X span the row space; V is L x r with orthonormal columns
        w, U = np.linalg.eigh(self._gram)
        order = np.argsort(w)[::-1][: self.rank]
        U, w = U[:, order], w[order]
        return (U.conj().T @ self._X).conj().T / np.sqrt(w)[None, :]

    @property
    def n_nulled(self):
        return 0 if self._Qc is None else self._Qc.shape[1]

    @property
    def dof(self):
        return 2 * (self.n_antennas - self.n_nulled) * self.rank

    def _reduce(self, Y):
        Z = Y @ self._V
        if self._Qc is not None:
            Z = Z - self._Qc @ (self._Qc.conj().T @ Z)
        return Z

    def statistic(self, Y):
        Y = np.asarray(Y)
        if Y.ndim == 3:
            Z = np.einsum("tnl,lr->tnr", Y, self._V)
            if self._Qc is not None:
                Z = Z - np.einsum("nc,tcr->tnr", self._Qc, np.einsum("nc,tnr->tcr", self._Qc.conj(), Z))
            return np.einsum("tnr,tnr->t", Z.conj(), Z).real
        Z = self._reduce(Y)
        return float(np.vdot(Z, Z).real)

    def decide(self, Y, threshold):
        return DetectionOutcome(self.statistic(Y), float(threshold))

    def signal_energy(self, S):
        """Energy of a noiseless echo ``S`` after projection."""
        Z = self._reduce(S)
        return float(np.vdot(Z, Z).real)

    def noncentrality(self, S):
        return 2.0 * self.signal_energy(S) / self.noise_power

    def analytic_threshold(self, p_fa):
        if not 0.0 < p_fa < 1.0:
            raise InvalidArgumentError("p_fa must lie in (0, 1)")
        return 0.5 * self.noise_power * float(stats.chi2.isf(p_fa, self.dof))

    def false_alarm_probability(self, threshold):
        return float(stats.chi2.sf(2.0 * threshold / self.noise_power, self.dof))


# ---------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------
@dataclass(eq=False)
class SensingScenario:
    """Fixed sensing setup shared by calibration and detection runs."""

    geometry: object
    target: ScattererSet
    echo: EchoModel
    model: ChannelModel = ChannelModel.NEAR_FIELD
    _cache: dict = field(default_factory=dict, repr=False)

    @cached_property
    def target_steering(self):
        return steering_matrix(self.geometry, self.target.points, self.model)

    @cached_property
    def response(self):
        return target_response(self.geometry, self.target, self.model)

    @cached_property
    def _clutter(self):
        return clutter_response(self.geometry, self.echo, self.model)

    @property
    def clutter(self):
        return self._clutter[0]

    @property
    def clutter_steering(self):
        return self._clutter[1]

    def detector(self, waveform):
        return MatchedSubspaceDetector(waveform, self.echo.noise_power, self.clutter_steering)


def _block_rng(seed, block):
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(block),)))


def _run_blocks(fn, trials, seed, workers):
    n_blocks = -(-trials // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, trials - b * BLOCK_SIZE) for b in range(n_blocks)]
    jobs = [(b, sizes[b]) for b in range(n_blocks)]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: fn(_block_rng(seed, job[0]), job[1]), jobs))
    else:
        parts = [fn(_block_rng(seed, b), n) for b, n in jobs]
    return np.concatenate(parts) if parts else np.empty(0)


def _echo_statistics(scenario, detector, X, rng, n, target_present, random_phase, echo_chunk=256):
    N, L = X.shape
    out = np.empty(n)
    CX = scenario.clutter @ X if scenario.clutter is not None else None
    A = scenario.target_steering
    alpha0 = scenario.target.reflectivities
    B = A.T @ X  # S x L
    for start in range(0, n, echo_chunk):
        m = min(echo_chunk, n - start)
        Y = _complex_normal(rng, (m, N, L), scenario.echo.noise_power)
        if CX is not None:
            Y += CX[None]
        if target_present:
            if random_phase:
                alpha = np.abs(alpha0)[None, :] * np.exp(2j * math.pi * rng.random((m, alpha0.size)))
            else:
                alpha = np.broadcast_to(alpha0, (m, alpha0.size))
            Y += np.einsum("ns,ts,sl->tnl", A, alpha, B)
        out[start:start + m] = detector.statistic(Y)
    return out


def _reduced_statistics(scenario, detector, X, rng, n, target_present, random_phase):
    dof = detector.dof
    if target_present:
        A = scenario.target_steering
        if detector._Qc is not None:
            A = A - detector._Qc @ (detector._Qc.conj().T @ A)
        B = scenario.target_steering.T @ X
        # ||A' diag(a) B||^2 = a^H M a
        M = (A.conj().T @ A) * (B @ B.conj().T).T
        alpha0 = scenario.target.reflectivities
        if random_phase:
            alpha = np.abs(alpha0)[None, :] * np.exp(2j * math.pi * rng.random((n, alpha0.size)))
        else:
            alpha = np.broadcast_to(alpha0, (n, alpha0.size))
        energy = np.einsum("ts,su,tu->t", alpha.conj(), M, alpha).real
        lam = 2.0 * np.maximum(energy, 0.0) / scenario.echo.noise_power
    else:
        lam = np.zeros(n)
    # noncentral chi-square by rotation: (sqrt(lam) + z1)^2 + z2^2 + chi2(dof - 2)
    z = rng.standard_normal((n, 2))
    rest = rng.chisquare(dof - 2, size=n) if dof > 2 else np.zeros(n)
    t = (np.sqrt(lam) + z[:, 0]) ** 2 + z[:, 1] ** 2 + rest
    return 0.5 * scenario.echo.noise_power * t


def simulate_statistics(scenario, waveform, trials, seed, target_present, method="echo",
                        random_phase=True, workers=1, detector=None):
    """Detector statistics for ``trials`` independent frames."""
    X = np.asarray(getattr(waveform, "matrix", waveform))
    det = detector if detector is not None else scenario.detector(X)
    if method == "echo":
        fn = lambda rng, n: _echo_statistics(scenario, det, X, rng, n, target_present, random_phase)
    elif method == "reduced":
        fn = lambda rng, n: _reduced_statistics(scenario, det, X, rng, n, target_present, random_phase)
    else:
        raise InvalidArgumentError(f"unknown simulation method {method!r}")
    return _run_blocks(fn, int(trials), seed, workers)


def calibrate_threshold(scenario, waveform, p_fa, trials=0, seed=0, method="analytic",
                        sim_method="echo", workers=1, detector=None):
    """
    Threshold with false-alarm probability ``p_fa``.

    ``method="analytic"`` inverts the chi-square tail; ``"monte-carlo"`` takes
    the empirical ``1 - p_fa`` quantile of simulated null statistics and needs
    at least ``100 / p_fa`` trials.
    """
    if not 0.0 < p_fa < 1.0:
        raise InvalidArgumentError("p_fa must lie in (0, 1)")
    det = detector if detector is not None else scenario.detector(waveform)
    if method == "analytic":
        return det.analytic_threshold(p_fa)
    if method != "monte-carlo":
        raise InvalidArgumentError(f"unknown calibration method {method!r}")
    if trials < 100.0 / p_fa:
        raise CalibrationInfeasibleError(
            f"{trials} trials cannot resolve p_fa={p_fa:g}; need >= {math.ceil(100.0 / p_fa)} "
            "or use the analytic path"
        )
    t0 = simulate_statistics(scenario, waveform, trials, seed, False, sim_method,
                             workers=workers, detector=det)
    return float(np.quantile(t0, 1.0 - p_fa))


def estimate_pd(scenario, waveform, threshold, trials, seed, method="reduced", random_phase=True,
                workers=1, detector=None):
    """Empirical detection probability with a Wilson 95% interval.

    Each trial draws fresh noise and, with ``random_phase``, fresh uniform
    phases for the target reflectivities (magnitudes fixed).
    """
    if trials < 1:
        raise InvalidArgumentError("trials must be positive")
    t1 = simulate_statistics(scenario, waveform, trials, seed, True, method, random_phase, workers,
                             detector)
    return PdEstimate.from_counts(int(np.count_nonzero(t1 > threshold)), int(trials))
