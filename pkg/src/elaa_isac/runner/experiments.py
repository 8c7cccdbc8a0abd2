"""
Experiment orchestration: figure tables and the rate / detection trade-off.

CSV schemas
-----------
fig3a.csv
    ``n_antennas`` then, per carrier, ``aperture_m_<f>GHz`` and ``d_fa_m_<f>GHz``
    (element-count Fraunhofer distance).
fig3b.csv
    ``distance_m`` then ``gain_<f>GHz`` (normalized array gain, linear).
fig3b_arrays.csv
    ``carrier_ghz,n_antennas,aperture_m,d_fa_m`` for the fixed-aperture arrays.
fig4.csv
    ``range_m,correlation`` (power correlation with the fixed UE, linear).
fig5.csv
    ``range_m`` then, per carrier, ``rcs_nf_m2_<f>GHz`` and ``rcs_ff_m2_<f>GHz``.
tradeoff.csv
    ``case,rho,rate_bps_hz,pd,pd_ci95``; rate is the mean per-user rate.
cases.csv
    one row per configured case, run or skipped, with the reason:
    ``case_index,case,design,n_users,n_antennas,carrier_ghz,frame_length_symbols,
    tau_p_symbols,trials,csi_estimates,status``.

Floats are written with ``%.10g`` so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..analytics import correlation_range_sweep, normalized_array_gain
from ..errors import ElaaIsacError, ExperimentError, InvalidArgumentError
from ..geometry import (
    build_upa_fixed_aperture,
    fraunhofer_distance,
    fraunhofer_element_formula,
    wavelength_of,
)
from ..propagation import SourcePoint, build_channels, far_field_counterpart
from ..rcs import QuadratureMesh, rcs_range_sweep
from ..sensing import PdEstimate, SensingScenario, estimate_pd
from ..waveform import (
    achievable_rates,
    design_weighted_waveform,
    estimate_channels_ls,
    mrt_isac_waveform,
    qpsk_symbols,
    reference_radar_waveform,
)
from .config import Scenario
from .svg import line_plot

EXPERIMENTS = ("fig3a", "fig3b", "fig4", "fig5")


# ---------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------
def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.10g" % float(v)
    return str(v)


@dataclass(frozen=True)
class Table:
    name: str
    header: tuple
    rows: tuple

    def column(self, name):
        i = self.header.index(name)
        return np.array([r[i] for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for r in self.rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()


def _ghz(f):
    return f"{f / 1e9:g}GHz"


def _prepare_dir(out_dir):
    p = Path(out_dir)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ElaaIsacError(f"cannot create output directory {p}: {exc.strerror or exc}") from None
    return p


def write_outputs(out_dir, tables, svgs=None):
    """Write tables (and SVG strings) in a fixed order; returns the written paths."""
    p = _prepare_dir(out_dir)
    written = []
    try:
        for t in tables:
            path = p / f"{t.name}.csv"
            path.write_text(t.to_csv(), encoding="utf-8", newline="")
            written.append(path)
        for name, doc in (svgs or {}).items():
            path = p / f"{name}.svg"
            path.write_text(doc, encoding="utf-8", newline="")
            written.append(path)
    except OSError as exc:
        raise ElaaIsacError(f"cannot write to {p}: {exc.strerror or exc}") from None
    return written


# ---------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------
def fig3a_table(s: Scenario) -> Table:
    header = ["n_antennas"]
    for f in s.fig3a_frequencies:
        header += [f"aperture_m_{_ghz(f)}", f"d_fa_m_{_ghz(f)}"]
    rows = []
    for side in range(1, s.fig3a_max_side + 1):
        n = side * side
        row = [n]
        for f in s.fig3a_frequencies:
            lam = wavelength_of(f)
            d_a = s.fig3a_element_frac * lam
            row += [side * d_a, fraunhofer_element_formula(n, d_a, lam)]
        rows.append(tuple(row))
    return Table("fig3a", tuple(header), tuple(rows))


def fig3b_tables(s: Scenario):
    arrays = [build_upa_fixed_aperture(f, s.fig3b_aperture, s.element_size_frac, s.spacing_frac)
              for f in s.fig3b_frequencies]
    d_fa = [fraunhofer_distance(g) for g in arrays]
    distances = np.logspace(0.0, math.log10(100.0 * max(d_fa)), s.fig3b_points)
    cols = [[normalized_array_gain(g, r) for r in distances] for g in arrays]
    header = ("distance_m",) + tuple(f"gain_{_ghz(f)}" for f in s.fig3b_frequencies)
    rows = tuple((float(r),) + tuple(c[i] for c in cols) for i, r in enumerate(distances))
    info = tuple((f / 1e9, g.n_antennas, g.aperture_side, d)
                 for f, g, d in zip(s.fig3b_frequencies, arrays, d_fa))
    return (Table("fig3b", header, rows),
            Table("fig3b_arrays", ("carrier_ghz", "n_antennas", "aperture_m", "d_fa_m"), info))


def fig4_table(s: Scenario) -> Table:
    g = build_upa_fixed_aperture(s.fig4_frequency, s.fig4_aperture, s.element_size_frac, s.spacing_frac)
    anchor = SourcePoint(s.fig4_anchor_range)
    ranges = np.linspace(s.fig4_range_min, s.fig4_range_max, s.fig4_points)
    pts = correlation_range_sweep(g, anchor, ranges)
    return Table("fig4", ("range_m", "correlation"), tuple((p.abscissa, p.value) for p in pts))


def fig5_table(s: Scenario) -> Table:
    ranges = np.linspace(s.fig5_range_min, s.fig5_range_max, s.fig5_points)
    header = ["range_m"]
    cols = []
    for f in s.fig5_frequencies:
        lam = wavelength_of(f)
        mesh = QuadratureMesh.for_wavelength(s.fig5_radius, lam)
        sweep = rcs_range_sweep(s.fig5_radius, lam, ranges, mesh)
        header += [f"rcs_nf_m2_{_ghz(f)}", f"rcs_ff_m2_{_ghz(f)}"]
        cols.append(sweep)
    rows = tuple((float(r),) + tuple(v for c in cols for v in c[i][1:]) for i, r in enumerate(ranges))
    return Table("fig5", tuple(header), rows)


def _figure_svg(name, tables):
    t = tables[0]
    x = t.column(t.header[0])
    if name == "fig3a":
        series = {h.replace("d_fa_m_", ""): (x, t.column(h)) for h in t.header if h.startswith("d_fa")}
        return line_plot(series, title="Fraunhofer array distance", xlabel="N",
                         ylabel="d_FA (m)")
    if name == "fig3b":
        series = {h.replace("gain_", ""): (x, t.column(h)) for h in t.header[1:]}
        return line_plot(series, title="Normalized array gain", xlabel="distance (m)",
                         ylabel="gain", logx=True)
    if name == "fig4":
        return line_plot({"correlation": (x, t.column("correlation"))},
                         title="Steering correlation along range", xlabel="range (m)",
                         ylabel="correlation")
    series = {}
    for h in t.header[1:]:
        kind, f = h.split("_m2_")
        series[f"{kind.replace('rcs_', '').upper()} {f}"] = (x, t.column(h))
    return line_plot(series, title="Disk RCS", xlabel="range (m)", ylabel="RCS (m^2)", logy=True)


def run_experiment(name, scenario: Scenario, out_dir=None, svg=False, write=True):
    """
    Compute the tables of one figure and write them as CSV (and SVG with ``svg``).

    Returns the list of :class:`Table` objects.
    """
    builders = {
        "fig3a": lambda s: [fig3a_table(s)],
        "fig3b": lambda s: list(fig3b_tables(s)),
        "fig4": lambda s: [fig4_table(s)],
        "fig5": lambda s: [fig5_table(s)],
    }
    if name not in builders:
        raise InvalidArgumentError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    out = Path(out_dir if out_dir is not None else scenario.output_dir)
    if write:
        _prepare_dir(out)
    tables = builders[name](scenario)
    if write:
        svgs = {name: _figure_svg(name, tables)} if svg else None
        write_outputs(out, tables, svgs)
    return tables


# ---------------------------------------------------------------------
# trade-off
# ---------------------------------------------------------------------
@dataclass(frozen=True)
class CaseSpec:
    index: int
    label: str
    design: str  # "weighted", "mrt-near" or "mrt-far"
    n_users: int
    carrier_frequency: float
    side_count: int

    @property
    def n_antennas(self):
        return self.side_count * self.side_count


@dataclass(frozen=True)
class TradeoffRow:
    rho: float
    per_user_rate: float
    pd: PdEstimate


@dataclass(frozen=True)
class TradeoffCurve:
    case: CaseSpec
    rows: tuple

    def __post_init__(self):
        rhos = [r.rho for r in self.rows]
        if any(b <= a for a, b in zip(rhos, rhos[1:])):
            raise InvalidArgumentError("trade-off rows must be sorted by rho")

    @property
    def rhos(self):
        return np.array([r.rho for r in self.rows])

    @property
    def rates(self):
        return np.array([r.per_user_rate for r in self.rows])

    @property
    def pds(self):
        return np.array([r.pd.p_hat for r in self.rows])

    @property
    def ci95(self):
        return np.array([r.pd.ci95_halfwidth for r in self.rows])


@dataclass(frozen=True)
class TradeoffResult:
    curves: dict  # label -> TradeoffCurve, in case order
    manifest: Table
    table: Table
    trials: int

    def __getitem__(self, label):
        return self.curves[label]


def case_grid(s: Scenario):
    """Every configured case: weighted designs over (K, N), then near/far MRT."""
    cases = []
    for K in s.user_counts:
        for f, side in zip(s.carrier_frequencies, s.side_counts):
            cases.append(CaseSpec(len(cases), f"weighted-K{K}-N{side * side}", "weighted", K, f, side))
    side = s.side_counts[s.carrier_frequencies.index(s.mrt_frequency)]
    for design, tag in (("mrt-near", "nf"), ("mrt-far", "ff")):
        cases.append(CaseSpec(len(cases), f"mrt-{tag}-K{s.mrt_users}-N{side * side}", design,
                              s.mrt_users, s.mrt_frequency, side))
    return cases


def _seeds(master_seed, key, n):
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return [int(c.generate_state(1, np.uint64)[0]) for c in ss.spawn(n)]


def case_seeds(master_seed, case_index):
    """(estimation, symbols) seeds of one case, derived from (master seed, case index).

    The trade-off draws its channel estimates from :func:`estimation_seeds`.
    """
    return _seeds(master_seed, (0, case_index), 2)


def scene_seeds(master_seed, carrier_index):
    """(clutter, target, detection) seeds shared by every case on the same carrier.

    Cases that differ only in K or in the precoder then see the same scene and
    the same detection noise, so their P_D values are directly comparable.
    """
    return _seeds(master_seed, (1, carrier_index), 3)


def frame_length(s: Scenario, case: CaseSpec):
    # downlink part of the coherence block, stretched to N so the reference stays orthogonal
    return max(case.n_antennas, s.tau_c - s.pilot_length(case.n_users))


def estimation_seeds(master_seed, case_index, n):
    """Seeds of the ``n`` independent channel estimates of one case."""
    return _seeds(master_seed, (0, case_index, 0), n)


def detection_seeds(master_seed, carrier_index, n):
    """Detection seeds, one per channel estimate, shared by every case on a carrier."""
    return _seeds(master_seed, (1, carrier_index, 0), n)


def csi_estimates(s: Scenario, case: CaseSpec, trials: int) -> int:
    """Number of independent channel estimates a case pools over."""
    if case.design == "weighted" and s.csi == "estimated":
        return min(s.csi_realizations, trials)
    return 1


def _split(trials, n):
    return [trials // n + (1 if m < trials % n else 0) for m in range(n)]


def run_case(s: Scenario, case: CaseSpec, trials: int) -> TradeoffCurve:
    """
    All rho points of one case.

    With estimated CSI the weighted design is repeated on ``csi_realizations``
    independent LS estimates; the detection trials are split evenly across
    them and pooled, and the rate is averaged. A single estimate would make
    P_D hinge on where that draw's estimation noise happens to steer energy.
    """
    _, seed_sym = case_seeds(s.seed, case.index)
    carrier_index = s.carrier_frequencies.index(case.carrier_frequency)
    seed_clutter, seed_target, _ = scene_seeds(s.seed, carrier_index)
    K, N = case.n_users, case.n_antennas
    tau_p = s.pilot_length(K)
    L = frame_length(s, case)
    P = s.transmit_power
    geom = s.array(case.carrier_frequency, case.side_count)
    channels = build_channels(geom, s.ue_points(K), reference_distance=s.reference_range)
    sensing = SensingScenario(geom, s.target_set(case.carrier_frequency, seed_target),
                              s.echo_model(seed_clutter))
    symbols = qpsk_symbols(K, L, seed_sym)
    reference = reference_radar_waveform(N, L, P)

    estimated = case.design == "weighted" and s.csi == "estimated"
    n_real = csi_estimates(s, case, trials)
    pd_seeds = detection_seeds(s.seed, carrier_index, n_real)
    counts = _split(trials, n_real)

    if case.design == "weighted":
        designs = []
        for seed_est in estimation_seeds(s.seed, case.index, n_real):
            if estimated:
                est = estimate_channels_ls(channels, tau_p, s.pilot_snr_db, seed_est)
                H_hat, err_var = est.matrix, est.error_variance
            else:
                H_hat, err_var = channels.matrix, 0.0
            # design on per-element-normalized channels; every user asks for the same
            # share of the full-budget received power, so larger K leaves less for sensing
            H_d = H_hat / math.sqrt(N)
            raw = float(np.mean(np.sum(np.abs(H_d) ** 2, axis=1)))
            # E||h_hat||^2 = ||h||^2 + N err_var: remove the estimation-noise bias
            gain = max(raw - err_var, 0.1 * raw)
            S_d = symbols.matrix * math.sqrt(s.symbol_power_share * P * gain)
            designs.append(lambda rho, H_d=H_d, S_d=S_d: design_weighted_waveform(H_d, S_d, reference, rho, P))
    else:
        H_mrt = channels if case.design == "mrt-near" else far_field_counterpart(
            channels, geom, reference_distance=s.reference_range)
        designs = [lambda rho: mrt_isac_waveform(H_mrt, symbols, reference, rho, P)]

    rows = []
    for rho in s.rhos:
        rates, hits = [], 0
        try:
            for design, n_trials, seed_pd in zip(designs, counts, pd_seeds):
                w = design(rho)
                rates.append(achievable_rates(channels, w, symbols, s.noise_power, tau_p, s.tau_c).mean_rate)
                det = sensing.detector(w)
                threshold = det.analytic_threshold(s.p_fa)
                hits += estimate_pd(sensing, w, threshold, n_trials, seed_pd, detector=det).detections
        except ElaaIsacError as exc:
            raise ExperimentError(str(exc), case=case.label, rho=rho) from exc
        rows.append(TradeoffRow(float(rho), math.fsum(rates) / len(rates), PdEstimate.from_counts(hits, trials)))
    return TradeoffCurve(case, tuple(rows))


def tradeoff_sweep(scenario: Scenario, full=False, workers=None, out_dir=None, svg=False,
                   write=False) -> TradeoffResult:
    """
    Rate / detection trade-off for every case of the configured grid.

    Without ``full`` cases above ``max_antennas_desk`` antennas are skipped
    (and listed as such in the manifest) and trials are capped at
    ``max_trials_desk``. Cases run in parallel on ``workers`` threads; seeds
    depend only on the master seed and the case index, so the output does not
    depend on the worker count.
    """
    s = scenario
    trials = s.trials if full else min(s.trials, s.max_trials_desk)
    workers = s.workers if workers is None else int(workers)
    cases = case_grid(s)
    todo = [c for c in cases if full or c.n_antennas <= s.max_antennas_desk]
    if workers > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            curves = list(pool.map(lambda c: run_case(s, c, trials), todo))
    else:
        curves = [run_case(s, c, trials) for c in todo]
    by_label = {c.case.label: c for c in curves}

    manifest_rows = []
    for c in cases:
        status = "run" if c.label in by_label else f"skipped: N>{s.max_antennas_desk} without --full"
        manifest_rows.append((c.index, c.label, c.design, c.n_users, c.n_antennas,
                              c.carrier_frequency / 1e9, frame_length(s, c),
                              s.pilot_length(c.n_users), trials if c.label in by_label else 0,
                              csi_estimates(s, c, trials), status))
    manifest = Table("cases", ("case_index", "case", "design", "n_users", "n_antennas", "carrier_ghz",
                               "frame_length_symbols", "tau_p_symbols", "trials", "csi_estimates",
                               "status"),
                     tuple(manifest_rows))
    rows = tuple((c.case.label, r.rho, r.per_user_rate, r.pd.p_hat, r.pd.ci95_halfwidth)
                 for c in curves for r in c.rows)
    table = Table("tradeoff", ("case", "rho", "rate_bps_hz", "pd", "pd_ci95"), rows)
    result = TradeoffResult(by_label, manifest, table, trials)
    if write:
        out = out_dir if out_dir is not None else s.output_dir
        svgs = None
        if svg:
            series = {c.case.label: (c.rates, c.pds) for c in curves}
            svgs = {"tradeoff": line_plot(series, title="Rate / detection trade-off",
                                          xlabel="rate per user (bit/s/Hz)", ylabel="P_D")}
        write_outputs(out, [table, manifest], svgs)
    return result
