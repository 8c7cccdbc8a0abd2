"""
Scenario configuration.

A scenario file is a flat TOML document: ``key = value`` lines with numbers,
strings, booleans and arrays of those, and ``#`` comments. Every key is
optional and falls back to the packaged ``default.toml``; unknown keys and
tables are rejected.
"""

from __future__ import annotations

import dataclasses
import math
import re
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..geometry import build_upa, build_upa_spanning, wavelength_of
from ..propagation import SourcePoint
from ..sensing import EchoModel, Scatterer, ScattererSet, rcs_scatterers

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEG = math.pi / 180.0

_LINE_RE = re.compile(r"line (\d+)")


def _read_toml(text, source):
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        if line is None:
            m = _LINE_RE.search(str(exc))
            line = int(m.group(1)) if m else None
        msg = getattr(exc, "msg", None) or str(exc)
        raise ConfigError(f"{source}: cannot parse: {msg}", line=line) from None


def _default_text():
    return resources.files(__package__).joinpath("default.toml").read_text(encoding="utf-8")


DEFAULTS = _read_toml(_default_text(), "default.toml")
# keys that may be absent from the defaults: value None means "derive"
OPTIONAL = {"tau_p": int, "rho_grid": list}


@dataclass(frozen=True)
class Scenario:
    """Validated scenario. Angles are kept in degrees as written; ``*_points`` give radians."""

    carrier_frequencies: tuple
    side_counts: tuple
    element_size_frac: float
    spacing_frac: float
    array_layout: str
    array_aperture: float
    user_counts: tuple
    ue_ranges: tuple
    ue_azimuths_deg: tuple
    ue_elevations_deg: tuple
    reference_range: float
    csi: str
    csi_realizations: int
    target_ranges: tuple
    target_azimuths_deg: tuple
    target_elevations_deg: tuple
    target_disk_radius: float
    target_gain_db: float
    clutter_ranges: tuple
    clutter_azimuths_deg: tuple
    clutter_elevations_deg: tuple
    clutter_cnr_db: float
    tau_c: int
    pilot_snr_db: float
    symbol_power_share: float
    transmit_snr_db: float
    noise_power: float
    p_fa: float
    rho_start: float
    rho_stop: float
    rho_step: float
    trials: int
    seed: int
    mrt_frequency: float
    mrt_users: int
    max_antennas_desk: int
    max_trials_desk: int
    fig3a_frequencies: tuple
    fig3a_element_frac: float
    fig3a_max_side: int
    fig3b_frequencies: tuple
    fig3b_aperture: float
    fig3b_points: int
    fig4_frequency: float
    fig4_aperture: float
    fig4_anchor_range: float
    fig4_range_min: float
    fig4_range_max: float
    fig4_points: int
    fig5_frequencies: tuple
    fig5_radius: float
    fig5_range_min: float
    fig5_range_max: float
    fig5_points: int
    output_dir: str
    workers: int
    tau_p: int | None = None
    rho_grid: tuple | None = None

    def __post_init__(self):
        _validate(self)

    # -- derived quantities ------------------------------------------------
    @property
    def rhos(self) -> tuple:
        if self.rho_grid is not None:
            return tuple(float(r) for r in self.rho_grid)
        n = int(math.floor((self.rho_stop - self.rho_start) / self.rho_step + 1e-9)) + 1
        return tuple(float(np.round(self.rho_start + i * self.rho_step, 12)) for i in range(n))

    def pilot_length(self, n_users) -> int:
        return int(n_users) if self.tau_p is None else self.tau_p

    @property
    def transmit_power(self) -> float:
        return 10.0 ** (self.transmit_snr_db / 10.0) * self.noise_power

    def ue_points(self, n_users=None):
        n = len(self.ue_ranges) if n_users is None else int(n_users)
        return [SourcePoint(r, a * DEG, e * DEG) for r, a, e in
                zip(self.ue_ranges[:n], self.ue_azimuths_deg[:n], self.ue_elevations_deg[:n])]

    @property
    def target_points(self):
        return [SourcePoint(r, a * DEG, e * DEG) for r, a, e in
                zip(self.target_ranges, self.target_azimuths_deg, self.target_elevations_deg)]

    @property
    def clutter_points(self):
        return [SourcePoint(r, a * DEG, e * DEG) for r, a, e in
                zip(self.clutter_ranges, self.clutter_azimuths_deg, self.clutter_elevations_deg)]

    def target_set(self, carrier_frequency, rng=None) -> ScattererSet:
        """Target scatterers with disk-RCS reflectivities at this carrier."""
        return rcs_scatterers(self.target_points, wavelength_of(carrier_frequency),
                              self.target_disk_radius, self.target_gain_db, self.reference_range, rng)

    def echo_model(self, rng=None) -> EchoModel:
        rng = np.random.default_rng(rng)
        pts = self.clutter_points
        if not pts:
            return EchoModel(self.noise_power)
        phases = np.exp(2j * math.pi * rng.random(len(pts)))
        clutter = ScattererSet(Scatterer(p, complex(ph)) for p, ph in zip(pts, phases))
        power = 10.0 ** (self.clutter_cnr_db / 10.0) * self.noise_power / self.transmit_power
        return EchoModel(self.noise_power, power, clutter)

    def array(self, carrier_frequency, side_count):
        """Trade-off array for one carrier."""
        if self.array_layout == "fixed-aperture":
            return build_upa_spanning(carrier_frequency, side_count, self.array_aperture,
                                      self.element_size_frac)
        return build_upa(carrier_frequency, side_count, self.element_size_frac, self.spacing_frac)

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


_FIELDS = {f.name: f for f in dataclasses.fields(Scenario)}


def _fail(key, msg):
    raise ConfigError(msg, key=key)


def _validate(s: Scenario):
    def positive(key):
        v = getattr(s, key)
        if not v > 0:
            _fail(key, f"must be positive, got {v!r}")

    for key in ("element_size_frac", "spacing_frac", "reference_range", "target_disk_radius",
                "noise_power", "array_aperture", "rho_step", "symbol_power_share", "csi_realizations",
                "mrt_frequency", "fig3a_element_frac", "fig3b_aperture",
                "fig4_frequency", "fig4_aperture", "fig4_anchor_range", "fig4_range_min",
                "fig5_radius", "fig5_range_min", "tau_c", "max_antennas_desk",
                "max_trials_desk", "fig3a_max_side", "fig3b_points", "fig4_points", "fig5_points",
                "workers", "mrt_users"):
        positive(key)
    if s.trials < 1:
        _fail("trials", f"must be >= 1, got {s.trials}")
    if s.seed < 0 or s.seed >= 2**64:
        _fail("seed", "must be an unsigned 64-bit integer")
    if not 0.0 < s.p_fa < 1.0:
        _fail("p_fa", f"must lie in (0, 1), got {s.p_fa}")
    if s.csi not in ("estimated", "perfect"):
        _fail("csi", f"must be 'estimated' or 'perfect', got {s.csi!r}")
    if s.array_layout not in ("fixed-aperture", "half-wavelength"):
        _fail("array_layout", f"must be 'fixed-aperture' or 'half-wavelength', got {s.array_layout!r}")
    if len(s.side_counts) != len(s.carrier_frequencies):
        _fail("side_counts", "needs one entry per carrier frequency")
    for key in ("carrier_frequencies", "fig3a_frequencies", "fig3b_frequencies", "fig5_frequencies",
                "side_counts", "user_counts", "ue_ranges", "target_ranges"):
        vals = getattr(s, key)
        if not vals or any(not v > 0 for v in vals):
            _fail(key, "must be a non-empty list of positive values")
    if any(v <= 0 for v in s.clutter_ranges):
        _fail("clutter_ranges", "ranges must be positive")
    if s.mrt_frequency not in s.carrier_frequencies:
        _fail("mrt_frequency", "must be one of carrier_frequencies")
    n_ue = len(s.ue_ranges)
    for key in ("ue_azimuths_deg", "ue_elevations_deg"):
        if len(getattr(s, key)) != n_ue:
            _fail(key, f"needs {n_ue} entries to match ue_ranges")
    if max(s.user_counts) > n_ue or s.mrt_users > n_ue:
        _fail("user_counts", f"more users than the {n_ue} configured UE positions")
    for prefix in ("target", "clutter"):
        n = len(getattr(s, f"{prefix}_ranges"))
        for key in (f"{prefix}_azimuths_deg", f"{prefix}_elevations_deg"):
            if len(getattr(s, key)) != n:
                _fail(key, f"needs {n} entries to match {prefix}_ranges")
    if s.tau_p is not None:
        if s.tau_p < 1:
            _fail("tau_p", "must be >= 1")
        if s.tau_p > s.tau_c:
            _fail("tau_p", f"tau_p={s.tau_p} exceeds tau_c={s.tau_c}")
        if s.tau_p < max(max(s.user_counts), s.mrt_users):
            _fail("tau_p", "shorter than the user count: pilots cannot be orthogonal")
    elif max(max(s.user_counts), s.mrt_users) > s.tau_c:
        _fail("tau_c", "shorter than the user count")
    if not s.fig4_range_min < s.fig4_range_max:
        _fail("fig4_range_max", "must exceed fig4_range_min")
    if not s.fig5_range_min < s.fig5_range_max:
        _fail("fig5_range_max", "must exceed fig5_range_min")
    rhos = s.rhos
    key = "rho_grid" if s.rho_grid is not None else "rho_start"
    if not rhos:
        _fail(key, "rho grid is empty")
    if any(not 0.0 <= r <= 1.0 for r in rhos):
        _fail(key, "rho values must lie in [0, 1]")
    if any(b <= a for a, b in zip(rhos, rhos[1:])):
        _fail(key, "rho grid must be strictly increasing")


def _coerce(key, value):
    """Check ``value`` against the type of the default for ``key``."""
    default = DEFAULTS.get(key)
    kind = OPTIONAL.get(key) or type(default)
    if kind is list:
        if not isinstance(value, list):
            _fail(key, f"expected a list, got {type(value).__name__}")
        elem = type(default[0]) if default else float
        return tuple(_scalar(key, v, elem) for v in value)
    return _scalar(key, value, kind)


def _scalar(key, value, kind):
    if isinstance(value, bool) and kind is not bool:
        _fail(key, "expected a number, got a boolean")
    if kind is float:
        if not isinstance(value, (int, float)):
            _fail(key, f"expected a number, got {type(value).__name__}")
        return float(value)
    if kind is int:
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            _fail(key, f"expected an integer, got {value!r}")
        return value
    if not isinstance(value, kind):
        _fail(key, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def scenario_from_mapping(mapping) -> Scenario:
    values = dict(DEFAULTS)
    for key, value in mapping.items():
        if key not in _FIELDS:
            _fail(key, "unknown key")
        if isinstance(value, dict):
            _fail(key, "tables are not supported; the config is flat")
        values[key] = _coerce(key, value)
    for key, value in list(values.items()):
        if isinstance(value, list):
            values[key] = tuple(value)
    return Scenario(**values)


def default_scenario() -> Scenario:
    return scenario_from_mapping({})


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc.strerror or exc}") from None
    return scenario_from_mapping(_read_toml(text, str(p)))
