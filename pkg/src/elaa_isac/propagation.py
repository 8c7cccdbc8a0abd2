"""
Near-field (spherical wavefront) and far-field (planar wavefront) array responses.

Steering vectors carry the phase ``exp(-j 2 pi d / lambda)`` of the path
length ``d`` from the source to each element. Far-field vectors replace the
exact path with its planar approximation ``r - <p_n, u>``, dropping the common
``r`` term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError, SingularGeometryError
from .geometry import ArrayGeometry

#: Minimum distance (m) between a source point and any element.
SINGULAR_EPS = 1e-6


class AmplitudeModel(str, Enum):
    """Per-element magnitude law of a near-field response.

    ``PHASE_ONLY`` keeps equal magnitudes, ``FREE_SPACE`` scales element n by
    ``1/d_n``, ``APERTURE_LOSS`` additionally by ``sqrt(cos psi_n)`` where
    ``psi_n`` is the incidence angle on element n.
    """

    PHASE_ONLY = "phase-only"
    FREE_SPACE = "free-space"
    APERTURE_LOSS = "aperture-loss"


class ChannelModel(str, Enum):
    NEAR_FIELD = "near-field"
    FAR_FIELD = "far-field"


def unit_direction(azimuth, elevation):
    """Unit vector pointing from the array center towards (azimuth, elevation)."""
    ce = math.cos(elevation)
    return np.array([ce * math.sin(azimuth), ce * math.cos(azimuth), math.sin(elevation)])


@dataclass(frozen=True)
class SourcePoint:
    """A point given by range (m) from the array center and angles (rad)."""

    range: float
    azimuth: float = 0.0
    elevation: float = 0.0

    def __post_init__(self):
        if not (self.range > 0 and math.isfinite(self.range)):
            raise InvalidArgumentError(f"range must be positive and finite, got {self.range!r}")

    @property
    def cartesian(self) -> np.ndarray:
        return self.range * unit_direction(self.azimuth, self.elevation)

    @classmethod
    def from_cartesian(cls, xyz):
        x, y, z = (float(v) for v in xyz)
        r = math.sqrt(x * x + y * y + z * z)
        return cls(r, math.atan2(x, y), math.asin(z / r) if r > 0 else 0.0)

    def at_range(self, new_range):
        return SourcePoint(new_range, self.azimuth, self.elevation)


@dataclass(frozen=True, eq=False)
class SteeringVector:
    entries: np.ndarray
    normalization: str = "unit-norm"  # or "physical-amplitude"

    def __len__(self):
        return self.entries.shape[0]


def element_distances(geometry: ArrayGeometry, point: SourcePoint) -> np.ndarray:
    """Exact Euclidean distance from every element to ``point``."""
    d = np.linalg.norm(geometry.positions - point.cartesian[None, :], axis=1)
    if d.min() < SINGULAR_EPS:
        raise SingularGeometryError(f"point {point} coincides with an array element")
    return d


def _element_amplitudes(geometry, point, distances, amp):
    amp = AmplitudeModel(amp)
    if amp is AmplitudeModel.PHASE_ONLY:
        return np.ones_like(distances)
    mag = 1.0 / distances
    if amp is AmplitudeModel.APERTURE_LOSS:
        # array normal is +y; incidence cosine is the y-offset over the path length
        cos_psi = np.abs(point.cartesian[1] - geometry.positions[:, 1]) / distances
        mag = mag * np.sqrt(cos_psi)
    return mag


def near_field_response(geometry, point, amp=AmplitudeModel.PHASE_ONLY):
    """Unnormalized spherical-wave response: ``a_n exp(-j k d_n)``."""
    d = element_distances(geometry, point)
    k = 2.0 * math.pi / geometry.wavelength
    return _element_amplitudes(geometry, point, d, amp) * np.exp(-1j * k * d)


def near_field_steering(geometry, point, amp=AmplitudeModel.PHASE_ONLY):
    """Unit-norm spherical-wavefront steering vector; the amplitude taper is kept relatively."""
    v = near_field_response(geometry, point, amp)
    return SteeringVector(v / np.linalg.norm(v), "unit-norm")


def far_field_response(geometry, azimuth, elevation):
    """Unnormalized planar-wave response with unit-modulus entries."""
    # propagation direction is from the source towards the array
    k_hat = -unit_direction(azimuth, elevation)
    k = 2.0 * math.pi / geometry.wavelength
    return np.exp(-1j * k * (geometry.positions @ k_hat))


def far_field_steering(geometry, azimuth, elevation):
    v = far_field_response(geometry, azimuth, elevation)
    return SteeringVector(v / math.sqrt(v.shape[0]), "unit-norm")


def steering_matrix(geometry, points, model=ChannelModel.NEAR_FIELD, amp=AmplitudeModel.PHASE_ONLY):
    """Stack unit-modulus (phase-only) or tapered responses as columns, one per point.

    Columns are not normalized: phase-only columns have norm ``sqrt(N)``.
    """
    model = ChannelModel(model)
    cols = []
    for p in points:
        if model is ChannelModel.NEAR_FIELD:
            cols.append(near_field_response(geometry, p, amp))
        else:
            cols.append(far_field_response(geometry, p.azimuth, p.elevation))
    return np.stack(cols, axis=1)


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """K x N downlink channel matrix with the model that produced it."""

    matrix: np.ndarray
    model: ChannelModel
    amplitude_model: AmplitudeModel
    ue_points: tuple = field(default_factory=tuple)

    @property
    def n_users(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.matrix.shape[1]


def build_channels(
    geometry: ArrayGeometry,
    ue_points: Sequence[SourcePoint],
    model=ChannelModel.NEAR_FIELD,
    amp=AmplitudeModel.PHASE_ONLY,
    reference_distance: float = 30.0,
    pathloss_reference_db: float = 0.0,
) -> ChannelSet:
    """
    Deterministic line-of-sight channels, one row per UE.

    Element magnitudes follow free-space spreading relative to
    ``reference_distance``: a UE there sees unit per-element gain (so a
    phase-only row has squared norm N), further attenuated by
    ``pathloss_reference_db``. Phase-only and far-field rows use the UE range
    for the spreading; the tapered models use the per-element distance.
    """
    ue_points = tuple(ue_points)
    if not ue_points:
        raise InvalidArgumentError("at least one UE point is required")
    if not reference_distance > 0:
        raise InvalidArgumentError("reference_distance must be positive")
    model = ChannelModel(model)
    amp = AmplitudeModel(amp)
    anchor = 10.0 ** (-pathloss_reference_db / 20.0)
    rows = []
    for p in ue_points:
        if model is ChannelModel.FAR_FIELD:
            row = (reference_distance / p.range) * far_field_response(geometry, p.azimuth, p.elevation)
        elif amp is AmplitudeModel.PHASE_ONLY:
            row = (reference_distance / p.range) * near_field_response(geometry, p, amp)
        else:
            row = reference_distance * near_field_response(geometry, p, amp)
        rows.append(anchor * row)
    return ChannelSet(np.vstack(rows), model, amp, ue_points)


def far_field_counterpart(channels: ChannelSet, geometry: ArrayGeometry, **kwargs) -> ChannelSet:
    """Planar-wavefront channels for the same UE angles; ranges only set the gain."""
    return build_channels(geometry, channels.ue_points, ChannelModel.FAR_FIELD,
                          channels.amplitude_model, **kwargs)
