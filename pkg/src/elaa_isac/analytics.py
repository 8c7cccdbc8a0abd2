"""
Array-gain and steering-correlation curves along range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .propagation import (
    AmplitudeModel,
    SourcePoint,
    _element_amplitudes,
    element_distances,
    near_field_steering,
)


@dataclass(frozen=True)
class CurvePoint:
    abscissa: float
    value: float

    @property
    def db(self) -> float:
        return 10.0 * math.log10(self.value) if self.value > 0 else -math.inf


def to_db(values):
    values = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(values)


def normalized_array_gain(geometry, distance, amp=AmplitudeModel.APERTURE_LOSS):
    """
    Coherent array gain at a boresight point, relative to N ideal reference elements.

    Each element's received amplitude is phase-aligned and summed; the sum is
    compared with N copies of the amplitude seen by a single element placed at
    the array center. The ratio tends to 1 in the far field and drops below 1
    when the spread of path lengths and incidence angles across the aperture
    matters.
    """
    if not distance > 0:
        raise InvalidArgumentError(f"distance must be positive, got {distance!r}")
    point = SourcePoint(float(distance))
    d = element_distances(geometry, point)
    a = _element_amplitudes(geometry, point, d, amp)
    # center element: distance = range, normal incidence
    a_ref = 1.0 if AmplitudeModel(amp) is AmplitudeModel.PHASE_ONLY else 1.0 / distance
    n = geometry.n_antennas
    # dividing by a_ref first keeps the terms O(1)
    coherent = math.fsum(a / a_ref)
    return coherent * coherent / (n * n)


def array_gain_curve(geometry, distances, amp=AmplitudeModel.APERTURE_LOSS):
    return [CurvePoint(float(r), normalized_array_gain(geometry, r, amp)) for r in distances]


def steering_correlation(geometry, point_a, point_b):
    """Power correlation ``|a^H b|**2`` of unit-norm phase-only near-field steering vectors."""
    a = near_field_steering(geometry, point_a).entries
    b = near_field_steering(geometry, point_b).entries
    c = abs(np.vdot(a, b)) ** 2
    return min(1.0, float(c))


def correlation_range_sweep(geometry, anchor, ranges):
    """Correlation between ``anchor`` and a second point moved along the anchor's direction."""
    a = near_field_steering(geometry, anchor).entries
    out = []
    for r in ranges:
        b = near_field_steering(geometry, anchor.at_range(float(r))).entries
        out.append(CurvePoint(float(r), min(1.0, float(abs(np.vdot(a, b)) ** 2))))
    return out


def local_maxima(values):
    """Indices of strict interior local maxima of a 1-D sequence."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return np.array([], dtype=int)
    mid = v[1:-1]
    return np.nonzero((mid > v[:-2]) & (mid >= v[2:]))[0] + 1
