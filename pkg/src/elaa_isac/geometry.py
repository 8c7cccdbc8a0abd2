"""
Uniform planar array (UPA) construction and Fraunhofer boundary distances.

Coordinate convention used throughout the package: the array lies in the
x-z plane centered at the origin, boresight points along +y. Azimuth is
measured in the x-y plane away from +y (towards +x), elevation is measured
up from the x-y plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryOverlapError, InvalidArgumentError

SPEED_OF_LIGHT = 2.998e8  # m/s


def wavelength_of(carrier_frequency: float) -> float:
    if not carrier_frequency > 0:
        raise InvalidArgumentError(f"carrier frequency must be positive, got {carrier_frequency!r}")
    return SPEED_OF_LIGHT / carrier_frequency


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """
    Square UPA of ``side_count x side_count`` elements.

    Attributes
    ----------
    carrier_frequency : float
        Hz.
    side_count : int
        Elements per side; the array holds ``side_count**2`` elements.
    element_size : float
        Edge of the square element, m.
    spacing : float
        Center-to-center element spacing, m.
    positions : np.ndarray
        ``(N, 3)`` element centers in m, read-only.
    """

    carrier_frequency: float
    side_count: int
    element_size: float
    spacing: float
    positions: np.ndarray = field(repr=False)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def n_antennas(self) -> int:
        return self.side_count * self.side_count

    @property
    def aperture_side(self) -> float:
        return (self.side_count - 1) * self.spacing + self.element_size

    @property
    def aperture_diagonal(self) -> float:
        return math.sqrt(2.0) * self.aperture_side


def _grid_positions(side_count: int, spacing: float) -> np.ndarray:
    offsets = (np.arange(side_count) - (side_count - 1) / 2.0) * spacing
    # row-major over (z index, x index)
    zz, xx = np.meshgrid(offsets, offsets, indexing="ij")
    pos = np.stack([xx.ravel(), np.zeros(side_count * side_count), zz.ravel()], axis=1)
    pos.setflags(write=False)
    return pos


def _make(carrier_frequency, side_count, element_size, spacing):
    return ArrayGeometry(
        carrier_frequency=float(carrier_frequency),
        side_count=int(side_count),
        element_size=float(element_size),
        spacing=float(spacing),
        positions=_grid_positions(int(side_count), float(spacing)),
    )


def build_upa(carrier_frequency, side_count, element_size_frac=0.25, spacing_frac=0.5):
    """Build a square UPA with element size and spacing given as fractions of the wavelength.

    >>> build_upa(3.5e9, 20).n_antennas
    400
    """
    lam = wavelength_of(carrier_frequency)
    if int(side_count) != side_count or side_count < 1:
        raise InvalidArgumentError(f"side_count must be a positive integer, got {side_count!r}")
    if not (element_size_frac > 0 and spacing_frac > 0):
        raise InvalidArgumentError("element size and spacing fractions must be positive")
    if element_size_frac > spacing_frac:
        raise GeometryOverlapError(
            f"element size {element_size_frac} lambda exceeds spacing {spacing_frac} lambda"
        )
    return _make(carrier_frequency, side_count, element_size_frac * lam, spacing_frac * lam)


def build_upa_fixed_aperture(carrier_frequency, aperture_side, element_size_frac=0.25,
                             max_spacing_frac=0.5):
    """
    Pack as many elements as fit in a square of edge ``aperture_side`` (m).

    The side count is the largest one whose spacing is not below
    ``max_spacing_frac`` wavelengths; the spacing is then stretched so the
    outer element edges land exactly on the requested aperture.
    """
    lam = wavelength_of(carrier_frequency)
    d_a = element_size_frac * lam
    if not aperture_side > d_a:
        raise InvalidArgumentError("aperture must exceed one element")
    if element_size_frac > max_spacing_frac:
        raise GeometryOverlapError("element size exceeds spacing")
    side = int(math.floor((aperture_side - d_a) / (max_spacing_frac * lam) + 1e-9)) + 1
    spacing = (aperture_side - d_a) / (side - 1) if side > 1 else max_spacing_frac * lam
    return _make(carrier_frequency, side, d_a, spacing)


def build_upa_spanning(carrier_frequency, side_count, aperture_side, element_size_frac=0.25):
    """
    Square UPA of ``side_count**2`` elements whose outer edges span ``aperture_side`` (m).

    The spacing follows from the aperture and may exceed half a wavelength.
    """
    lam = wavelength_of(carrier_frequency)
    if int(side_count) != side_count or side_count < 2:
        raise InvalidArgumentError(f"side_count must be an integer >= 2, got {side_count!r}")
    d_a = element_size_frac * lam
    spacing = (aperture_side - d_a) / (side_count - 1)
    if not spacing > 0:
        raise InvalidArgumentError("aperture must exceed one element")
    if d_a > spacing:
        raise GeometryOverlapError(f"{side_count} elements of {d_a:.4g} m do not fit in {aperture_side} m")
    return _make(carrier_frequency, side_count, d_a, spacing)


def fraunhofer_distance_from_aperture(aperture_side, wavelength):
    """Aperture-based boundary ``2 D**2 / lambda`` with D the aperture diagonal."""
    if not (aperture_side > 0 and wavelength > 0):
        raise InvalidArgumentError("aperture and wavelength must be positive")
    diagonal = math.sqrt(2.0) * aperture_side
    return 2.0 * diagonal * diagonal / wavelength


def fraunhofer_distance(geometry: ArrayGeometry) -> float:
    """Fraunhofer array distance of ``geometry`` in m, based on the aperture diagonal."""
    return fraunhofer_distance_from_aperture(geometry.aperture_side, geometry.wavelength)


def fraunhofer_element_formula(n_antennas, element_dim, wavelength):
    """Element-count form ``2 N d_a**2 / lambda``; exactly linear in N."""
    if not (n_antennas > 0 and element_dim > 0 and wavelength > 0):
        raise InvalidArgumentError("n_antennas, element_dim and wavelength must be positive")
    return n_antennas * (2.0 * element_dim * element_dim / wavelength)
