"""
Radar cross section of a flat circular disk.

The near-field value comes from a scalar physical-optics integral: a point
source at the array center illuminates a perfectly conducting disk with a
spherical wave, the induced currents reradiate back to the source, and the
returned field is converted to an equivalent cross section

    sigma(r) = 4 pi r**2 |E_s|**2 / |E_i(r)|**2
             = (k**2 / pi) |sum_m w_m exp(-2jk (R_m - r)) cos(theta_m) (r / R_m)**2|**2

with R_m the distance to quadrature node m and theta_m its incidence angle.
As r grows every R_m -> r and the sum tends to the disk area, recovering
``4 pi**3 a**4 / lambda**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, ResolutionError
from .propagation import SourcePoint

MIN_SAMPLES_PER_RADIUS = 8
MIN_SAMPLES_PER_WAVELENGTH = 10


def far_field_rcs_disk(radius, wavelength):
    """Closed-form far-field RCS ``4 pi**3 a**4 / lambda**2`` in m^2."""
    if not (radius > 0 and wavelength > 0):
        raise InvalidArgumentError("radius and wavelength must be positive")
    return 4.0 * math.pi**3 * radius**4 / wavelength**2


def disk_fraunhofer_distance(radius, wavelength):
    """Far-field boundary of the disk itself, using its diameter as aperture."""
    return 2.0 * (2.0 * radius) ** 2 / wavelength


@dataclass(frozen=True)
class DiskTarget:
    radius: float
    center: SourcePoint
    facing: tuple | None = None  # unit normal; None faces the array center

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidArgumentError("disk radius must be positive")

    def normal(self) -> np.ndarray:
        if self.facing is None:
            c = self.center.cartesian
            return -c / np.linalg.norm(c)
        n = np.asarray(self.facing, dtype=float)
        return n / np.linalg.norm(n)


@dataclass(frozen=True, eq=False)
class QuadratureMesh:
    """Polar product rule on the disk: Gauss-Legendre in radius, uniform in angle."""

    radius: float
    samples_per_radius: int
    samples_per_circle: int
    rho: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def n_points(self) -> int:
        return self.weights.size

    @classmethod
    def build(cls, radius, samples_per_radius, samples_per_circle=None):
        if not radius > 0:
            raise InvalidArgumentError("radius must be positive")
        n_r = int(samples_per_radius)
        if n_r < 1:
            raise InvalidArgumentError("samples_per_radius must be positive")
        n_phi = int(samples_per_circle) if samples_per_circle else max(16, 4 * n_r)
        x, w = np.polynomial.legendre.leggauss(n_r)
        rho_1d = 0.5 * radius * (x + 1.0)
        w_r = 0.5 * radius * w * rho_1d
        phi_1d = 2.0 * math.pi * np.arange(n_phi) / n_phi
        rho, phi = np.meshgrid(rho_1d, phi_1d, indexing="ij")
        weights = np.repeat(w_r, n_phi) * (2.0 * math.pi / n_phi)
        return cls(float(radius), n_r, n_phi, rho.ravel(), phi.ravel(), weights)

    @classmethod
    def for_wavelength(cls, radius, wavelength, oversample=1.0):
        """Smallest mesh that passes the resolution check, times ``oversample``."""
        n_r = max(MIN_SAMPLES_PER_RADIUS, math.ceil(MIN_SAMPLES_PER_WAVELENGTH * radius / wavelength))
        n_r = math.ceil(n_r * oversample)
        n_phi = max(16, math.ceil(MIN_SAMPLES_PER_WAVELENGTH * 2.0 * math.pi * radius / wavelength * oversample))
        return cls.build(radius, n_r, n_phi)

    def refined(self, factor=2):
        return QuadratureMesh.build(self.radius, self.samples_per_radius * factor,
                                    self.samples_per_circle * factor)

    def check(self, wavelength):
        if self.samples_per_radius < MIN_SAMPLES_PER_RADIUS:
            raise ResolutionError(f"need >= {MIN_SAMPLES_PER_RADIUS} samples per radius")
        if self.samples_per_radius < MIN_SAMPLES_PER_WAVELENGTH * self.radius / wavelength:
            raise ResolutionError(
                f"mesh has {self.samples_per_radius * wavelength / self.radius:.2f} samples per "
                f"wavelength, need >= {MIN_SAMPLES_PER_WAVELENGTH}"
            )


def _in_plane_basis(normal):
    helper = np.array([0.0, 0.0, 1.0]) if abs(normal[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = np.cross(normal, helper)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    return u, v


def near_field_rcs_disk(target: DiskTarget, wavelength, mesh: QuadratureMesh | None = None):
    """Monostatic physical-optics RCS (m^2) of ``target`` seen from the array center."""
    if not wavelength > 0:
        raise InvalidArgumentError("wavelength must be positive")
    if mesh is None:
        mesh = QuadratureMesh.for_wavelength(target.radius, wavelength)
    elif not math.isclose(mesh.radius, target.radius, rel_tol=1e-12):
        raise InvalidArgumentError("mesh radius does not match target radius")
    mesh.check(wavelength)

    k = 2.0 * math.pi / wavelength
    c = target.center.cartesian
    r = target.center.range
    n = target.normal()
    u, v = _in_plane_basis(n)
    local = np.cos(mesh.phi)[:, None] * u + np.sin(mesh.phi)[:, None] * v
    q = c[None, :] + mesh.rho[:, None] * local
    R = np.linalg.norm(q, axis=1)
    # R - r without cancellation: (|q|^2 - r^2) / (|q| + r)
    excess = (2.0 * mesh.rho * (local @ c) + mesh.rho**2) / (R + r)
    cos_inc = np.abs(q @ n) / R
    integrand = mesh.weights * cos_inc * (r / R) ** 2 * np.exp(-2j * k * excess)
    total = np.sum(integrand)
    return float(k * k / math.pi * abs(total) ** 2)


def rcs_range_sweep(radius, wavelength, ranges, mesh=None):
    """Rows of ``(range_m, near_field_m2, far_field_m2)`` for a disk facing the array on boresight."""
    if mesh is None:
        mesh = QuadratureMesh.for_wavelength(radius, wavelength)
    ff = far_field_rcs_disk(radius, wavelength)
    rows = []
    for rng in ranges:
        target = DiskTarget(radius, SourcePoint(float(rng)))
        rows.append((float(rng), near_field_rcs_disk(target, wavelength, mesh), ff))
    return rows
