"""Planar geometry and Poisson point-process sampling around a typical transmitter.

Positions are expressed relative to the transmitter at the origin with the
destination direction along +x, so the angular coordinate of a point is its
deviation from the line towards the destination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from .errors import InvalidParameterError, NoRelayError


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidParameterError(f"non-finite point ({self.x}, {self.y})")

    @classmethod
    def from_polar(cls, r: float, theta: float) -> "Point2":
        return cls(r * math.cos(theta), r * math.sin(theta))

    @property
    def r(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def theta(self) -> float:
        """Angle in (-pi, pi]."""
        t = math.atan2(self.y, self.x)
        return math.pi if t == -math.pi else t

    def polar(self) -> Tuple[float, float]:
        return self.r, self.theta


@dataclass(frozen=True)
class AnnularSector:
    """Sector of full opening ``angle`` about +x, restricted to inner <= r <= outer.

    Boundary points (on either arc or either edge) are inside.
    """

    angle: float
    inner_radius: float
    outer_radius: float = math.inf

    def __post_init__(self):
        if not (0.0 < self.angle <= 2.0 * math.pi):
            raise InvalidParameterError(f"sector angle must lie in (0, 2pi], got {self.angle}")
        if not (math.isfinite(self.inner_radius) and self.inner_radius >= 0.0):
            raise InvalidParameterError(f"inner radius must be finite and >= 0, got {self.inner_radius}")
        if not self.outer_radius > self.inner_radius:
            raise InvalidParameterError("outer radius must exceed inner radius")

    @property
    def area(self) -> float:
        return 0.5 * self.angle * (self.outer_radius ** 2 - self.inner_radius ** 2)

    def contains(self, p: Point2) -> bool:
        return contains(self, p)

    def contains_polar(self, r, theta):
        """Vectorised membership test on polar coordinates."""
        r = np.asarray(r)
        theta = np.asarray(theta)
        return (r >= self.inner_radius) & (r <= self.outer_radius) & (np.abs(theta) <= 0.5 * self.angle)


@dataclass(frozen=True)
class Disk:
    radius: float

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise InvalidParameterError(f"disk radius must be finite and > 0, got {self.radius}")

    @property
    def area(self) -> float:
        return math.pi * self.radius ** 2

    def contains(self, p: Point2) -> bool:
        return p.r <= self.radius

    def contains_polar(self, r, theta):
        return np.asarray(r) <= self.radius


Region = Union[AnnularSector, Disk]


def contains(region: AnnularSector, p: Point2) -> bool:
    """Radial and angular membership, boundaries included."""
    r, theta = p.polar()
    return (region.inner_radius <= r <= region.outer_radius) and abs(theta) <= 0.5 * region.angle


@dataclass(frozen=True)
class PointField:
    """One realisation of a homogeneous PPP, stored as polar coordinates."""

    r: np.ndarray
    theta: np.ndarray
    density: float
    region: Region

    @property
    def count(self) -> int:
        return int(self.r.size)

    @property
    def xy(self) -> np.ndarray:
        return np.column_stack((self.r * np.cos(self.theta), self.r * np.sin(self.theta)))

    @property
    def points(self) -> List[Point2]:
        return [Point2(float(x), float(y)) for x, y in self.xy]

    def __len__(self):
        return self.count


def _region_bounds(region: Region):
    if isinstance(region, Disk):
        return 0.0, region.radius, 2.0 * math.pi
    if not math.isfinite(region.outer_radius):
        raise InvalidParameterError("cannot sample a PPP on a region of infinite area")
    return region.inner_radius, region.outer_radius, region.angle


def place_uniform(region: Region, u_radius, u_angle):
    """Map uniforms on [0, 1) to uniform positions in ``region`` (inverse transform in r^2)."""
    lo, hi, angle = _region_bounds(region)
    r = np.sqrt(lo * lo + np.asarray(u_radius) * (hi * hi - lo * lo))
    theta = angle * (np.asarray(u_angle) - 0.5)
    return r, theta


def sample_ppp(region: Region, density: float, rng: np.random.Generator) -> PointField:
    """Homogeneous PPP on ``region``: Poisson count, then i.i.d. uniform placement."""
    if not (math.isfinite(density) and density >= 0.0):
        raise InvalidParameterError(f"density must be finite and >= 0, got {density}")
    _region_bounds(region)
    if not region.area > 0.0:
        raise InvalidParameterError("region has zero area")
    n = int(rng.poisson(density * region.area))
    r, theta = place_uniform(region, rng.random(n), rng.random(n))
    return PointField(r=r, theta=theta, density=density, region=region)


def nearest_distance_from_uniform(u, inner_radius: float, angle: float, density: float):
    """Invert the nearest-point distance law of a PPP restricted to r >= inner_radius.

    P(d <= r) = 1 - exp(-density * angle / 2 * (r^2 - inner_radius^2)).
    """
    return np.sqrt(inner_radius ** 2 + 2.0 * -np.log1p(-np.asarray(u)) / (density * angle))


def sample_nearest_in_region(cfg, region, rng: np.random.Generator) -> Tuple[float, float]:
    """Distance and angle of the nearest receiver inside the selection region.

    Exact: the distance comes from CDF inversion and the angle is uniform on
    [-phi/2, phi/2], independent of the distance.  ``cfg`` supplies the node
    density and transmit probability, ``region`` the selection angle and
    reference distance.
    """
    rx_density = cfg.lam * (1.0 - cfg.p)
    if not rx_density > 0.0:
        raise NoRelayError("receiver density is zero; no relay can be found")
    u_d, u_theta = rng.random(2)
    d = float(nearest_distance_from_uniform(u_d, region.r_m, region.phi_sel, rx_density))
    theta = region.phi_sel * (u_theta - 0.5)
    return d, theta
