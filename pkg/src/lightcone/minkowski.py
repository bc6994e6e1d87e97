"""Coordinate charts on Minkowski space and points of the past lightcone.

Conventions: metric signature (-, +, +, +); optical functions
u = (t - r)/2, v = (t + r)/2; polar angles theta in (0, pi), phi in [0, 2*pi)
(phi is wrapped on input). The past lightcone of the origin is the level set
v = 0 with u < 0.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChartDegeneracyError, DomainError

#: tolerance below which a point counts as sitting on the axis r sin(theta)=0
AXIS_TOL = 1e-14


@dataclass(frozen=True)
class EventRect:
    """Event in rectangular coordinates (x0 = t, x1, x2, x3)."""

    x0: float
    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.as_tuple()):
            raise DomainError("event coordinates must be finite")

    def as_tuple(self):
        return (self.x0, self.x1, self.x2, self.x3)

    def as_array(self):
        return np.array(self.as_tuple())

    def spatial_radius(self):
        return math.sqrt(self.x1 ** 2 + self.x2 ** 2 + self.x3 ** 2)

    def cone_residual(self):
        """-x0² + |x⃗|², zero exactly on the lightcone of the origin."""
        return -self.x0 ** 2 + self.x1 ** 2 + self.x2 ** 2 + self.x3 ** 2


@dataclass(frozen=True)
class EventDoubleNull:
    """Event in double null coordinates (u, v, theta, phi), r = v - u > 0."""

    u: float
    v: float
    theta: float
    phi: float

    def __post_init__(self):
        if self.v - self.u <= 0.0:
            raise ChartDegeneracyError(
                f"double null chart needs r = v - u > 0, got {self.v - self.u}")
        if not 0.0 < self.theta < math.pi:
            raise ChartDegeneracyError(f"theta={self.theta} outside (0, pi)")
        object.__setattr__(self, "phi", self.phi % (2.0 * math.pi))


@dataclass(frozen=True)
class Covector4:
    """Covector a_mu dx^mu; used for hyperplane normals."""

    a0: float
    a1: float
    a2: float
    a3: float

    def as_array(self):
        return np.array([self.a0, self.a1, self.a2, self.a3])

    def is_zero(self):
        return self.a0 == self.a1 == self.a2 == self.a3 == 0.0


def causal_norm_sq(a):
    """Inverse-metric norm of a covector: -a0² + a1² + a2² + a3²."""
    return -a.a0 ** 2 + a.a1 ** 2 + a.a2 ** 2 + a.a3 ** 2


def rect_to_double_null(event):
    """Convert rectangular to double null coordinates.

    Raises
    ------
    ChartDegeneracyError
        At the spatial origin or on the x3 axis, where the polar angles
        degenerate.
    """
    r = event.spatial_radius()
    if r <= AXIS_TOL:
        raise ChartDegeneracyError("polar chart degenerate at spatial origin")
    ct = event.x3 / r
    if 1.0 - abs(ct) <= AXIS_TOL:
        raise ChartDegeneracyError("polar chart degenerate on the x3 axis")
    theta = math.acos(ct)
    phi = math.atan2(event.x2, event.x1) % (2.0 * math.pi)
    return EventDoubleNull(u=0.5 * (event.x0 - r), v=0.5 * (event.x0 + r),
                           theta=theta, phi=phi)


def double_null_to_rect(event):
    """Inverse of :func:`rect_to_double_null`."""
    r = event.v - event.u
    t = event.v + event.u
    st = math.sin(event.theta)
    return EventRect(t,
                     r * st * math.cos(event.phi),
                     r * st * math.sin(event.phi),
                     r * math.cos(event.theta))


def cone_point(u, theta, phi):
    """Point of the past lightcone C̲₀ at parameter u < 0 and direction (theta, phi).

    Equals (u, -u sinθ cosφ, -u sinθ sinφ, -u cosθ); satisfies the cone
    equation to roundoff.
    """
    if u >= 0.0:
        raise DomainError(f"past cone requires u < 0, got u={u}")
    st = math.sin(theta)
    return EventRect(u, -u * st * math.cos(phi), -u * st * math.sin(phi),
                     -u * math.cos(theta))


def cone_points(u, theta, phi):
    """Vectorized :func:`cone_point`: arrays in, (n, 4) array out."""
    u = np.asarray(u, dtype=np.float64)
    if np.any(u >= 0.0):
        raise DomainError("past cone requires u < 0")
    st, ct = np.sin(theta), np.cos(theta)
    return np.stack([u * np.ones_like(st),
                     -u * st * np.cos(phi),
                     -u * st * np.sin(phi),
                     -u * ct], axis=-1)


def minkowski_dot(p, q):
    """Minkowski inner product of two 4-component arrays (signature -+++)."""
    return -p[..., 0] * q[..., 0] + (p[..., 1:] * q[..., 1:]).sum(axis=-1)
