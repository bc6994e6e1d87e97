"""Sections of the past lightcone cut out by affine hyperplanes.

A hyperplane {a·x = c} meets the past cone where f(θ, φ) = c/(a⃗·ω - a0) is
positive and finite (ω the unit direction); the induced graph function is
axisymmetric about the spatial normal, so the section is computed in a
rotated frame with a⃗ along the polar axis and the rotation is carried in
the result. The intrinsic curvature trichotomy (spacelike → round sphere,
null → flat, timelike → hyperbolic) is what :func:`trichotomy_report`
verifies numerically.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import sections, sphere
from .errors import (ConfigurationError, DomainError, EmptySectionError,
                     ResolutionError)
from .minkowski import Covector4, causal_norm_sq

#: causal-norm tolerance for calling a canonical normal null
NULL_TOL = 1e-12

#: default trim (radians) away from blow-up edges before differentiating
EDGE_MARGIN = 0.1


class PlaneClass(str, Enum):
    SPACELIKE = "SpacelikePlane"
    NULL = "NullPlane"
    TIMELIKE = "TimelikePlane"


@dataclass(frozen=True)
class Hyperplane:
    """Affine hyperplane {a·x = c}, stored in canonical form max|a_i| = 1."""

    a: Covector4
    c: float

    def __post_init__(self):
        if self.a.is_zero():
            raise DomainError("hyperplane normal must be nonzero")
        scale = max(abs(self.a.a0), abs(self.a.a1), abs(self.a.a2), abs(self.a.a3))
        if scale != 1.0:
            object.__setattr__(self, "a", Covector4(*(ai / scale for ai in self.a.as_array())))
            object.__setattr__(self, "c", self.c / scale)

    def evaluate(self, points):
        """a·x over an (..., 4) array of rectangular points."""
        return points @ self.a.as_array()


def classify_hyperplane(plane, tol=NULL_TOL):
    """Causal class of the (canonical) normal covector."""
    norm = causal_norm_sq(plane.a)
    if norm < -tol:
        return PlaneClass.SPACELIKE
    if norm > tol:
        return PlaneClass.TIMELIKE
    return PlaneClass.NULL


def _rotation_to_pole(axis_unit, sign):
    """Rotation matrix R with R · axis_unit = sign * ẑ (Rodrigues)."""
    target = np.array([0.0, 0.0, float(sign)])
    ctheta = float(np.dot(axis_unit, target))
    if ctheta > 1.0 - 1e-14:
        return np.eye(3)
    if ctheta < -1.0 + 1e-14:
        # 180 degrees about any axis perpendicular to the target
        return np.diag([1.0, -1.0, -1.0])
    k = np.cross(axis_unit, target)
    s = np.linalg.norm(k)
    k /= s
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + s * K + (1.0 - ctheta) * (K @ K)


@dataclass
class HyperplaneSection:
    """Section of the cone by a hyperplane, in a rotated axisymmetric frame.

    ``rotation`` maps original spatial vectors to the rotated frame in which
    the graph function depends on theta only; ``theta_lo`` is the untrimmed
    domain edge (f blows up there for null/timelike planes).
    """

    plane: Hyperplane
    spec: sections.SectionSpec
    rotation: np.ndarray
    theta_lo: float
    trimmed_lo: float
    full_sphere: bool

    def rect_points(self):
        """Embedded section points in the original rectangular frame."""
        pts = self.spec.embedded_points()
        pts[:, 1:] = pts[:, 1:] @ self.rotation  # rows · R == Rᵀ · columns
        return pts

    def plane_residual(self):
        return float(np.abs(self.plane.evaluate(self.rect_points()) - self.plane.c).max())

    def cone_residual(self):
        pts = self.rect_points()
        return float(np.abs(-pts[:, 0] ** 2 + (pts[:, 1:] ** 2).sum(axis=1)).max())


def intersect_cone(plane, grid, margin=EDGE_MARGIN):
    """Intersect the past cone with a hyperplane.

    Parameters
    ----------
    plane : Hyperplane
    grid : SphereGrid
        Resolution template. A full-sphere intersection is sampled on it
        directly (FullSphere mode); a truncated one is sampled on a fresh
        Chebyshev zone grid with the same n_theta, trimmed by ``margin``
        away from the blow-up edge.
    margin : float
        Trim in radians applied before any differentiation.

    Raises
    ------
    EmptySectionError
        If the plane misses the past cone (or touches it only at the vertex).
    """
    a0 = plane.a.a0
    avec = np.array([plane.a.a1, plane.a.a2, plane.a.a3])
    c = plane.c
    if c == 0.0:
        raise EmptySectionError(
            "plane through the origin meets the cone only along generators")
    A = float(np.linalg.norm(avec))
    sigma = math.copysign(1.0, c)

    if A == 0.0:
        f0 = c / (-a0)
        if f0 <= 0.0:
            raise EmptySectionError("plane does not meet the past cone")
        if grid.mode == sphere.FULL_SPHERE:
            sample_grid = grid
        else:
            sample_grid = sphere.build_grid(sphere.AXISYM_TRUNCATED,
                                            grid.n_theta, 1, grid.theta_min)
        spec = sections.SectionSpec(sample_grid.constant_field(f0),
                                    description="full sphere")
        return HyperplaneSection(plane, spec, np.eye(3), 0.0, 0.0, True)

    axis = avec / A
    # orient the rotated polar axis so the domain contains theta = pi
    for s in (1.0, -1.0):
        if sigma * (-s * A - a0) > 0.0:
            sign = s
            break
    else:
        raise EmptySectionError("plane does not meet the past cone")
    R = _rotation_to_pole(axis, sign)

    def f_of_theta(theta):
        return c / (sign * A * np.cos(theta) - a0)

    ratio = a0 / (sign * A)
    if sigma * (sign * A - a0) > 0.0 and abs(ratio) > 1.0:
        # denominator keeps the right sign on the whole sphere
        theta_lo = 0.0
        full = True
        if grid.mode == sphere.FULL_SPHERE:
            sample_grid = grid
        else:
            sample_grid = sphere.build_grid(sphere.AXISYM_TRUNCATED,
                                            grid.n_theta, 1, grid.theta_min)
    else:
        theta_lo = math.acos(np.clip(ratio, -1.0, 1.0))
        full = False
        lo = theta_lo + margin
        if lo >= np.pi - 1e-3:
            raise EmptySectionError(
                f"trimmed domain [{lo:.4g}, pi] is empty; "
                "section too thin for this margin")
        sample_grid = sphere.zone_grid(lo, np.pi, grid.n_theta)

    th, ph = sample_grid.node_angles()
    fvals = f_of_theta(th)
    if not np.all(np.isfinite(fvals)) or fvals.min() <= 0.0:
        raise EmptySectionError("graph function not positive on the domain")
    desc = "full sphere" if full else f"theta in [{sample_grid.theta_min:.6g}, pi] (rotated frame)"
    spec = sections.SectionSpec(sample_grid.field(fvals), noncompact=not full,
                                description=desc)
    return HyperplaneSection(plane, spec, R, theta_lo,
                             0.0 if full else sample_grid.theta_min, full)


def random_section_plane(rng, margin=EDGE_MARGIN, min_width=0.6,
                         max_dynamic_range=100.0, max_tries=500):
    """Draw a random hyperplane whose cone section is numerically tame.

    Rejection rules: the (rotated) section must contain the polar cap around
    θ = π, keep a trimmed domain at least ``min_width`` wide, and have
    max f / min f below ``max_dynamic_range`` (sections grazing their
    blow-up edge are not resolvable at reasonable n). Used by the
    statistical curvature-constancy checks.
    """
    for _ in range(max_tries):
        a = rng.normal(size=4)
        c = float(2.0 * rng.normal())
        if c == 0.0 or np.abs(a).max() == 0.0:
            continue
        try:
            plane = Hyperplane(Covector4(*a), c)
        except DomainError:
            continue
        a0 = plane.a.a0
        avec = np.array([plane.a.a1, plane.a.a2, plane.a.a3])
        A = float(np.linalg.norm(avec))
        if A < 1e-9:
            continue
        sigma = math.copysign(1.0, plane.c)
        for s in (1.0, -1.0):
            if sigma * (-s * A - a0) > 0.0:
                break
        else:
            continue
        if sigma * (s * A - a0) > 0.0:
            lo = 0.0
        else:
            lo = math.acos(np.clip(a0 / (s * A), -1.0, 1.0)) + margin
        if lo > np.pi - min_width:
            continue
        probe = np.linspace(max(lo, 1e-6), np.pi, 257)
        f = plane.c / (s * A * np.cos(probe) - a0)
        if f.min() <= 0.0 or f.max() / f.min() > max_dynamic_range:
            continue
        return plane
    raise ConfigurationError("could not draw an admissible random hyperplane")


def trichotomy_report(plane, grid, margin=EDGE_MARGIN, tol=1e-8, n_max=2048):
    """Curvature trichotomy data for one hyperplane section.

    Returns a dict with the causal class, the measured (near-constant) Gauss
    curvature and its max-min deviation, the expansion extrema and the
    trapped classification. The sign of K must match the class: spacelike
    positive, null zero (within tol), timelike negative.

    ``grid`` seeds the resolution; when the graph function fails the
    resolution gate (sections whose blow-up edge sits close to the trimmed
    domain) n_theta is escalated by 1.5x up to ``n_max``. Start moderate:
    collocation roundoff grows with n, so oversized grids cost accuracy on
    the easy sections.
    """
    cls = classify_hyperplane(plane)
    n = grid.n_theta
    template = grid
    while True:
        section = intersect_cone(plane, template, margin)
        try:
            geom = sections.compute_geometry(section.spec, tol=tol)
            break
        except ResolutionError:
            if n >= n_max:
                raise
            n = min(int(n * 1.5), n_max)
            if grid.mode == sphere.FULL_SPHERE:
                template = sphere.build_grid(sphere.FULL_SPHERE, n, grid.n_phi)
            else:
                template = sphere.build_grid(sphere.AXISYM_TRUNCATED, n, 1,
                                             grid.theta_min)
    K = geom.K.values
    K_value = float(np.median(K))
    K_dev = float(K.max() - K.min())
    th = section.spec.grid.theta_nodes
    interior = th >= section.spec.grid.theta_min + EDGE_MARGIN
    if section.full_sphere or not interior.any():
        K_dev_interior = K_dev
    else:
        Ki = K.reshape(section.spec.grid.n_theta, -1)[interior]
        K_dev_interior = float(Ki.max() - Ki.min())
    if cls is PlaneClass.SPACELIKE:
        sign_ok = K_value > tol
    elif cls is PlaneClass.TIMELIKE:
        sign_ok = K_value < -tol
    else:
        sign_ok = abs(K_value) <= tol
    return {
        "class": cls.value,
        "K_value": K_value,
        "K_deviation": K_dev,
        "K_deviation_interior": K_dev_interior,
        "K_sign_matches_class": bool(sign_ok),
        "expansions": geom.margins,
        "classification": geom.classification.value,
        "noncompact": geom.noncompact,
        "domain": section.spec.description,
        "n_theta_used": section.spec.grid.n_theta,
        "plane": {"a": list(plane.a.as_array()), "c": plane.c},
    }
