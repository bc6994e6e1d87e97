"""Intrinsic and extrinsic geometry of spacelike sections of the Minkowski
lightcone: hyperplane sections and their curvature trichotomy, the marginal
surface built from the sphere Green's function, the localized trapped-surface
construction with its energy threshold, and the short-pulse energy pipeline.
"""

from .backend import BACKEND
from .errors import (BlowUpError, ChartDegeneracyError, ConfigurationError,
                     DomainError, EmptySectionError, FocusingError,
                     GridMismatchError, LightconeError, ResolutionError)
from .sphere import (AXISYM_TRUNCATED, FULL_SPHERE, ScalarField, SphereGrid,
                     build_grid, gradient_sq, integrate, laplacian,
                     sup_on_cap, zone_grid)

__version__ = "0.1.0"

__all__ = [
    "AXISYM_TRUNCATED",
    "BACKEND",
    "BlowUpError",
    "ChartDegeneracyError",
    "ConfigurationError",
    "DomainError",
    "EmptySectionError",
    "FocusingError",
    "FULL_SPHERE",
    "GridMismatchError",
    "LightconeError",
    "ResolutionError",
    "ScalarField",
    "SphereGrid",
    "build_grid",
    "gradient_sq",
    "integrate",
    "laplacian",
    "sup_on_cap",
    "zone_grid",
    "__version__",
]
