"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration/domain problems
are validation failures (exit 1), grid mismatches are usage errors (exit 2)
and failed numerical checks are acceptance failures (exit 3).
"""


class LightconeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(LightconeError):
    """Invalid construction parameters (grid sizes, ranges, malformed config)."""


class GridMismatchError(LightconeError):
    """Fields passed to one operation live on different grids."""


class DomainError(LightconeError):
    """Input outside the mathematical domain of an operation."""


class ChartDegeneracyError(DomainError):
    """Point where the polar/double-null chart breaks down (axis or origin)."""


class ResolutionError(LightconeError):
    """Grid too coarse to resolve the requested field or cap."""


class EmptySectionError(LightconeError):
    """Hyperplane does not intersect the past lightcone in a section."""


class BlowUpError(DomainError):
    """Evaluation at a point where the surface escapes to infinity."""


class FocusingError(LightconeError):
    """Expansion blew up to -infinity inside the integration interval."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location
