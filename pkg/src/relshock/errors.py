"""Exception types shared across the package."""


class RelshockError(Exception):
    """Base class for all package errors."""


class NegativeDiscriminant(RelshockError):
    """Conserved pair lies outside the physical range u0 > |u1|."""


class NonpositiveDensity(RelshockError):
    pass


class NonPhysicalInput(RelshockError):
    pass


class NonPhysicalState(RelshockError):
    """An evolved conserved state left the physical region (time step too
    large or corrupted data)."""


class NoConvergence(RelshockError):
    """Bisection hit the iteration cap before reaching tolerance."""


class SuperluminalCoordinate(RelshockError):
    """|r/t| >= 1 requested from the self-similar cosmology solution."""


class OutsideDomain(RelshockError):
    """Requested point is outside a model's domain of validity."""


class HorizonEncountered(RelshockError):
    """The radial metric component dropped to ~0; the coordinate system
    cannot represent the solution past this point."""


class BorderNotFound(RelshockError):
    pass


class GridExhausted(RelshockError):
    """Boundary chopping consumed the grid down to the configured minimum."""


class DegenerateField(RelshockError):
    pass


class ShapeMismatch(RelshockError):
    pass


class SupportViolation(RelshockError):
    """Test function support exceeds the simulated domain."""


class ParseError(RelshockError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(RelshockError):
    pass
