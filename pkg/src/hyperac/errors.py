"""Exception types raised across the package."""


class HyperACError(Exception):
    """Base class for all package errors."""


class InvalidPotentialError(HyperACError, ValueError):
    """A potential or damping function violates its structural requirements."""


class ConfigError(HyperACError, ValueError):
    """Inadmissible parameters or a malformed experiment configuration."""


class AdmissibilityError(ConfigError):
    """The grid is too coarse for the kinetic scheme (q = lambda*dt > 1)."""

    def __init__(self, message: str, min_cells: int):
        super().__init__(message)
        self.min_cells = min_cells


class BlowUpError(HyperACError, ArithmeticError):
    """The time stepper produced a non-finite value."""

    def __init__(self, cell: int, t: float):
        super().__init__(f"non-finite value in cell {cell} at t={t!r}")
        self.cell = cell
        self.t = t


class CertificateError(HyperACError):
    """A layer certificate could not be produced for some jump."""

    def __init__(self, message: str, jump: float | None = None):
        super().__init__(message)
        self.jump = jump
