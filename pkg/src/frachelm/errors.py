"""Exception types shared across the toolkit."""


class FracHelmError(Exception):
    """Base class for all toolkit errors."""


class NonpositiveRadius(FracHelmError):
    """Kernel evaluation requested at r <= 0."""


class QuadratureNotConverged(FracHelmError):
    """Nested quadrature refinements disagree beyond 10x the requested tolerance."""


class KernelTabulationFailed(FracHelmError):
    """A radial kernel sample needed for convolution failed to converge."""


class GridMismatch(FracHelmError):
    """Fields that must share a grid were sampled on different grids."""


class NotContracting(FracHelmError):
    """Picard residuals failed to decrease for three consecutive steps."""


class MaxIterExceeded(FracHelmError):
    """Picard iteration hit the iteration cap before reaching tolerance."""


class PointInsideSupport(FracHelmError):
    """Scattered-field point evaluation requested inside the source box."""


class UnderResolvedPhase(FracHelmError):
    """Oscillatory grid quadrature requested with k*h > 2."""


class NonUnitDirection(FracHelmError):
    """A direction vector is not unit length."""


class CoverageGap(FracHelmError):
    """A required frequency-lattice point has no probe/measurement."""


class ConfigParseError(FracHelmError):
    """Malformed config text; carries a line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigValidationError(FracHelmError):
    """Config parsed but violates a module precondition."""
