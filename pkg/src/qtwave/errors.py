"""Exception hierarchy shared by all qtwave modules."""


class QtWaveError(Exception):
    """Base class for errors raised by qtwave."""


class DimensionError(QtWaveError, ValueError):
    """Shapes, site counts or register sizes do not line up."""


class ParameterError(QtWaveError, ValueError):
    """A parameter is outside its admissible range."""


class LayoutError(QtWaveError, ValueError):
    """A register layout does not contain what an operation needs."""


class CapacityError(QtWaveError, MemoryError):
    """A dense representation would exceed the configured budget."""


class NumericalError(QtWaveError, ArithmeticError):
    """Non-convergence, overflow or a degenerate (zero-norm) result."""


class ResourceError(QtWaveError, RuntimeError):
    """Bond dimension exceeded the hard cap during evolution."""


class ConfigError(ParameterError):
    """Invalid run configuration; ``field`` names the offending ``section.key``."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
