"""Exception taxonomy shared across the package."""


class EulerscopeError(Exception):
    """Base class for all package errors."""


class ConfigurationError(EulerscopeError):
    """Invalid configuration, mismatched grids, or out-of-band requests."""


class NonSolvableSourceError(EulerscopeError):
    """Poisson source with a nonzero mean; no periodic solution exists."""


class GaugeError(EulerscopeError):
    """Pressure source developed a nonzero mean; indicates an upstream bug."""


class ConsistencyError(EulerscopeError):
    """Two redundant computation paths disagreed beyond tolerance."""


class NumericalInstabilityError(EulerscopeError):
    """Non-finite values or runaway growth; the run must abort."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class EmptyBallError(EulerscopeError):
    """Requested ball contains no grid node."""


class NotReadyError(EulerscopeError):
    """Not enough history (or too coarse a cadence) for the requested stencil."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class SeriesParseError(EulerscopeError):
    """Malformed norm-series CSV."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number
