"""Exception hierarchy shared across environments, protocol, and wire layers.

Every error that can be echoed to an agent carries a stable machine-readable
``code`` so clients can branch on it without parsing prose.
"""


class PhysprobeError(Exception):
    """Base class for all library errors."""

    code = "error"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code

    @property
    def message(self) -> str:
        return str(self)


class ConfigurationError(PhysprobeError):
    """Invalid static configuration (grid sizes, factors, level maps)."""

    code = "configuration"


class ArgumentError(PhysprobeError):
    """Invalid runtime argument to a numeric routine."""

    code = "argument"


class SingularMatrixError(PhysprobeError):
    """Matrix inversion rejected: determinant below the singularity floor."""

    code = "singular_matrix"


class InitializationError(PhysprobeError):
    """Environment initial-state construction failed (e.g. overcrowded box)."""

    code = "initialization"


class NormalizationError(PhysprobeError):
    """Field cannot be normalized (zero or non-finite norm)."""

    code = "normalization"


class NumericalBlowupError(PhysprobeError):
    """Simulation state became non-finite; carries the offending step index."""

    code = "numerical_blowup"

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class ProtocolError(PhysprobeError):
    """Agent-visible protocol violation with a machine-readable code."""

    code = "protocol"


class ParseError(ProtocolError):
    code = "parse"


class MissingFieldError(ProtocolError):
    code = "missing_field"


class UnknownFieldError(ProtocolError):
    code = "unknown_field"


class EmptySelectionError(ProtocolError):
    code = "empty_selection"


class InvalidObjectError(ProtocolError):
    code = "invalid_object"


class InvalidCoordinateError(ProtocolError):
    code = "invalid_coordinate"


class InvalidParticleError(ProtocolError):
    code = "invalid_particle"


class InvalidQualityError(ProtocolError):
    code = "invalid_quality"


class InvalidTimeDeltaError(ProtocolError):
    code = "invalid_time_delta"


class InvalidPredictionError(ProtocolError):
    code = "invalid_prediction"


class InsufficientBudget(ProtocolError):
    """Charge rejected: it would push spend past the ledger total."""

    code = "insufficient_budget"


class TimeLimitExceeded(ProtocolError):
    """Requested advance would push the clock past the measurement ceiling."""

    code = "time_limit_exceeded"


class TrialLimitError(ProtocolError):
    code = "trial_limit"


class ObservationLimitError(ProtocolError):
    code = "observation_limit"


class TransportError(PhysprobeError):
    """Wire-level failure (connection refused, broken stream)."""

    code = "transport"
