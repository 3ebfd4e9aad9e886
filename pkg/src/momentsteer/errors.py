"""Exception hierarchy for moment-based ensemble steering."""


class SteeringError(Exception):
    """Base class for every error raised by this package."""

    #: process exit status used by the command-line front end
    exit_code = 1


class OrderMismatch(SteeringError, ValueError):
    pass


class UnsupportedFamily(SteeringError, ValueError):
    pass


class EmptyEnsemble(SteeringError, ValueError):
    pass


class LengthMismatch(SteeringError, ValueError):
    pass


class NoFeasibleStart(SteeringError):
    """No step before the horizon makes the moment error Hankel-positive."""

    exit_code = 3


class ControlInfeasible(SteeringError):
    """Some planned control moment sequence is not Hankel-positive."""

    exit_code = 4


class WeightSumInvalid(SteeringError, ValueError):
    exit_code = 4


class RetryBudgetExceeded(ControlInfeasible):
    pass


class RealizationError(SteeringError):
    exit_code = 5


class NotInteriorPoint(RealizationError, ValueError):
    pass


class SigmaNotPD(RealizationError, ValueError):
    pass


class LineSearchStalled(RealizationError):
    pass


class MaxIterations(RealizationError):
    pass


class OutOfSupport(RealizationError, ValueError):
    pass


class MomentsInfeasible(SteeringError, ValueError):
    exit_code = 6


class EntropyOrderViolated(SteeringError):
    exit_code = 6


class SamplingError(SteeringError):
    exit_code = 7


class UnboundedRatio(SamplingError):
    pass


class AcceptanceStalled(SamplingError):
    pass


class ConfigError(SteeringError):
    exit_code = 2


class ParseError(ConfigError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field


class ValidationError(ConfigError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid run config:\n  " + "\n  ".join(self.problems))


class StepError(SteeringError):
    """Wraps an engine failure with the time step at which it happened."""

    def __init__(self, step, cause):
        super().__init__(f"step {step}: {type(cause).__name__}: {cause}")
        self.step = step
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
