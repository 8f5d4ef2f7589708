"""Exception hierarchy shared across the package."""


class HorizonProbeError(Exception):
    """Base class for all errors raised by horizon_probe."""


class DataError(HorizonProbeError):
    """Problems with input price data."""


class MalformedRow(DataError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class GapDetected(DataError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line


class EmptySeries(DataError):
    pass


class InvalidLength(HorizonProbeError, ValueError):
    pass


class InvalidParams(HorizonProbeError, ValueError):
    pass


class LengthMismatch(HorizonProbeError, ValueError):
    pass


class HorizonTooLong(HorizonProbeError, ValueError):
    pass


class InputMismatch(HorizonProbeError, ValueError):
    """A rolling computation was handed a baseline built from other inputs."""


class SchemaMismatch(HorizonProbeError):
    """A persisted artifact does not match the expected layout or version."""


class SolverFailure(HorizonProbeError):
    """Raised when a solve that must succeed ends Infeasible or at the node limit."""

    def __init__(self, status, detail: str = ""):
        msg = f"solver status {status.value}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.status = status


class ConfigError(HorizonProbeError):
    pass
