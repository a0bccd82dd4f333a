"""Exception types shared across the package."""


class VnembError(Exception):
    """Base class for all package errors."""


class ConfigError(VnembError):
    """Invalid configuration value. Carries the offending field name."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class FormatError(VnembError):
    """Malformed input file (topology, config, checkpoint)."""


class StateError(VnembError):
    """Operation applied in an invalid state (double release, stepping a done episode)."""


class SolverRefusal(VnembError):
    """Solver declined the instance (e.g. exact solver beyond its size limits)."""


class ProtocolError(VnembError):
    """Wire protocol violation."""

    def __init__(self, code, detail):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail
