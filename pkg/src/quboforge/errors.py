"""Exception hierarchy shared by all stages."""


class QuboForgeError(Exception):
    """Base class; `stage` names the pipeline stage for CLI diagnostics."""

    stage = "core"


class DomainError(QuboForgeError, ValueError):
    pass


class RangeError(QuboForgeError, ValueError):
    """A coefficient left the hardware range. `key` is the qubit or edge."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class CapacityError(QuboForgeError, ValueError):
    pass


class ParseError(QuboForgeError, ValueError):
    stage = "parse"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class Infeasible(QuboForgeError):
    stage = "synthesis"


class NotFound(QuboForgeError, KeyError):
    stage = "library"


class ConfigurationError(QuboForgeError):
    stage = "mapping"


class PlacementError(QuboForgeError):
    stage = "placement"


class RoutingError(QuboForgeError):
    stage = "routing"

    def __init__(self, message, net=None):
        super().__init__(message)
        self.net = net


class GenerationError(QuboForgeError):
    stage = "benchgen"
