"""Exception hierarchy shared by every module."""


class BinetError(Exception):
    pass


class DimensionError(BinetError, ValueError):
    pass


class NormalizationError(BinetError, ValueError):
    pass


class StateError(BinetError, ValueError):
    pass


class ParamError(BinetError, ValueError):
    pass


class ConfigError(BinetError, ValueError):
    pass


class WrongScenario(BinetError, ValueError):
    pass


class NoViolation(BinetError):
    """Raised when even the first round cannot violate its bilocal bound."""


class Unreachable(BinetError):
    """Raised when no resource parameter reaches the requested round count."""


class ParseError(BinetError, ValueError):
    pass


class ValidationError(BinetError, ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
