"""Exception hierarchy shared by the library and the command line."""


class HellingerKitError(Exception):
    """Base class for all errors raised by hellinger_kit."""


class ConfigError(HellingerKitError, ValueError):
    """Malformed family spec, CLI configuration or argument."""


class NumericalError(HellingerKitError, ArithmeticError):
    """A computation cannot be trusted (non-finite data, ill-conditioning)."""


class NonFiniteMatrixError(NumericalError):
    pass


class IllConditionedBlockError(NumericalError):
    def __init__(self, message, cond=None, index=None):
        super().__init__(message)
        self.cond = cond
        self.index = index


class HorizonExceededError(HellingerKitError, IndexError):
    """An explicit family was queried past its stored horizon."""


class VocInconsistencyError(NumericalError):
    """Variation-of-constants solution failed its own residual check."""


class DegenerateAnchorError(NumericalError):
    pass
