"""Exception types raised across the package."""


class KQLError(Exception):
    """Base class for all package errors."""


class InvalidArgument(KQLError, ValueError):
    pass


class InvalidInput(KQLError, ValueError):
    pass


class OutOfDomain(KQLError, ValueError):
    pass


class NumericalError(KQLError, ArithmeticError):
    pass


class BudgetExhausted(KQLError, RuntimeError):
    pass


class ConfigError(KQLError, ValueError):
    pass
