"""Exception hierarchy. Each class maps onto one CLI exit code."""


class CrossCodiffError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(CrossCodiffError, ValueError):
    """A distribution or noise parameter lies outside its domain."""


class ModelDomainError(CrossCodiffError, ValueError):
    """The VAR(1) model is not admissible (e.g. not stationary)."""


class LagRangeError(CrossCodiffError, ValueError):
    """A requested lag is too large for the trajectory length."""


class DegenerateCFError(CrossCodiffError, ArithmeticError):
    """An empirical characteristic function is too close to zero to take its log."""

    def __init__(self, message, u=None, v=None, k=None, modulus=None):
        super().__init__(message)
        self.u = u
        self.v = v
        self.k = k
        self.modulus = modulus


class FitError(CrossCodiffError, ArithmeticError):
    """A fit could not be carried out or left its feasible region."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class ConfigError(CrossCodiffError, ValueError):
    """An experiment configuration is malformed or inconsistent."""
