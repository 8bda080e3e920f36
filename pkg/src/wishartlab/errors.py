"""Exception hierarchy shared across the package."""


class WishartLabError(Exception):
    """Base class for all package errors."""


class DomainError(WishartLabError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ContractError(DomainError):
    """Mutually inconsistent arguments (grid/regime/alpha mismatches)."""


class NumericError(WishartLabError, ArithmeticError):
    """A numerical procedure failed (factorization, PSD check, ...)."""


class FitError(WishartLabError, RuntimeError):
    """A regression or extrapolation could not be carried out."""


class ConfigError(WishartLabError, ValueError):
    """Invalid experiment configuration; message aggregates all problems."""
