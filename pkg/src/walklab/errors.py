"""Exception hierarchy shared across the package."""


class WalklabError(Exception):
    """Base class for all package errors."""


class InvalidArgument(WalklabError, ValueError):
    """An argument violated a documented precondition."""


class DegenerateInput(WalklabError, ValueError):
    """Input is structurally valid but degenerate (e.g. isolated node)."""


class FitFailure(WalklabError, RuntimeError):
    """No optimizer start converged to a usable solution."""


class NumericFailure(WalklabError, RuntimeError):
    """An iterative numerical routine failed to converge or a system was singular."""


class UndefinedRatio(WalklabError, ZeroDivisionError):
    """A ratio with a zero denominator was requested."""
