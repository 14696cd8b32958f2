"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: InputError -> 2 (bad input/usage),
everything else here -> 1 (analysis precondition failed).
"""


class InputError(ValueError):
    """Malformed or out-of-range input (bad index, bad file, bad flag value)."""


class BudgetError(RuntimeError):
    """An enumeration would exceed the configured budget and sampling is not allowed."""


class StructureError(RuntimeError):
    """An interval structure violates (I1)-(I3): carries the offending tuple."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class UnsupportedError(RuntimeError):
    """Operation requires a property the input space does not have (e.g. exact median)."""


class InsufficientRangeError(RuntimeError):
    """Too few realized distance values to fit a growth exponent."""
