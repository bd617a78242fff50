"""Shared exception types.

Errors are split by what the caller can do about them: bad inputs
(ValueError family), exhausted enumeration budgets (retry with a larger
budget or smaller instance), and exhausted floating precision (shrink the
flow time; there is no silent degradation anywhere in the package).
"""

from __future__ import annotations


class DimensionMismatchError(ValueError):
    """Operands live in different dimensions."""


class DeterminantError(ValueError):
    """Matrix is not unimodular within tolerance."""


class FlowRangeError(ValueError):
    """Diagonal flow time would overflow double precision."""


class RationalityError(ValueError):
    """Exact-rational input required (or forbidden) for this operation."""


class BudgetExceededError(RuntimeError):
    """An exhaustive enumeration hit its node budget.

    The partial best found so far, if any, is attached so callers can
    report it; it is never silently returned as the answer.
    """

    def __init__(self, message: str, partial=None, nodes: int = 0):
        super().__init__(message)
        self.partial = partial
        self.nodes = nodes


class PrecisionError(RuntimeError):
    """Floating precision exhausted (integrality residual too large)."""


class EmptyLocalizationError(RuntimeError):
    """Localization retained too little mass to be meaningful."""


class ConfigError(ValueError):
    """Experiment configuration violates a documented cap or schema."""
