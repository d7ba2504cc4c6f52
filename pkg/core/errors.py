"""Exception hierarchy shared by every package."""

from typing import List, Optional


class ByzAggError(Exception):
    """Base class for all errors raised by the simulator."""


class DimensionMismatchError(ByzAggError, ValueError):
    """Vectors or boxes of different dimension were combined."""


class EmptyInputError(ByzAggError, ValueError):
    """An operation that needs at least one vector got none."""


class NonFiniteError(ByzAggError, ValueError):
    """A vector contains NaN or Inf."""


class InvalidParamsError(ByzAggError, ValueError):
    """System parameters or operation arguments violate their preconditions."""


class CapacityError(ByzAggError):
    """An exhaustive enumeration would exceed its declared bound."""


class EquivocationError(ByzAggError):
    """A sender tried to deliver two different vectors in the same round."""


class AdversarySpecError(ByzAggError, ValueError):
    """An adversary specification is malformed."""


class AgreementInvariantError(AssertionError):
    """A proved invariant of an agreement round did not hold (implementation bug)."""


class ReproductionFailure(ByzAggError):
    """A reproduction did not produce the stated outcome."""


class DatasetError(ByzAggError, ValueError):
    """A dataset file is missing, empty or malformed."""

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class ConfigError(ByzAggError):
    """One or more configuration problems, each prefixed with its key path."""

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  {p}" for p in self.problems))
