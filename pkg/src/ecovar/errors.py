"""Exception hierarchy shared across the toolkit."""


class EcovarError(Exception):
    """Base class for all toolkit errors."""


class ParseError(EcovarError):
    """Raised when a CSV cell or header cannot be parsed; carries the 1-based row."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class AlignmentError(EcovarError):
    """Raised when a raw series cannot be carried forward onto the target calendar."""


class DomainError(EcovarError):
    """Raised when a value transform is applied outside its domain."""


class RankError(EcovarError):
    """Raised when a regressor matrix is rank deficient."""


class DegreesOfFreedomError(EcovarError):
    """Raised when a regression has too few observations for its regressors."""


class ConfigError(EcovarError):
    """Raised for invalid study configuration (unknown keys, missing columns, bad values)."""


class LagSelectionError(EcovarError):
    """Raised when no lag order in the search range yields white residuals.

    The per-order Ljung-Box p-values are attached as ``pvalues``:
    a dict mapping lag order -> list of per-equation p-values.
    """

    def __init__(self, message, pvalues):
        super().__init__(message)
        self.pvalues = pvalues
