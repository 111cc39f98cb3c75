"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so new failure modes should
subclass the closest existing category rather than raising bare ValueError.
"""


class BtbenchError(Exception):
    """Base class for all package errors."""


class InputError(BtbenchError):
    """File or stream could not be read."""


class ParseError(BtbenchError):
    """Malformed input content. Carries a line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConflictError(ParseError):
    """Duplicate (dataset, algorithm, fold) key in the input."""


class ConfigError(BtbenchError):
    """Invalid option value or invalid combination of options."""


class SizeError(ConfigError):
    """A subsampling request exceeds what the data provides."""


class InsufficientDataError(BtbenchError):
    """An operation needs more measurements than a cell contains."""


class DegenerateMleError(BtbenchError):
    """Maximum-likelihood weights do not exist for this win table."""


class SamplingFailureError(BtbenchError):
    """MCMC could not produce usable draws (e.g. every transition diverged)."""
