"""Error and warning types shared across the package.

Every error carries a stable ``code`` string so the CLI and the scenario
manifests can report failures in a machine-readable way.
"""


class CcqedError(Exception):
    """Base class for all package errors."""

    code = "ERROR"


class InvalidParamsError(CcqedError, ValueError):
    code = "INVALID_PARAMS"


class BasisMismatchError(CcqedError, ValueError):
    code = "BASIS_MISMATCH"


class InvalidPulseError(CcqedError, ValueError):
    code = "INVALID_PULSE"


class NotHermitianError(CcqedError, ValueError):
    code = "NOT_HERMITIAN"


class ConvergenceFailureError(CcqedError, RuntimeError):
    code = "CONVERGENCE_FAILURE"


class DimTooLargeError(CcqedError, ValueError):
    code = "DIM_TOO_LARGE"


class TruncationTooCoarseError(CcqedError, ValueError):
    code = "TRUNCATION_TOO_COARSE"


class SingularKError(CcqedError, ValueError):
    code = "SINGULAR_K"


class WindowTooLongError(CcqedError, ValueError):
    code = "WINDOW_TOO_LONG"


class IllConditionedError(CcqedError, RuntimeError):
    code = "ILL_CONDITIONED"


class ConfigError(CcqedError, ValueError):
    """Scenario configuration failed validation."""

    code = "INVALID_CONFIG"


class EdgeClippingWarning(UserWarning):
    """A wave packet tail is not negligible at the chain edge."""


class LossyComposeWarning(UserWarning):
    """Two-excitation composition dropped non-negligible double-atom weight."""


class SeparationWarning(UserWarning):
    """Wave packet is not well separated from the chain center."""
