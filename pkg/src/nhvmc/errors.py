"""Exception types shared across the package."""


class NhvmcError(Exception):
    """Base class for all package errors."""


class InvalidSpinConfigError(NhvmcError):
    """Spin configuration has the wrong length or entries outside {+1, -1}."""


class SizeCapError(NhvmcError):
    """Requested dense diagonalization exceeds the configured size cap."""


class DivergentRatioError(NhvmcError):
    """An amplitude ratio over/underflowed the safe range for ``exp``.

    Carries the offending configuration so the caller can resample it.
    """

    def __init__(self, message: str, config=None):
        super().__init__(message)
        self.config = config


class ZeroAmplitudeError(NhvmcError):
    """Symmetrization cancelled the amplitude exactly; config is unreachable."""


class NearEPError(NhvmcError):
    """Left/right overlap below the self-orthogonality floor (near an EP)."""


class ConfigError(NhvmcError):
    """Invalid run configuration (unknown selector, mismatched checkpoint, ...)."""


class TrainingAbortedError(NhvmcError):
    """Training stopped early (divergent batch, repeated non-finite gradients)."""
