"""Exception taxonomy shared across the package.

Errors are split by who can fix them: bad numeric inputs (InputDomainError),
wrong shapes or misuse of the API (DimensionError), infeasible design
parameters (DesignError), malformed scenario files (ConfigError), and
runtime integration failures (DivergenceError, KinematicSingularityError).
"""


class KernelObsError(Exception):
    """Base class for all package errors."""


class InputDomainError(KernelObsError, ValueError):
    """Non-finite or out-of-domain numeric input."""


class DimensionError(KernelObsError, ValueError):
    """Array shape inconsistent with the declared problem dimensions."""


class DesignError(KernelObsError, ValueError):
    """Observer/kernel design parameters are infeasible as given."""


class IllConditionedCentersError(DesignError):
    """Grammian factorization failed even after maximum jitter."""

    def __init__(self, msg, smallest_eigenvalue=None):
        super().__init__(msg)
        self.smallest_eigenvalue = smallest_eigenvalue


class ConfigError(KernelObsError, ValueError):
    """Scenario configuration is malformed or fails schema validation."""


class DivergenceError(KernelObsError, RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, msg, last_record=None):
        super().__init__(msg)
        self.last_record = last_record


class KinematicSingularityError(KernelObsError, RuntimeError):
    """Euler-angle pitch approached +/- pi/2; state snapshot attached."""

    def __init__(self, msg, snapshot=None):
        super().__init__(msg)
        self.snapshot = snapshot
