"""Exception types raised across the package."""


class ConfigError(ValueError):
    """Instance or run configuration could not be read or is invalid."""


class ContractViolationError(ValueError):
    """A caller broke an operation's precondition."""


class InvalidAssignmentError(ContractViolationError):
    """A scheduler produced an assignment that is infeasible for the state."""


class NonWorkConservingError(ValueError):
    """A scheduler idled while work was waiting where work conservation is required."""


class AmbiguousPriorityError(ValueError):
    """The cμ order is not unique because the Δ-gap is zero."""


class StructureError(ValueError):
    """An instance lacks the structure an analysis requires."""


class ConstructionError(ValueError):
    """A canonical instance cannot be built for the requested parameters."""


class UnstableChainError(ValueError):
    """A stationary distribution was requested for a non-ergodic chain."""


class LPSolverError(RuntimeError):
    """The linear-programming backend failed or the problem is too large."""


class ConvergenceError(RuntimeError):
    """A stationary solve failed numerically or missed the boundary tolerance within its budget."""
