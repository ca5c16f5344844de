class TricoherentError(Exception):
    """Base class for all package errors."""


class ConvergenceError(TricoherentError):
    """A series or iterative evaluation did not reach its tolerance."""


class DivergentIntegralError(TricoherentError):
    """A Gaussian integral was requested outside its convergence region."""


class BranchAmbiguityError(TricoherentError):
    """A complex square root sits too close to its branch cut to be trusted."""


class LeakageError(TricoherentError):
    """Too much probability reached the Fock truncation boundary."""


class IllConditionedError(TricoherentError):
    """A Bogoliubov update would produce a non-normalizable or unstable result."""
