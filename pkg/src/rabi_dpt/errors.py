"""Exception types shared across the package."""


class BranchError(ValueError):
    """A phase-specific formula was evaluated outside its phase."""


class PoleError(BranchError):
    """Evaluation exactly at the critical point, where the formula diverges."""


class SolverFailure(RuntimeError):
    """A linear solve, eigensolve or integration broke down numerically."""


class NullSpaceDegenerate(SolverFailure):
    """More than one Liouvillian eigenvalue lies below the zero tolerance.

    Attributes
    ----------
    eigenvalues : ndarray
        The near-zero eigenvalues.
    candidates : list of DensityMatrix
        One normalized candidate steady state per near-zero eigenvector.
    """

    def __init__(self, message, eigenvalues=(), candidates=()):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.candidates = list(candidates)


class CutoffExceeded(SolverFailure):
    """Cutoff doubling hit the hard cap before the observable converged."""
