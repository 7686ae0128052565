class QuenchError(ValueError):
    """Base class for domain errors raised by this package."""


class TruncationError(QuenchError):
    """A truncated single-particle basis fails its completeness check."""

    def __init__(self, index, defect, tol):
        self.index = index
        self.defect = defect
        super().__init__(
            f"completeness defect {defect:.3e} > {tol:.1e} at reference state {index}; "
            "increase the basis cutoff"
        )


class ConvergenceError(QuenchError):
    """Eigenvalues drift beyond tolerance when the cutoff is doubled."""


class UnreachableThresholdError(QuenchError):
    """Requested fidelity threshold lies below the dynamical floor."""

    def __init__(self, theta, floor):
        self.theta = theta
        self.floor = floor
        super().__init__(f"theta={theta:g} is below the dynamical floor min F = {floor:.6g}")


class InvalidOverlapError(QuenchError):
    """Overlap magnitude exceeds one by more than roundoff."""


class UndefinedBoundError(QuenchError):
    """A speed-limit bound whose denominator vanishes."""
