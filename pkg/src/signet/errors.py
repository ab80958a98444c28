"""Exception types shared across the toolkit."""


class SignetError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(SignetError):
    """Inputs that must agree in shape or length do not."""


class NotPositiveDefinite(SignetError):
    """A matrix required to be positive definite is not."""


class SingularMatrix(SignetError):
    """Spectrum too close to zero for the requested operation."""


class ConvergenceFailure(SignetError):
    """An iterative eigenvalue routine exhausted its budget."""


class DegenerateSpectrum(SignetError):
    """Spectrum collapse makes the requested construction impossible."""


class AllWeightsZero(SignetError):
    """No positively weighted coefficient to anchor a penalty grid."""


class RequiresMoreSamples(SignetError):
    """The estimator needs more observations than variables."""


class EmptyTruth(SignetError):
    """A true edge set with no edges leaves TPR undefined."""


class BothEmpty(SignetError):
    """Agreement of two empty edge sets is 0/0 and reported as such."""


class LengthMismatch(SignetError):
    """Curves to be averaged do not share a grid length."""


class DidNotConverge(SignetError):
    """Iteration budget exhausted before reaching tolerance.

    Carries the best iterate seen (`best`, when available), its KKT
    violation, and the node index for per-node regressions.
    """

    def __init__(self, message, best=None, kkt_violation=None, node=None):
        super().__init__(message)
        self.best = best
        self.kkt_violation = kkt_violation
        self.node = node
