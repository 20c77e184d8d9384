"""Exception types raised by the recovery pipeline."""


class RecoveryError(Exception):
    """Base class for all library errors."""


class InvalidArgument(RecoveryError, ValueError):
    pass


class InvalidConfig(RecoveryError, ValueError):
    pass


class FiniteRankSignal(RecoveryError):
    """Head dimension reaches the rank of an exactly finite-rank model.

    Callers should switch to the exact interpolation path, where the
    sampling density has no tail branch.
    """


class DegenerateDensity(RecoveryError):
    pass


class ConcentrationFailure(RecoveryError):
    def __init__(self, message, best_residual=None, best_batch=None, attempts=0):
        super().__init__(message)
        self.best_residual = best_residual
        self.best_batch = best_batch
        self.attempts = attempts


class OracleScopeExceeded(RecoveryError):
    pass


class SparsifyFailure(RecoveryError):
    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class PlanFailure(RecoveryError):
    pass


class AdversaryScopeExceeded(RecoveryError):
    pass
