"""Exception hierarchy shared by all sigpow modules."""


class SigpowError(Exception):
    """Base class for all errors raised by this package."""


# -- wire bookkeeping ------------------------------------------------------

class WireError(SigpowError):
    """Base class for wire-label and dimension bookkeeping errors."""


class DuplicateWire(WireError):
    pass


class UnknownWire(WireError):
    pass


class NotAPermutation(WireError):
    pass


class WireMismatch(WireError):
    pass


class DimConflict(WireError):
    """Two operators disagree on the dimension of a shared wire."""


class DimensionMismatch(WireError):
    pass


# -- object validation -----------------------------------------------------

class ValidationError(SigpowError):
    """An operator fails the structural conditions of its declared type."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class NotTracePreserving(ValidationError):
    pass


class NotCompletelyPositive(ValidationError):
    pass


class OutputNotCPTP(ValidationError):
    pass


class NonSquareChannel(ValidationError):
    pass


class NotAChannelInDeclaredDirection(ValidationError):
    pass


class InvalidProcessMatrix(ValidationError):
    pass


class AlphaOutOfRange(SigpowError):
    pass


# -- solvers and numerics --------------------------------------------------

class SolverError(SigpowError):
    pass


class Infeasible(SolverError):
    """Constraint set is empty; carries the dual improving-ray norm."""

    def __init__(self, message: str, certificate_norm: float | None = None):
        super().__init__(message)
        self.certificate_norm = certificate_norm


class NumericalTrouble(SolverError):
    pass


class QuadratureFailure(SigpowError):
    pass


class GridTooCoarse(SigpowError):
    pass


class TruncationLeak(SigpowError):
    pass
