class AkcyError(Exception):
    pass


class InvalidGrid(AkcyError):
    pass


class InvalidField(AkcyError):
    pass


class NonPositiveDensity(AkcyError):
    pass


class NonZeroMean(AkcyError):
    pass


class NotCompatible(AkcyError):
    pass


class NotTaming(AkcyError):
    pass


class NotAlmostKahler(AkcyError):
    pass


class Degenerate(AkcyError):
    pass


class InconsistentRHS(AkcyError):
    pass


class LinearSolveFailure(AkcyError):
    pass


class DimensionMismatch(AkcyError):
    pass


class SolverError(AkcyError):
    """
    Base class for failures of the continuation solver.

    :param t: value of the continuation parameter at which the failure occurred
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class LostPositivity(SolverError):
    pass


class NewtonDivergence(SolverError):
    pass


class PathStalled(SolverError):
    pass


class ConfigError(AkcyError):
    pass


class DumpFormatError(AkcyError):
    pass


class ScenarioInvalid(AkcyError):
    def __init__(self, message, invariant=None):
        super().__init__(message)
        self.invariant = invariant
