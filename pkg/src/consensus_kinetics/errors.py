"""Exception hierarchy.

Every error carries an ``exit_code`` that the command-line front end maps
directly to the process status: 1 for usage/parameter problems, 2 for data
or statistical degeneracy, 3 for numerical non-convergence.
"""


class ConsensusKineticsError(Exception):
    exit_code = 2


# -- parameter / usage ------------------------------------------------------


class InvalidParameter(ConsensusKineticsError, ValueError):
    exit_code = 1


class OutOfDomain(InvalidParameter):
    pass


class InvalidBudget(InvalidParameter):
    pass


class InvalidTimeStep(InvalidParameter):
    pass


# -- ingestion --------------------------------------------------------------


class DataError(ConsensusKineticsError, ValueError):
    exit_code = 2


class MissingColumn(DataError):
    pass


class UnparsableDate(DataError):
    pass


class NonMonotoneDates(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class NonPositiveValue(DataError):
    pass


class ZeroDenominator(DataError):
    pass


class EmptyIntersection(DataError):
    pass


class EmptySeries(DataError):
    pass


class BoundaryOutOfRange(DataError):
    pass


class SeriesTooShort(DataError):
    pass


class PathTooShort(DataError):
    pass


class EmptyEnsemble(DataError):
    pass


# -- statistical degeneracy -------------------------------------------------


class RankDeficient(DataError):
    pass


class TooFewObservations(DataError):
    pass


class ConstantSeries(DataError):
    pass


class DegenerateResiduals(DataError):
    pass


class GridTooCoarse(DataError):
    pass


# -- numerical --------------------------------------------------------------


class NumericalError(ConsensusKineticsError, ArithmeticError):
    exit_code = 3


class NumericalFailure(NumericalError):
    pass


class NotConverged(NumericalError):
    pass


class MaxIterExceeded(UserWarning):
    """Warned (not raised) when a local refinement stops on its iteration cap."""
