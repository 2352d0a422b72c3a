"""Exception hierarchy.

Every failure the library can signal derives from :class:`UniequivError`, so
callers (and the CLI) can separate mathematical rejections from bugs.
"""


class UniequivError(Exception):
    """Base class for all library errors."""


# matrix_core
class NotNormal(UniequivError):
    pass


class MultiplicityCollision(UniequivError):
    """Two eigenvalues closer than the gap tolerance."""


class DimensionTooLarge(UniequivError):
    pass


class NoUniqueMatch(UniequivError):
    """Best projection matching has max distance >= 1/2."""


class FrameMismatch(UniequivError):
    pass


# complexes
class InvalidParams(UniequivError):
    pass


class InvalidComplex(UniequivError):
    pass


class Disconnected(InvalidComplex):
    pass


class ChartDomainError(UniequivError):
    pass


# fields
class UnknownBuiltin(UniequivError):
    pass


class Inadmissible(UniequivError):
    """Field pair fails normality, multiplicity-freeness or spectrum agreement."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# monodromy
class RefinementExceeded(UniequivError):
    pass


class InconsistentSystem(UniequivError):
    pass


# cohomology / obstruction
class InvalidSystem(UniequivError):
    pass


class NotACocycle(UniequivError):
    pass


class ResidualTooLarge(UniequivError):
    pass


class DegenerateOverlap(UniequivError):
    pass


class NotSplit(UniequivError):
    pass


class NoPrimitive(UniequivError):
    pass


class UnknownExample(UniequivError):
    pass
