"""Exception hierarchy. Every failure surfaced by the library is one of these."""


class RandTheilError(ValueError):
    """Base class for all typed errors raised by the package."""


class EmptyMatrix(RandTheilError):
    pass


class LabelOutOfRange(RandTheilError):
    pass


class InvalidCommunityCount(RandTheilError):
    pass


class TooFewTimeSteps(RandTheilError):
    pass


class InvalidAttributes(RandTheilError):
    pass


class InvalidRange(RandTheilError):
    pass


class SolveFailed(RandTheilError):
    pass


class NoAdmissiblePosition(RandTheilError):
    pass


class EmptyCommunity(RandTheilError):
    pass


class InvalidTheta(RandTheilError):
    pass


class NumericUnderflow(RandTheilError):
    pass


class AllZeroAttributes(RandTheilError):
    pass


class ParseError(RandTheilError):
    pass


class NameNotFound(RandTheilError):
    pass


class WriteError(RandTheilError):
    pass
