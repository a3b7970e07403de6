"""Exception hierarchy shared by every phase."""


class DmotError(Exception):
    """Base class for all errors raised by this package."""


class MetricError(DmotError):
    pass


class DuplicatePoint(MetricError):
    pass


class AsymmetricMatrix(MetricError):
    pass


class NegativeDistance(MetricError):
    pass


class TriangleViolation(MetricError):
    pass


class InvalidId(DmotError, IndexError):
    pass


class KeyOutOfUniverse(DmotError, ValueError):
    pass


class ConfigInadmissible(DmotError, ValueError):
    pass


class InvalidLevel(DmotError, ValueError):
    pass


class InvalidNode(DmotError, IndexError):
    pass


class InvalidPoint(DmotError, IndexError):
    pass


class NoMeetingAbove(DmotError, LookupError):
    pass


class InvalidRange(DmotError, ValueError):
    pass


class EmptyQuery(DmotError, ValueError):
    pass


class UnknownPoint(DmotError, KeyError):
    pass


class DisconnectedSpanner(DmotError, RuntimeError):
    pass


class EndpointNotInQuery(DmotError, ValueError):
    pass


class InvalidR(DmotError, ValueError):
    pass


class NoFacilities(DmotError, ValueError):
    pass


class EmptyX(DmotError, ValueError):
    pass


class AlreadyPresent(DmotError, KeyError):
    pass


class NotPresent(DmotError, KeyError):
    pass


class PersistenceError(DmotError):
    pass


class ChecksumMismatch(PersistenceError):
    pass


class VersionUnsupported(PersistenceError):
    pass


class Truncated(PersistenceError):
    pass
