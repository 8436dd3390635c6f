"""Exception hierarchy shared by every module."""


class LiftlabError(Exception):
    """Base class; ``kind`` is the name used in JSON error reports."""

    @property
    def kind(self):
        return type(self).__name__

    def to_dict(self):
        return {"error": self.kind, "message": str(self)}


class InvalidDimension(LiftlabError, ValueError):
    pass


class InvalidResolution(LiftlabError, ValueError):
    pass


class IndexOutOfRange(LiftlabError, IndexError):
    pass


class AmbiguousLift(LiftlabError, ValueError):
    pass


class InvalidDeckElement(LiftlabError, ValueError):
    pass


class UnknownCovering(LiftlabError, ValueError):
    pass


class EmptyField(LiftlabError, ValueError):
    pass


class NotOneDimensional(LiftlabError, ValueError):
    pass


class BadSigma(LiftlabError, ValueError):
    pass


class BadEta(LiftlabError, ValueError):
    pass


class StepTooLarge(LiftlabError, ValueError):
    def __init__(self, where, distance, inj):
        self.where = where
        self.distance = distance
        self.inj = inj
        super().__init__(f"step {where} has base distance {distance:.6g} >= inj {inj:.6g}")

    def to_dict(self):
        d = super().to_dict()
        d["where"] = _jsonable(self.where)
        d["distance"] = self.distance
        return d


class HolonomyObstruction(LiftlabError, ValueError):
    """Raised when a grid cycle has a nonzero closure defect."""

    def __init__(self, cycle, residual):
        self.cycle = list(cycle)
        self.residual = residual
        super().__init__(
            f"nontrivial holonomy {residual:.6g} around a cycle of length {len(self.cycle)}")

    def to_dict(self):
        d = super().to_dict()
        d["cycle"] = [int(i) for i in self.cycle]
        d["residual"] = self.residual
        return d


class ProjectionMismatch(LiftlabError, ValueError):
    pass


class NonRealField(LiftlabError, TypeError):
    pass


class DomainMismatch(LiftlabError, ValueError):
    pass


class SubcriticalExponent(LiftlabError, ValueError):
    pass


class NotConvexDomain(LiftlabError, ValueError):
    pass


class ExponentOutOfRange(LiftlabError, ValueError):
    pass


class ExponentConditionViolated(LiftlabError, ValueError):
    pass


class EmptySeries(LiftlabError, ValueError):
    pass


class ConfigError(LiftlabError, ValueError):
    pass


class ParseError(ConfigError):
    pass


class _KeyedConfigError(ConfigError):
    def to_dict(self):
        return dict(super().to_dict(), key=self.key)


class SchemaError(_KeyedConfigError):
    def __init__(self, key, message=None):
        self.key = key
        super().__init__(message or f"unknown or misplaced key {key!r}")


class RangeError(_KeyedConfigError):
    def __init__(self, key, message=None):
        self.key = key
        super().__init__(message or f"value of {key!r} out of range")


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    try:
        return int(x)
    except (TypeError, ValueError):
        return str(x)
