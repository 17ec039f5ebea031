"""Exception hierarchy for vertcover."""


class VertcoverError(Exception):
    """Base class for all library errors."""


class DomainError(VertcoverError, ValueError):
    pass


class EvalError(VertcoverError, ArithmeticError):
    pass


class RefinementLimit(VertcoverError):
    pass


class SelfIntersection(VertcoverError):
    pass


class DegenerateLine(VertcoverError):
    pass


class OriginOutside(VertcoverError):
    pass


class NoOriginCell(VertcoverError):
    pass


class OddLayerCount(VertcoverError, ValueError):
    pass


class Singularity(VertcoverError):
    pass


class SingularityOnPath(Singularity):
    pass


class ExclusionMissing(VertcoverError):
    pass


class LiftNegative(VertcoverError):
    pass


class AssemblyGap(VertcoverError):
    pass


class NoContainmentRadius(VertcoverError):
    pass


class NotATranslate(VertcoverError):
    pass


class UncertifiedMap(VertcoverError):
    pass


class ConfigError(VertcoverError, ValueError):
    pass
