"""Exception types shared across the package."""


class MHDExactError(Exception):
    """Base class for every error raised by mhdexact."""


class PoleProximity(MHDExactError):
    pass


class OrderUnsupported(MHDExactError):
    pass


class MaxRefinementExceeded(MHDExactError):
    pass


class DomainViolation(MHDExactError):
    pass


class SingularWronskian(MHDExactError):
    pass


class Case2DegenerateB(MHDExactError):
    pass


class DegenerateConstants(MHDExactError):
    pass


class DegenerateAlpha(MHDExactError):
    pass


class SingularPoint(MHDExactError):
    pass


class StencilClipped(MHDExactError):
    pass


class InsufficientRange(MHDExactError):
    pass


class ConfigError(MHDExactError):
    """Invalid configuration; the message names the violated rule."""
