"""Exception hierarchy shared by every module."""


class RelhError(Exception):
    """Base class for all package errors."""


class SingularSymbol(RelhError, ValueError):
    pass


class NonPositiveEps(RelhError, ValueError):
    pass


class NonPositiveTime(RelhError, ValueError):
    pass


class ZeroField(RelhError, ValueError):
    pass


class DegeneratePair(RelhError, ValueError):
    pass


class NoConvergence(RelhError, RuntimeError):
    def __init__(self, max_iter, residual=float("nan")):
        super().__init__(f"no convergence after {max_iter} iterations (residual {residual:.3e})")
        self.max_iter = max_iter
        self.residual = residual


class CollapseToZero(RelhError, RuntimeError):
    pass


class UnresolvedScale(RelhError, ValueError):
    pass


class ResolutionLoss(RelhError, RuntimeError):
    pass


class NoContraction(RelhError, RuntimeError):
    pass


class NotFormBounded(RelhError, ValueError):
    pass


class ConfigError(RelhError, ValueError):
    pass
