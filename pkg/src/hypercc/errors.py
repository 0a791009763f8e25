"""Exception types raised across the package."""


class HyperCCError(Exception):
    """Base class for all package errors."""


class ArgumentBelowOne(HyperCCError, ValueError):
    """-p.q fell clearly below 1, so the points are not both on H^2."""


class ChartRangeError(HyperCCError, ValueError):
    pass


class CollisionError(HyperCCError):
    """Two bodies are closer than the collision threshold."""


class DegenerateDenominator(HyperCCError):
    """All bodies sit (numerically) at the apex (0, 0, 1), so grad I vanishes."""


class NonSymmetric(HyperCCError, ValueError):
    pass


class SizeLimit(HyperCCError, ValueError):
    pass


class NoConvergence(HyperCCError):
    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class OrderViolation(HyperCCError):
    pass


class InertiaMismatch(HyperCCError):
    pass


class ConeViolation(HyperCCError):
    pass


class StepBudgetExhausted(HyperCCError):
    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class CollisionApproach(HyperCCError):
    pass


class SingularSystem(HyperCCError):
    pass


class NoAnchor(HyperCCError):
    pass


class DegenerateCluster(HyperCCError):
    pass


class DegenerateInput(HyperCCError):
    pass
