"""Exception types shared across the package."""


class CapflowError(Exception):
    """Base class for package-specific errors."""


class AngleOutOfRange(CapflowError, ValueError):
    """Contact angle outside the supported range (0, pi/2]."""


class BadNodeCount(CapflowError, ValueError):
    """Grid node count must be odd and at least 33."""


class NotConvex(CapflowError, ValueError):
    """Support samples have a non-positive principal radius somewhere."""

    def __init__(self, message: str, node_index: int | None = None,
                 value: float | None = None):
        super().__init__(message)
        self.node_index = node_index
        self.value = value


class RobinViolation(CapflowError, ValueError):
    """Support samples violate the contact-angle boundary condition."""


class GeneratorFailed(CapflowError, RuntimeError):
    """Random-body generator could not produce a convex body."""


class NonpositiveSupport(CapflowError, ValueError):
    """Shifted capillary support is not strictly positive."""


class NoInteriorMinimum(CapflowError, RuntimeError):
    """1-D optimizer found no interior critical point (invalid body)."""


class MaxIterations(CapflowError, RuntimeError):
    """Iteration cap reached before the requested tolerance."""


class CurvatureBlowup(CapflowError, RuntimeError):
    """Gauss curvature exceeded the runaway guard during a flow."""


class ConvexityLost(CapflowError, RuntimeError):
    """A flow or Newton iterate stopped being strictly convex."""

    def __init__(self, message: str, node_index: int | None = None,
                 value: float | None = None):
        super().__init__(message)
        self.node_index = node_index
        self.value = value


class NewtonStalled(CapflowError, RuntimeError):
    """Damped Newton could not decrease the residual after 30 halvings."""
