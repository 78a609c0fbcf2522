"""Exception hierarchy shared by all holonomy_lab modules."""


class HolonomyLabError(Exception):
    """Base class for every error raised by this package."""


class GridMismatchError(HolonomyLabError, ValueError):
    """Two wave functions live on different grids or internal spaces."""


class ResolutionError(HolonomyLabError, ValueError):
    """A packet is too narrow to be resolved by the grid spacing."""


class BoundaryError(HolonomyLabError, ValueError):
    """A packet leaks through the periodic boundary above tolerance."""


class NumericalError(HolonomyLabError):
    """Base class for failures of a numerical procedure (exit code 3)."""


class ConvergenceError(NumericalError):
    """Adaptive refinement did not meet its tolerance."""


class TopologyError(NumericalError):
    """A curve crosses an excluded region (flux core or string core)."""


class CoreCollisionError(NumericalError):
    """Wave-function mass reached an excluded core during evolution."""


class OverlapError(NumericalError):
    """Packets that must be disjoint overlap above tolerance."""


class ScenarioError(HolonomyLabError):
    """Invalid scenario document (exit code 2)."""
