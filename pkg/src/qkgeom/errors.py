"""Exception hierarchy shared by all verification modules."""


class GeometryError(Exception):
    """Base class for every error raised by qkgeom."""


class InvalidArgument(GeometryError, ValueError):
    pass


class DegenerateChart(GeometryError):
    """Chart Jacobian lost rank at an evaluation point."""


class NumericalFailure(GeometryError):
    pass


class SamplingError(GeometryError):
    """A finite-difference stencil or sample point left the chart domain."""


class InvalidHypersurface(GeometryError):
    pass


class StructureError(GeometryError):
    """A structural hypothesis (kernel dimension, invariance, SO(3) fit) failed."""
