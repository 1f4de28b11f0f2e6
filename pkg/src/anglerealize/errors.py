"""Exception types raised across the package."""


class InvalidSizeError(ValueError):
    pass


class DegenerateGeometryError(ValueError):
    pass


class SamplingError(RuntimeError):
    pass


class SingularConstraintError(ValueError):
    pass


class InfeasibleTriangleError(ValueError):
    pass


class ReconstructionError(RuntimeError):
    """Build-up failed while placing a point; ``index`` names the point."""

    def __init__(self, index, message):
        super().__init__(f"point {index}: {message}")
        self.index = index


class DegenerateAlignmentError(ValueError):
    pass


class NumericalFailureError(RuntimeError):
    pass
