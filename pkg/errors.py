"""Exceptions raised across the crossroads modules.

Everything numerical derives from CrossroadsError so the CLI can tell a
failed computation (exit 1) from bad input (exit 2).
"""


class CrossroadsError(Exception):
    pass


class InvalidSpec(CrossroadsError, ValueError):
    pass


class DegenerateEpsilon(InvalidSpec):
    pass


class DimensionMismatch(CrossroadsError):
    pass


class PreconditionViolated(CrossroadsError):
    pass


class ConvergenceFailure(CrossroadsError):
    pass


class IllConditioned(CrossroadsError):
    pass


class AmbiguousClustering(CrossroadsError):
    pass


class TrackingAmbiguity(CrossroadsError):
    pass


class ClassificationConflict(CrossroadsError):
    pass


class BracketInvalid(CrossroadsError):
    pass


class StepUnderflow(CrossroadsError):
    def __init__(self, parameter: float, displacement: float):
        self.parameter = parameter
        self.displacement = displacement
        super().__init__(
            f"step underflow at parameter {parameter:.9g}: "
            f"displacement {displacement:.3g} still above the cap"
        )
