"""Exception hierarchy shared by every numerical module and the CLI.

Two families matter to callers: ValidityGap (an asymptotic formula was asked
for outside its domain, CLI exit code 2) and NumericalFailure (a solver,
quadrature or fit did not deliver, CLI exit code 3).
"""


class PainleveError(Exception):
    """Base class for all toolkit errors."""


class ValidityGap(PainleveError):
    """An evaluator was called where no asymptotic formula holds."""


class NumericalFailure(PainleveError):
    """A numerical procedure failed to reach its tolerance."""


class OutOfValidity(ValidityGap):
    """Raised when a validity predicate is false.

    Args:
        inequality (str): human readable form of the violated inequality.
        margin (float): the measured left-hand side of that inequality.
    """

    def __init__(self, inequality, margin=None):
        self.inequality = inequality
        self.margin = margin
        msg = f"validity violated: {inequality}"
        if margin is not None:
            msg += f" (margin={margin:.6g})"
        super().__init__(msg)


class NoValidRegime(ValidityGap):
    pass


class DegenerateBranch(NumericalFailure):
    pass


class SeedOutOfRange(NumericalFailure):
    pass


class ToleranceFailure(NumericalFailure):
    pass


class StepUnderflow(ToleranceFailure):
    pass


class PoleFitFailure(NumericalFailure):
    pass


class ProjectionIllConditioned(NumericalFailure):
    pass


class FrameIncomplete(NumericalFailure):
    pass


class BracketFailure(NumericalFailure):
    pass


class NearPole(NumericalFailure):
    pass


class RegularizationFailure(NumericalFailure):
    pass


class QuadratureFailure(NumericalFailure):
    pass


class RootStructureError(NumericalFailure):
    pass


class OutOfRange(NumericalFailure):
    pass


class RootIndexError(NumericalFailure, IndexError):
    pass


class EmptyWindow(NumericalFailure):
    pass


class IOFailure(PainleveError):
    pass


def exit_code_for(exc):
    """Maps an exception to the CLI exit code contract (0/2/3)."""
    if isinstance(exc, ValidityGap):
        return 2
    return 3
