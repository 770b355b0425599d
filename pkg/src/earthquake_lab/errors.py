"""Exception hierarchy.

Two families: ``ValidationError`` (bad input, CLI exit code 1) and
``NumericalFailure`` (a computation that did not converge or lost
consistency, CLI exit code 2).
"""


class EarthquakeLabError(Exception):
    """Base class for every error raised by the package."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class ValidationError(EarthquakeLabError, ValueError):
    code = "validation"


class NumericalFailure(EarthquakeLabError, ArithmeticError):
    code = "numerical"

    def __init__(self, message="", **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def to_dict(self):
        out = super().to_dict()
        if self.diagnostics:
            out["diagnostics"] = self.diagnostics
        return out


# lorentz_core
class NotSpacelike(ValidationError):
    code = "NotSpacelike"


class NotUnimodular(ValidationError):
    code = "NotUnimodular"


class NotHyperbolic(ValidationError):
    code = "NotHyperbolic"


class NotUnitTimelike(ValidationError):
    code = "NotUnitTimelike"


class PlanesDisjoint(ValidationError):
    code = "PlanesDisjoint"


class Degenerate(NumericalFailure):
    """A base point lies on a leaf; the caller should perturb it."""

    code = "Degenerate"


# surface_curves
class TrivialWord(ValidationError):
    code = "TrivialWord"


class DepthUnstable(NumericalFailure):
    code = "DepthUnstable"


# teichmueller
class DegenerateLength(ValidationError):
    code = "DegenerateLength"


class MarkingMismatch(ValidationError):
    code = "MarkingMismatch"


# earthquake / cocycles
class RelatorBroken(NumericalFailure):
    code = "RelatorBroken"


class IllConditioned(NumericalFailure):
    code = "IllConditioned"


# fixed_point
class NonProper(NumericalFailure):
    code = "NonProper"


class MaxIterations(NumericalFailure):
    code = "MaxIterations"


class NewtonStalled(NumericalFailure):
    code = "NewtonStalled"


class LocalMinimumNonzero(NumericalFailure):
    code = "LocalMinimumNonzero"
