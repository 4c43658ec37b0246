"""Semantic exception hierarchy for the engine.

Public functions never raise bare ValueError/TypeError for contract
violations; they raise one of these so callers (and the CLI) can map
failures to diagnostics and exit codes.
"""


class RandovaError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(RandovaError):
    """Outcome array shape contradicts the declared design."""


class NonFiniteEntry(RandovaError):
    """A potential outcome (or error draw) is NaN or infinite."""


class NegativeErrorSd(RandovaError):
    """Technical-error standard deviation outside its domain."""


class ShapeMismatch(RandovaError):
    """Table, assignment, or error array dimensions disagree."""


class WrongDesign(RandovaError):
    """Operation defined for one design received the other."""


class SameTreatment(RandovaError):
    """A treatment contrast needs two distinct treatments."""


class DegenerateDesign(RandovaError):
    """The design has no residual degrees of freedom (e.g. a 2x2 Latin square)."""


class SpaceTooLarge(RandovaError):
    """Exact enumeration would exceed the configured cap; sample instead."""


class TechnicalErrorsPresent(RandovaError):
    """Exact randomization distributions require technical_error_sd == 0."""


class InvalidAlpha(RandovaError):
    """Significance level outside (0, 1)."""


class NegativeArgument(RandovaError):
    """Survival function evaluated at a negative point."""


class InvalidProbability(RandovaError):
    """Quantile probability outside (0, 1)."""


class InvalidDegreesOfFreedom(RandovaError):
    """Degrees of freedom must be integers >= 1."""


class ConvergenceFailure(RandovaError):
    """Continued-fraction evaluation hit its iteration cap without converging."""


class ParseError(RandovaError):
    """A table or report document is malformed; message names the field."""
