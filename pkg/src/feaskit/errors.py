"""Exception types raised across feaskit."""


class FeaskitError(Exception):
    """Base class for all feaskit errors."""


class DimensionMismatch(FeaskitError, ValueError):
    """Operands do not share the expected dimension."""


class DegenerateConfiguration(FeaskitError):
    """No equidistant point exists in the affine hull of the given points."""


class InvalidParams(FeaskitError, ValueError):
    """Generator or solver parameters out of their admissible range."""


class CannotEscape(FeaskitError):
    """Could not find an infeasible start point within the doubling cap."""


class ParseError(FeaskitError, ValueError):
    """Malformed instance file or schedule string."""

    def __init__(self, message, *, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ZeroSubgradientAtViolation(FeaskitError):
    """A violated (perturbed) constraint returned a zero subgradient."""

    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(
            f"constraint {index} has f_i(x) + eps = {value!r} > 0 "
            "but a zero subgradient; the separating halfspace is undefined"
        )


class MismatchedTermination(FeaskitError):
    """PACA and the product-space CRM stopped at different iterations."""


class EmptyResults(FeaskitError, ValueError):
    """An aggregation was asked to run over no results."""
