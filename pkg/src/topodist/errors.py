"""Exception hierarchy.

Every error raised on bad input derives from :class:`TopoDistError`, so
callers (the CLI in particular) can catch one type. Numerical failures
derive from :class:`NumericalError` and map to a different exit code.
"""


class TopoDistError(ValueError):
    pass


class NumericalError(TopoDistError):
    pass


class ConstantColumn(TopoDistError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column} has zero variance")


class NotStandardized(TopoDistError):
    pass


class NumericalDomain(NumericalError):
    pass


class NegativeWeight(TopoDistError):
    pass


class DimensionMismatch(TopoDistError):
    pass


class NotPositiveDefinite(NumericalError):
    def __init__(self, which, min_eigenvalue):
        self.which = which
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"matrix {which} is not positive definite "
            f"(smallest eigenvalue {min_eigenvalue:.3e})"
        )


class EmptyGraph(TopoDistError):
    pass


class InfiniteSLD(TopoDistError):
    pass


class TooFewRows(TopoDistError):
    pass


class CapExceeded(TopoDistError):
    pass


class TooFewPairs(TopoDistError):
    pass


class DegreeTooHigh(TopoDistError):
    pass
