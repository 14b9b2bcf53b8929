"""Exception hierarchy for the whole package."""


class DergreenError(Exception):
    """Base class for all package errors."""


class OutOfDomain(DergreenError):
    """Evaluation point lies outside the kernel's square domain."""


class DegenerateReduction(DergreenError):
    """The reduced operator vanished (or collapsed in order), so the
    reduction method cannot produce a well-posed ordinary problem."""


class ConvergenceFailure(DergreenError):
    """Polynomial root finding did not meet the residual tolerance."""


class NoRealFactorization(DergreenError):
    """Neither closed-form case applies to the order-2 operator."""


class NotDecomposable(DergreenError):
    """Boundary conditions cannot be split across the two factors."""


class NonUniqueBVP(DergreenError):
    """The homogeneous boundary value problem has nontrivial solutions,
    so no Green's function exists."""


class ComplexFactorizationSkipped(DergreenError):
    """The even polynomial only factors with complex coefficients and the
    complex route was not enabled."""


class ParseError(DergreenError):
    """Problem file or expression text failed to parse."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", column {column}"
            loc += ": "
        super().__init__(loc + message)


class DimensionError(ParseError):
    """A matrix or vector in the problem file has the wrong shape."""
