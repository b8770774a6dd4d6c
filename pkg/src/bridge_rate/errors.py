"""Exception types shared across the package.

Each maps to a CLI exit code: validation problems exit 2, resource caps and
solver failures exit 3.
"""


class ValidationError(ValueError):
    """Bad user input: unknown law, out-of-range parameter, malformed file."""

    code = "INVALID"


class UnknownLaw(ValidationError):
    code = "UNKNOWNLAW"


class SizeCap(RuntimeError):
    """A table or LP would exceed its configured size cap."""

    code = "SIZECAP"


class TooLarge(SizeCap):
    """Enumeration space too large for an exact computation."""

    code = "TOOLARGE"


class QuadratureFailure(RuntimeError):
    """Adaptive quadrature could not meet the requested tolerance."""

    code = "QUADFAIL"


class SolverFailure(RuntimeError):
    """The LP / assignment solver did not return an optimal solution."""

    code = "SOLVERFAIL"


class KappaNotFound(RuntimeError):
    """No return period k <= n_max makes the walk hit 0 with positive mass."""

    code = "KAPPANOTFOUND"
