"""Exception types shared across the package."""


class NumericsError(RuntimeError):
    """Base class for runtime numerical failures."""


class PositivityError(NumericsError):
    """A density undershot below the allowed negative tolerance."""

    def __init__(self, species, node, value, tol):
        self.species = species
        self.node = node
        self.value = value
        self.tol = tol
        super().__init__(
            f"n{species} at node {node} reached {value:.3e} "
            f"(allowed undershoot {-tol:.3e})"
        )


class BlowupError(NumericsError):
    """Non-finite values appeared during time stepping."""


class DegenerateStateError(NumericsError):
    """A diagnostic was requested on a state it cannot be computed from."""


class IntegrandError(ValueError):
    """A quadrature integrand produced non-finite samples."""


class GridMismatchError(ValueError):
    """Two objects that must share a grid do not."""


class ConfigConflictError(ValueError):
    """A config file sets a field that the chosen preset forces."""

    def __init__(self, field, wanted, forced):
        self.field = field
        super().__init__(
            f"preset forces {field}={forced!r}, config file sets {wanted!r}"
        )


class HypothesisFailure(RuntimeError):
    """Coefficient field failed the structural hypothesis checks."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"hypothesis check failed: {report.summary()}")
