"""Exception types shared across the package."""


class GaugeLabError(Exception):
    """Base class for all errors raised by gaugelab."""


class MissingReference(GaugeLabError):
    """A step or map refers to a vertex or edge that does not exist."""


class WouldViolateAssumption(GaugeLabError):
    """Applying a step would produce a self-loop or a parallel edge."""


class GraphMismatch(GaugeLabError):
    """Objects built over different graphs were combined."""


class InvalidPath(GaugeLabError):
    """A path is not composable or does not live in the expected graph."""


class InvalidOrder(GaugeLabError):
    """Requested group order is out of range."""


class SpecInvalid(GaugeLabError):
    """A Laplacian generating set violates its invariants."""


class BackendUnsupported(GaugeLabError):
    """The operation is only defined for the other basis backend."""


class BudgetExceeded(GaugeLabError):
    """A dimension or enumeration budget was exceeded."""


class BadFractions(GaugeLabError):
    """Inertia split fractions are not positive or do not sum to one."""


class MissingInertia(GaugeLabError):
    """An edge has no inertia assigned."""


class NotEquivariant(GaugeLabError):
    """A Hamiltonian does not commute with the gauge unitaries."""


class InertiaMismatch(GaugeLabError):
    """Coarse and fine inertias are not related by path additivity."""


class SpaceMismatch(GaugeLabError):
    """Kernels or operators over different spaces were combined."""


class CutoffMismatch(GaugeLabError):
    """Momentum cutoffs of two spaces differ."""


class StepInvalid(GaugeLabError):
    """A refinement program step cannot be applied at its level."""


class ParseError(GaugeLabError):
    """An experiment file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line
