"""Exception types raised across the package."""


class CrossDiffError(Exception):
    """Base class for all package errors."""


class ContractViolation(CrossDiffError, ValueError):
    """An input violates an operation's precondition."""


class DomainError(CrossDiffError, ValueError):
    """A state lies outside the admissible domain of a model or entropy."""


class EigenvalueError(CrossDiffError):
    """The eigenvalue iteration did not converge."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SolvabilityError(CrossDiffError):
    """The Lyapunov equation has no unique solution (some eigenvalue pair sums to zero)."""


class DivergenceError(CrossDiffError):
    """An improper integral does not converge."""


class NotNormallyElliptic(CrossDiffError):
    pass


class NotDiagonalizable(CrossDiffError):
    pass


class NonPositiveSpectrum(CrossDiffError):
    pass


class UnsupportedError(CrossDiffError):
    """The model family does not provide the requested structure."""


class NotClosed(CrossDiffError):
    """The weighted pressure field is not curl free, so no potential exists."""


class NoBoundAvailable(CrossDiffError):
    pass


class QuadratureError(CrossDiffError):
    pass


class StepRejected(CrossDiffError):
    pass


class SimulationError(CrossDiffError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class Stalled(SimulationError):
    """The time step underflowed after repeated rejections."""


class Diverged(SimulationError):
    """The state became non-finite."""


class SpecError(CrossDiffError):
    """A model-spec or matrix file failed to parse or validate."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field:
            loc.append(f"field '{field}'")
        prefix = f"{', '.join(loc)}: " if loc else ""
        super().__init__(prefix + message)
