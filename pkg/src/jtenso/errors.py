"""Exception types shared across the toolkit.

Numerical failures are deliberately fine-grained so that callers (and the
CLI exit-code mapping) can distinguish "the algorithm diverged" from "the
problem was ill-posed" without string-matching messages.
"""


class ToolkitError(Exception):
    """Base class for all toolkit-specific errors."""


class ConfigError(ToolkitError):
    """Invalid or inconsistent run configuration."""


class NumericsError(ToolkitError):
    """Base class for failures inside numerical algorithms."""


class NoConvergence(NumericsError):
    """An iteration exhausted its budget without meeting its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SingularJacobian(NumericsError):
    """A linear solve met a (numerically) singular matrix."""


class DefectiveMatrix(NumericsError):
    """Eigenvector extraction failed (repeated eigenvalue, defective case)."""


class StepSizeUnderflow(NumericsError):
    """Adaptive integration drove the step below the representable minimum.

    Usually indicates finite-time blow-up or an unresolvable discontinuity.
    """

    def __init__(self, message, t=None, step=None):
        super().__init__(message)
        self.t = t
        self.step = step


class NonFiniteState(NumericsError):
    """A state component became NaN or infinite during integration."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class NoReturn(NumericsError):
    """A trajectory failed to come back to the section before t_max."""

    def __init__(self, message, t_max=None):
        super().__init__(message)
        self.t_max = t_max


class NotSaddleFocus(NumericsError):
    """The equilibrium lacks the complex eigenvalue pair the caller needs."""


class DegenerateGeometry(NumericsError):
    """Input points are collinear/degenerate for the requested fit."""


class ZeroIterate(NumericsError):
    """A map orbit landed exactly on zero, so sign epochs are undefined."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InvalidBracket(NumericsError):
    """A bisection bracket does not actually straddle the sought transition."""


class NoEpochs(ToolkitError):
    """Epoch segmentation produced no alternation where one was required."""
