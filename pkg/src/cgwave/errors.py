"""Exception taxonomy shared by all modules.

Configuration problems (bad grid sizes, unwritable paths) are distinct from
numeric failures (stalled iterations, non-convergent quadrature) and from
domain violations (inputs outside an operator's admissible set).  The CLI
maps ConfigurationError to exit code 2 and everything else here to 3.
"""

from __future__ import annotations


class CgwaveError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(CgwaveError):
    """Invalid static configuration: grid sizes, file formats, flags."""


class DomainError(CgwaveError):
    """Input lies outside the operator's admissible domain."""


class NumericError(CgwaveError):
    """An iteration or quadrature failed to converge.

    Carries optional diagnostics (residual histories, bracket data) so
    callers can report what the solver saw before giving up.
    """

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class ConvergenceError(NumericError):
    """A series or fixed-point iteration left its convergence regime."""


class StepSizeError(NumericError):
    """Implicit step rejected; a smaller dt is required."""


class RegimeExitError(CgwaveError):
    """The evolved state left the W^{1,inf} hypothesis set."""


class AlignmentError(NumericError):
    """Modulation solve failed: Newton diverged and grid search failed too."""


class InconclusiveError(NumericError):
    """A refinement study failed to stabilize; result is not trustworthy."""
