"""
Exception types raised by biharmonic-lab.

Argument and configuration problems derive from ValueError, numerical
breakdowns from ArithmeticError. The CLI maps the first family to exit
code 2 and the second to exit code 3.
"""


class BiharmonicError(Exception):
    """Base class for every error raised by this package"""


class DomainError(BiharmonicError, ValueError):
    """A radius or parameter lies outside the domain of an operation"""


class UnsupportedOrderError(BiharmonicError, ValueError):
    """A derivative order beyond what a function descriptor provides"""


class UnsupportedDimensionError(BiharmonicError, ValueError):
    """An operation only defined for a fixed model dimension was given another"""


class UnsupportedTargetError(BiharmonicError, ValueError):
    """Target model is not one of the flat, spherical or hyperbolic space forms"""


class UnsupportedStartError(BiharmonicError, ValueError):
    """No regular start is available for this dimension, eigenmap or target"""


class CatalogError(BiharmonicError, ValueError):
    """
    A name that does not resolve against a catalog.
    Carries close matches so callers can show a suggestion.
    """
    def __init__(self, message, suggestions=None):
        super().__init__(message)
        self.suggestions = list(suggestions or [])


class EmptyProfileError(BiharmonicError, ValueError):
    """A closed-form profile with no terms"""


class NotApplicableError(BiharmonicError, ValueError):
    """The operation does not apply to this kind of map"""


class DegenerateFamilyError(BiharmonicError, ValueError):
    """A closed-form family whose coefficients divide by zero"""


class NotConformalError(BiharmonicError, ValueError):
    """The conformality residual exceeds its tolerance"""


class PreconditionError(BiharmonicError, ValueError):
    """The map or variation does not meet the requirements of the operation"""


class RangeError(BiharmonicError, ValueError):
    """The profile value falls outside the target warping domain"""


class StencilError(BiharmonicError, ValueError):
    """A finite-difference stencil leaves the domain"""


class ConfigError(BiharmonicError, ValueError):
    """Invalid run configuration; holds the full list of diagnostics"""
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        summary = "; ".join(d.get('message', '') for d in self.diagnostics)
        super().__init__(summary or "invalid configuration")


class SingularityError(BiharmonicError, ArithmeticError):
    """Division by a vanishing warping value (pole of the model)"""


class EvaluationError(BiharmonicError, ArithmeticError):
    """Non-finite integrand sample"""
    def __init__(self, message, abscissa=None):
        super().__init__(message)
        self.abscissa = abscissa


class StiffnessError(BiharmonicError, ArithmeticError):
    """Adaptive step size fell below h_min"""


class RangeEscapeError(BiharmonicError, ArithmeticError):
    """The integrated profile left the target domain"""
    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class NoConvergenceError(BiharmonicError, ArithmeticError):
    """Newton shooting did not reach newton_tol"""
    def __init__(self, message, mismatch=None):
        super().__init__(message)
        self.mismatch = mismatch


class SpectralError(BiharmonicError, ArithmeticError):
    """The symmetric eigenvalue iteration did not converge"""
