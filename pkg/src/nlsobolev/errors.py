"""Exception hierarchy.

Two branches matter to callers: :class:`ValidationError` (bad input or a
kernel that violates a structural condition) and :class:`NumericalError`
(an iteration or quadrature that did not converge). The CLI maps them to
exit codes 2 and 1.
"""


class NlSobolevError(Exception):
    """Base class for all package errors."""


class ValidationError(NlSobolevError, ValueError):
    pass


class NumericalError(NlSobolevError, ArithmeticError):
    pass


# kernel_model
class NonPositiveRadius(ValidationError):
    pass


class OutOfTabulatedRange(ValidationError):
    pass


class NonMonotoneKernel(ValidationError):
    pass


class DivergentTail(ValidationError):
    pass


class QuadratureNonConvergence(NumericalError):
    pass


class LacunaryOverflow(NumericalError, OverflowError):
    """Raised when a_n underflows; ``largest_valid`` holds the last usable n."""

    def __init__(self, msg, largest_valid):
        super().__init__(msg)
        self.largest_valid = largest_valid


# exponent
class GridTooCoarse(NumericalError):
    pass


class Inconclusive(NumericalError):
    """A diagnostic could not decide; ``data`` carries what was computed."""

    def __init__(self, msg, data=None):
        super().__init__(msg)
        self.data = data


class NotFound(NumericalError):
    """Fewer items than requested; ``found`` carries the partial result."""

    def __init__(self, msg, found=None):
        super().__init__(msg)
        self.found = found if found is not None else []


# domain_grid / assembly
class ResolutionTooLow(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class UnsupportedDimension(ValidationError):
    pass


class NonIntegrableKernel(ValidationError):
    pass


class GridTooLarge(ValidationError):
    pass


# solver
class NonConvergence(NumericalError):
    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class TrivialCollapse(NumericalError):
    pass


class PathCollapse(NumericalError):
    pass


# probe
class RhoNotMultipleOfH(ValidationError):
    pass


# cli
class ConfigParseError(ValidationError):
    pass


class CacheFingerprintMismatch(ValidationError):
    pass
