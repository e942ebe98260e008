"""Exception hierarchy shared by every toolkit module.

Each error carries the CLI exit code it maps to: 1 for a failed
validation, 2 for a usage or domain error, 3 for a closed form that did not
survive numerical validation.
"""

from typing import Any, Dict, Optional


EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_USAGE = 2
EXIT_FORMULA_INVALID = 3


class NefToolkitError(Exception):
    """Base class for toolkit errors."""

    exit_code: int = EXIT_USAGE

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}


# series-core

class NonzeroInnerConstant(NefToolkitError):
    """Composition requested with inner series not vanishing at the origin."""


class NonpositiveConstantTerm(NefToolkitError):
    """Logarithm of a series whose constant term is not positive."""


class ZeroConstantTerm(NefToolkitError):
    """Inversion or negative power of a series with zero constant term."""


class SeriesRangeError(NefToolkitError):
    """Coefficients left the representable floating point range."""


# nef-core

class ThetaOutOfDomain(NefToolkitError):
    """θ lies outside the open parameter interval Θ."""


class MeanOutOfDomain(NefToolkitError):
    """μ lies outside the mean domain U = μ(Θ)."""


class SamplerUnavailable(NefToolkitError):
    """No sampler is registered for the family."""


class DegenerateMeasure(NefToolkitError):
    """Basis concentrated on a single point."""


class UnknownFamily(NefToolkitError):
    """Family name not present in the registry."""


# reduction functions

class NotInfinitelyDivisible(NefToolkitError):
    """A cumulant coefficient c_n (n ≥ 1) is negative beyond roundoff."""

    exit_code = EXIT_VALIDATION_FAILED


class AbsoluteContinuityViolated(NefToolkitError):
    """α charges an atom that β does not."""

    exit_code = EXIT_VALIDATION_FAILED


class BernoulliNoRf(NefToolkitError):
    """Quadratic variance with a2 = −1 has no reduction function."""


class RfUnavailable(NefToolkitError):
    """No reduction function is available for the family or value."""


class NonConvergent(NefToolkitError):
    """Quadrature or summation did not reach the requested tolerance."""

    exit_code = EXIT_VALIDATION_FAILED


class FormulaInvalid(NefToolkitError):
    """A closed form failed the Laplace oracle."""

    exit_code = EXIT_FORMULA_INVALID


class SeriesDiverged(NefToolkitError):
    """Alternating density series lost all significant digits."""

    exit_code = EXIT_VALIDATION_FAILED


class TailTooHeavy(NefToolkitError):
    """Truncated convolution tail exceeds the tolerance at a probe θ."""

    exit_code = EXIT_VALIDATION_FAILED


# residue-verify

class ToleranceNotMet(NefToolkitError):
    """Contour quadrature error estimate above the requested tolerance."""

    exit_code = EXIT_VALIDATION_FAILED


class DegenerateSpectrum(UserWarning):
    """Eigen-gap at the requested rank is below 1e−8."""
