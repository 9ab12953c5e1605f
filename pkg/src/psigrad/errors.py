"""Exception hierarchy.

Everything raised deliberately by the package derives from
:class:`PsiGradError`; argument-type problems derive from ``ValueError`` as
well so that callers treating bad input generically keep working.
"""


class PsiGradError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PsiGradError, ValueError):
    """Invalid arguments or input data (CLI exit code 2)."""


class InvalidSpectrum(ConfigurationError):
    pass


class DimensionMismatch(ConfigurationError):
    pass


class InvalidClass(ConfigurationError):
    """(mu, L) do not describe a valid, non-degenerate class."""


class DegenerateClass(InvalidClass):
    """mu == L, where the interpolation inequality is undefined."""


class DegenerateRows(ConfigurationError):
    pass


class InvalidRule(ConfigurationError):
    pass


class NonPositiveWeight(ConfigurationError):
    """The spectral weight is not strictly positive on [mu, L]."""


class RuleInapplicable(ConfigurationError):
    pass


class InsufficientIterates(ConfigurationError):
    pass


class ZeroConstant(ConfigurationError):
    pass


class StepOutOfRange(ConfigurationError):
    pass


class WrongCase(PsiGradError):
    pass


class RuleMismatch(PsiGradError):
    pass


class MetricUnavailable(PsiGradError):
    pass


class ZeroGradient(PsiGradError, ZeroDivisionError):
    pass


class NegativeGap(PsiGradError):
    """f_k < f_* beyond tolerance: the supplied optimal value is wrong."""


class BracketFailure(PsiGradError):
    """The directional derivative does not change sign where it must."""


class OrthogonalityViolated(PsiGradError):
    pass


class AssumptionViolated(PsiGradError):
    pass


class NumericalFailure(PsiGradError):
    """Numerical breakdown (CLI exit code 3)."""


class NonFiniteIterate(NumericalFailure):
    pass
