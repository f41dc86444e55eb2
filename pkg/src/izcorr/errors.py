"""Exception hierarchy.

Validation errors (bad input, violated assumptions) derive from
``ValidationError``; Monte Carlo failures derive from ``MonteCarloError``.
The CLI maps the two families to distinct exit codes.
"""


class IZError(Exception):
    """Base class for all package errors."""


class ValidationError(IZError, ValueError):
    pass


class EmptySpectrum(ValidationError):
    pass


class DegenerateSpectrum(ValidationError):
    """Two eigenvalues closer than the separation tolerance."""

    def __init__(self, i, j, gap, tol):
        self.pair = (i, j)
        self.gap = gap
        self.tol = tol
        super().__init__(
            f"entries {i} and {j} are {gap:.3g} apart (separation_tol={tol:.3g})"
        )


class DegenerateVariables(DegenerateSpectrum):
    pass


class SingularKernel(ValidationError):
    pass


class InvalidDegree(ValidationError):
    pass


class DivergentSeries(ValidationError):
    pass


class PoleProximity(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class DimensionMismatch(ValidationError):
    pass


class DimensionTooLarge(ValidationError):
    pass


class StochasticityViolation(IZError, ArithmeticError):
    """Row or column sums of the correlator matrix drifted away from 1."""

    def __init__(self, deviation, tol, condition):
        self.deviation = deviation
        self.tol = tol
        self.condition = condition
        super().__init__(
            f"sum rule violated by {deviation:.3g} (tol {tol:.3g}); "
            f"kernel condition estimate {condition:.3g}"
        )


class MonteCarloError(IZError, ArithmeticError):
    pass


class VarianceOverflow(MonteCarloError):
    pass


class DegenerateDenominator(MonteCarloError):
    pass
