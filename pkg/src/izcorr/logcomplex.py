"""Complex numbers stored as (log-magnitude, unit phase)."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath as mp


def _unit(z: complex) -> complex:
    r = abs(z)
    if r == 0.0 or not math.isfinite(r):
        return complex(1.0)
    return z / r


@dataclass(frozen=True)
class LogComplex:
    """A complex number ``exp(log_magnitude) * phase``.

    ``log_magnitude = -inf`` encodes an exact zero. Products and quotients
    never leave the representable range, which is what determinants of
    ``exp(x_i * y_j)`` kernels need.
    """

    log_magnitude: float
    phase: complex = 1.0 + 0.0j

    def __post_init__(self):
        object.__setattr__(self, "log_magnitude", float(self.log_magnitude))
        object.__setattr__(self, "phase", _unit(complex(self.phase)))

    @classmethod
    def one(cls) -> LogComplex:
        return cls(0.0, 1.0)

    @classmethod
    def zero(cls) -> LogComplex:
        return cls(-math.inf, 1.0)

    @classmethod
    def from_complex(cls, z) -> LogComplex:
        """Convert a Python/numpy complex or an mpmath number."""
        if isinstance(z, (mp.mpf, mp.mpc)):
            if z == 0:
                return cls.zero()
            return cls(float(mp.log(abs(z))), complex(z / abs(z)))
        z = complex(z)
        if z == 0:
            return cls.zero()
        return cls(math.log(abs(z)), z)

    @classmethod
    def from_log(cls, log_z: complex) -> LogComplex:
        """Build ``exp(log_z)`` for a complex logarithm."""
        return cls(log_z.real, cmath.exp(1j * log_z.imag))

    @property
    def is_zero(self) -> bool:
        return self.log_magnitude == -math.inf

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        return math.exp(self.log_magnitude) * self.phase

    __complex__ = to_complex

    def __mul__(self, other) -> LogComplex:
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        return LogComplex(self.log_magnitude + other.log_magnitude, self.phase * other.phase)

    __rmul__ = __mul__

    def __truediv__(self, other) -> LogComplex:
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if other.is_zero:
            raise ZeroDivisionError("division by LogComplex zero")
        return LogComplex(
            self.log_magnitude - other.log_magnitude, self.phase * other.phase.conjugate()
        )

    def __neg__(self) -> LogComplex:
        return LogComplex(self.log_magnitude, -self.phase)

    def __pow__(self, k: int) -> LogComplex:
        if k == 0:
            return LogComplex.one()
        return LogComplex(k * self.log_magnitude, self.phase**k)

    def conjugate(self) -> LogComplex:
        return LogComplex(self.log_magnitude, self.phase.conjugate())

    def rel_diff(self, other: LogComplex) -> float:
        """Relative distance |a - b| / |b| computed without leaving log space."""
        if self.is_zero and other.is_zero:
            return 0.0
        if other.is_zero:
            return math.inf
        ratio = (self / other).to_complex()
        return abs(ratio - 1.0)
