"""Eigenvalue lists, the validated problem instance, Vandermonde products."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSpectrum, DimensionMismatch, EmptySpectrum
from .logcomplex import LogComplex

SEPARATION_TOL = 1e-10


def min_gap(values: Sequence[complex]) -> tuple[float, int, int]:
    """Smallest pairwise distance and the pair that attains it."""
    z = np.asarray(values, dtype=complex)
    best, bi, bj = math.inf, -1, -1
    for i in range(len(z) - 1):
        d = np.abs(z[i + 1 :] - z[i])
        k = int(np.argmin(d))
        if d[k] < best:
            best, bi, bj = float(d[k]), i, i + 1 + k
    return best, bi, bj


@dataclass(frozen=True)
class Spectrum:
    """Ordered list of pairwise-distinct complex eigenvalues.

    Construct through :func:`validate_spectrum`; the constructor itself
    does not check distinctness.
    """

    values: tuple[complex, ...]

    def __len__(self) -> int:
        return len(self.values)

    @property
    def n(self) -> int:
        return len(self.values)

    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=complex)

    def scaled(self, c: complex) -> Spectrum:
        return Spectrum(tuple(c * v for v in self.values))

    def shifted(self, c: complex) -> Spectrum:
        return Spectrum(tuple(v + c for v in self.values))

    def permuted(self, order: Iterable[int]) -> Spectrum:
        return Spectrum(tuple(self.values[k] for k in order))


def validate_spectrum(values: Iterable[complex], separation_tol: float = SEPARATION_TOL) -> Spectrum:
    vals = tuple(complex(v) for v in values)
    if not vals:
        raise EmptySpectrum("spectrum must contain at least one value")
    if not all(math.isfinite(v.real) and math.isfinite(v.imag) for v in vals):
        raise ValueError("spectrum values must be finite")
    if len(vals) > 1:
        gap, i, j = min_gap(vals)
        if gap <= separation_tol:
            raise DegenerateSpectrum(i, j, gap, separation_tol)
    return Spectrum(vals)


@dataclass(frozen=True)
class ProblemPair:
    """The two diagonal matrices X and Y, given by their spectra.

    Only the equal-length invariant is checked here; :func:`make_pair`
    additionally checks that the kernel determinant is nonzero.
    """

    x: Spectrum
    y: Spectrum

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise DimensionMismatch(f"spectra lengths differ: {len(self.x)} vs {len(self.y)}")

    @property
    def n(self) -> int:
        return len(self.x)

    def swapped(self) -> ProblemPair:
        return ProblemPair(self.y, self.x)

    def scaled(self, eps: complex) -> ProblemPair:
        return ProblemPair(self.x.scaled(eps), self.y.scaled(eps))


def make_pair(x: Iterable[complex], y: Iterable[complex], separation_tol: float = SEPARATION_TOL) -> ProblemPair:
    """Validate both spectra and the kernel determinant; return the pair."""
    from .clinalg import logdet, resolve_precision

    xs = x if isinstance(x, Spectrum) else validate_spectrum(x, separation_tol)
    ys = y if isinstance(y, Spectrum) else validate_spectrum(y, separation_tol)
    pair = ProblemPair(xs, ys)
    # a zero pivot in double can be rounding on an ill-conditioned kernel, so the
    # check runs at the precision the condition estimate asks for
    logdet(resolve_precision(pair))
    return pair


def vandermonde(s: Spectrum) -> LogComplex:
    """prod_{i<j} (values[i] - values[j]) in log form; exactly 1 for N=1."""
    z = s.array()
    log_mag = 0.0
    phase = 1.0 + 0.0j
    for i in range(len(z) - 1):
        d = z[i] - z[i + 1 :]
        log_mag += float(np.sum(np.log(np.abs(d))))
        for f in d / np.abs(d):
            phase *= f
        phase /= abs(phase)
    return LogComplex(log_mag, phase)
