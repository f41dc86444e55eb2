"""The Harish-Chandra-Itzykson-Zuber integral I(X, Y) = det E / (Delta(X) Delta(Y))."""
from __future__ import annotations

import math

from .clinalg import DEFAULT_TARGET_DIGITS, Precision, logdet, resolve_precision
from .logcomplex import LogComplex
from .spectra import ProblemPair, vandermonde


def haar_constant(n: int) -> LogComplex:
    """c_N = prod_{p=1}^{N-1} p!, the factor between the two Haar normalizations."""
    return LogComplex(sum(math.lgamma(p + 1) for p in range(1, n)))


def hciz_value(
    pair: ProblemPair,
    precision: Precision = "auto",
    target_digits: int = DEFAULT_TARGET_DIGITS,
) -> LogComplex:
    """I(X, Y) with the Haar measure normalized so that the prefactor is 1."""
    k = resolve_precision(pair, precision, target_digits)
    return logdet(k) / (vandermonde(pair.x) * vandermonde(pair.y))


def hciz_probability_normalized(
    pair: ProblemPair,
    precision: Precision = "auto",
    target_digits: int = DEFAULT_TARGET_DIGITS,
) -> LogComplex:
    """E_U[exp tr(X U^dag Y U)] for U drawn from the probability Haar measure."""
    return haar_constant(pair.n) * hciz_value(pair, precision, target_digits)
