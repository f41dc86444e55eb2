"""Hook Schur polynomials S_r(z_1..z_{n+1}).

S_r is defined as a ratio of two (n+1)x(n+1) determinants: the numerator is
the Vandermonde matrix with its top row of powers z^n replaced by z^r, the
denominator the plain Vandermonde. It equals the complete homogeneous
symmetric polynomial h_{r-n}(z), and sum_r S_r / x^{r+1} = prod_k 1/(x - z_k).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateSpectrum, DegenerateVariables, DivergentSeries, InvalidDegree
from .spectra import SEPARATION_TOL, validate_spectrum


@dataclass(frozen=True)
class HookSchurInput:
    variables: tuple[complex, ...]
    degree_r: int

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(complex(v) for v in self.variables))
        if not self.variables:
            raise ValueError("need at least one variable")
        if self.degree_r < 0:
            raise InvalidDegree(f"degree must be non-negative, got {self.degree_r}")

    @property
    def n(self) -> int:
        return len(self.variables) - 1


def _check_degree(n: int, r: int):
    if r < n:
        raise InvalidDegree(f"degree r={r} is below n={n}; the hook polynomial vanishes there")


def schur_hook_det(inp: HookSchurInput, separation_tol: float = SEPARATION_TOL) -> complex:
    """Bordered-Vandermonde determinant ratio, evaluated by LU."""
    n, r = inp.n, inp.degree_r
    _check_degree(n, r)
    z = np.array(inp.variables)
    if n == 0:
        return complex(z[0] ** r)
    try:
        validate_spectrum(z, separation_tol)
    except DegenerateSpectrum as exc:
        raise DegenerateVariables(*exc.pair, exc.gap, exc.tol) from None
    powers = np.arange(n + 1)
    den = z[None, :] ** powers[:, None]
    num = den.copy()
    num[n] = z**r
    return complex(np.linalg.det(num) / np.linalg.det(den))


def complete_homogeneous(variables: Sequence[complex], max_degree: int) -> np.ndarray:
    """h_0..h_K of the variables via h_k(z_1..z_m) = h_k(z_1..z_{m-1}) + z_m h_{k-1}(z_1..z_m)."""
    dtype = np.clongdouble if np.asarray(variables).dtype == np.clongdouble else complex
    h = np.zeros(max_degree + 1, dtype=dtype)
    h[0] = 1
    for z in variables:
        for k in range(1, max_degree + 1):
            h[k] += z * h[k - 1]
    return h


def schur_hook_sum(variables: Sequence[complex], degree_r: int) -> complex:
    """Monomial-sum form: h_{r-n}; repeated variables are allowed."""
    n = len(variables) - 1
    _check_degree(n, degree_r)
    return complex(complete_homogeneous(variables, degree_r - n)[-1])


def schur_generating_partial(variables: Sequence[complex], x: complex, r_max: int) -> tuple[complex, complex]:
    """Truncated sum_{r<=r_max} S_r / x^{r+1} and the closed product prod 1/(x - z_k).

    Terms with r < n vanish and are skipped.
    """
    z = np.asarray(variables, dtype=complex)
    n = len(z) - 1
    x = complex(x)
    if abs(x) <= np.max(np.abs(z)):
        raise DivergentSeries(f"|x|={abs(x):.6g} does not exceed max|z_k|={np.max(np.abs(z)):.6g}")
    # both sides accumulate in extended precision (80-bit on x86) and are
    # rounded once, so their gap is the truncation plus about one ulp
    zl = z.astype(np.clongdouble)
    xl = np.clongdouble(x)
    product = complex(np.prod(1 / (xl - zl)))
    if r_max < n:
        return 0j, product
    h = complete_homogeneous(zl, r_max - n)
    # Horner in 1/x: no complex powers
    inv = 1 / xl
    acc = np.clongdouble(0)
    for hk in h[::-1]:
        acc = acc * inv + hk
    for _ in range(n + 1):
        acc *= inv
    return complex(acc), product


def generating_tail_bound(variables: Sequence[complex], x: complex, r_max: int) -> float:
    """Rigorous bound on |sum_{r > r_max} S_r / x^{r+1}|.

    Uses |h_k| <= C(k+n, n) M^k with M = max|z_k|; the binomial tail is
    summed as a geometric series from its first term.
    """
    z = np.asarray(variables, dtype=complex)
    n = len(z) - 1
    rho = float(np.max(np.abs(z))) / abs(x)
    if rho >= 1.0:
        return math.inf
    k0 = max(r_max - n + 1, 0)
    first = math.comb(k0 + n, n) * rho**k0
    q = rho * (k0 + n + 1) / (k0 + 1)
    if q >= 1.0:
        # tail not yet in its geometric regime: sum explicitly until it is
        total, k = 0.0, k0
        while True:
            term = math.comb(k + n, n) * rho**k
            q = rho * (k + n + 1) / (k + 1)
            if q < 1.0:
                total += term / (1.0 - q)
                break
            total += term
            k += 1
        return total / abs(x) ** (n + 1)
    return first / (1.0 - q) / abs(x) ** (n + 1)
