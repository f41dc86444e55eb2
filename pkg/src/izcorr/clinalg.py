"""Overflow-safe complex linear algebra for the kernel E_ij = exp(x_i y_j).

Two arithmetic backends share every formula in the package:

* double precision: ``complex128`` arrays, LAPACK LU through scipy;
* multiprecision: numpy ``object`` arrays of ``mpmath.mpc`` with a small
  generic LU below. Evaluate these inside ``mp.workdps(dps)``.

The kernel of a tightly clustered spectrum is nearly singular (it is a
sampled smooth function), and every quantity downstream loses about
``log10(cond)`` digits in double precision. :func:`resolve_precision`
uses :func:`condition_estimate` to pick the working precision.
"""
from __future__ import annotations

import contextlib
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import mpmath as mp
import numpy as np
import scipy.linalg as sla

from .errors import SingularKernel
from .logcomplex import LogComplex
from .spectra import ProblemPair

Precision = Union[str, int, None]

EPS = np.finfo(float).eps
# Observed worst case over random clustered spectra: relative error of W and
# of correlator entries in double precision is about 10 * eps * cond.
DOUBLE_ERROR_FACTOR = 10.0
DEFAULT_TARGET_DIGITS = 11
MAX_DPS = 4000


def is_mp(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def workdps(dps: int | None):
    return mp.workdps(dps) if dps else contextlib.nullcontext()


def to_mp(a) -> np.ndarray:
    """Exact conversion of a complex array (or nested list) to mpc objects."""
    a = np.asarray(a)
    if a.dtype == object:
        return a
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = mp.mpc(complex(v))
    return out


def mp_exp(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = mp.exp(v)
    return out


def as_complex(a) -> np.ndarray:
    """Round an mpc object array (or scalar array) to complex128."""
    a = np.asarray(a)
    if a.dtype != object:
        return a.astype(complex)
    return np.vectorize(complex, otypes=[complex])(a)


def identity_like(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if is_mp(a):
        out = np.full((n, n), mp.mpc(0), dtype=object)
        for k in range(n):
            out[k, k] = mp.mpc(1)
        return out
    return np.eye(n, dtype=complex)


class LUFactors:
    """LU with partial pivoting of a square complex matrix.

    ``complex128`` input is factored by LAPACK; ``object`` (mpmath) input by
    the generic elimination in :meth:`_factor_generic`.
    """

    def __init__(self, a: np.ndarray):
        a = np.asarray(a)
        self.n = a.shape[0]
        self.mp = is_mp(a)
        if self.mp:
            self._factor_generic(a)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                self.lu, self.piv = sla.lu_factor(a.astype(complex))
            self.sign = -1 if np.count_nonzero(self.piv != np.arange(self.n)) % 2 else 1
        self.pivots = np.diagonal(self.lu)
        self.singular = any(p == 0 for p in self.pivots)

    def _factor_generic(self, a):
        lu = a.copy()
        n = self.n
        perm = np.arange(n)
        sign = 1
        for k in range(n):
            col = lu[k:, k]
            p = k + max(range(n - k), key=lambda t: abs(col[t]))
            if p != k:
                lu[[k, p]] = lu[[p, k]]
                perm[[k, p]] = perm[[p, k]]
                sign = -sign
            if lu[k, k] == 0:
                continue
            lu[k + 1 :, k] = lu[k + 1 :, k] / lu[k, k]
            lu[k + 1 :, k + 1 :] = lu[k + 1 :, k + 1 :] - np.outer(lu[k + 1 :, k], lu[k, k + 1 :])
        self.lu = lu
        self.perm = perm
        self.sign = sign

    def logdet(self) -> LogComplex:
        if self.singular:
            return LogComplex.zero()
        if self.mp:
            log_mag = mp.fsum(mp.log(abs(p)) for p in self.pivots)
            phase = mp.mpc(self.sign)
            for p in self.pivots:
                phase *= p / abs(p)
            return LogComplex(float(log_mag), complex(phase))
        d = self.pivots
        phase = complex(self.sign)
        for f in d / np.abs(d):
            phase *= f
        return LogComplex(float(np.sum(np.log(np.abs(d)))), phase)

    def det(self):
        """Plain determinant (complex, or mpc on the multiprecision path)."""
        if self.mp:
            out = mp.mpc(self.sign)
            for p in self.pivots:
                out *= p
            return out
        return complex(self.sign * np.prod(self.pivots))

    def solve(self, b, trans: bool = False) -> np.ndarray:
        """Solve ``A x = b`` (or ``A^T x = b``); ``b`` may be 1-D or 2-D."""
        if not self.mp:
            return sla.lu_solve((self.lu, self.piv), np.asarray(b, dtype=complex), trans=1 if trans else 0)
        b = to_mp(b)
        lu, n = self.lu, self.n
        if not trans:
            x = b[self.perm].copy()
            for k in range(n):
                x[k + 1 :] = x[k + 1 :] - np.multiply.outer(lu[k + 1 :, k], x[k])
            for k in range(n - 1, -1, -1):
                x[k] = x[k] / lu[k, k]
                x[:k] = x[:k] - np.multiply.outer(lu[:k, k], x[k])
            return x
        # A^T = U^T L^T P: solve U^T z = b, L^T w = z, then undo the permutation
        z = b.copy()
        for k in range(n):
            z[k] = z[k] / lu[k, k]
            z[k + 1 :] = z[k + 1 :] - np.multiply.outer(lu[k, k + 1 :], z[k])
        for k in range(n - 1, -1, -1):
            z[:k] = z[:k] - np.multiply.outer(lu[k, :k], z[k])
        x = np.empty_like(z)
        x[self.perm] = z
        return x

    def solve_right(self, f) -> np.ndarray:
        """Return ``F A^{-1}`` via ``A^T G^T = F^T`` (one factorization, all rows)."""
        f = to_mp(f) if self.mp else np.asarray(f, dtype=complex)
        return self.solve(f.T, trans=True).T


def det(a: np.ndarray):
    """Determinant by partial-pivoting LU in the array's own precision."""
    if is_mp(a):
        return LUFactors(a).det()
    return complex(np.linalg.det(np.asarray(a, dtype=complex)))


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Row-scaled kernel: E_ij = exp(row_shifts[i]) * scaled_entries[i, j].

    ``row_shifts[i] = max_j Re(x_i y_j)`` so every scaled entry has modulus
    at most 1. ``dps`` is ``None`` for complex128 entries, otherwise the
    mpmath precision the entries were built with.
    """

    row_shifts: np.ndarray
    scaled_entries: np.ndarray
    dps: int | None = None

    @property
    def n(self) -> int:
        return len(self.row_shifts)

    @cached_property
    def lu(self) -> LUFactors:
        with workdps(self.dps):
            return LUFactors(self.scaled_entries)

    def entries(self) -> np.ndarray:
        """Unscaled E in double precision (overflows for large exponents)."""
        return np.exp(self.row_shifts)[:, None] * as_complex(self.scaled_entries)


def build_kernel(pair: ProblemPair, dps: int | None = None) -> KernelMatrix:
    x, y = pair.x.array(), pair.y.array()
    expo = np.outer(x, y)
    shifts = expo.real.max(axis=1)
    if dps is None:
        return KernelMatrix(shifts, np.exp(expo - shifts[:, None]))
    with mp.workdps(dps):
        xm, ym = to_mp(x), to_mp(y)
        ex = np.multiply.outer(xm, ym) - to_mp(shifts.astype(complex))[:, None]
        return KernelMatrix(shifts, mp_exp(ex), dps)


def logdet(k: KernelMatrix) -> LogComplex:
    """det E = exp(sum of row shifts) * det(scaled entries)."""
    lu = k.lu
    if lu.singular:
        raise SingularKernel("kernel LU hit an exactly-zero pivot: det E = 0")
    with workdps(k.dps):
        return LogComplex(float(np.sum(k.row_shifts))) * lu.logdet()


def solve_right(k: KernelMatrix, f) -> np.ndarray:
    """G with G E = F, i.e. G = F E^{-1}, without forming the inverse."""
    if k.lu.singular:
        raise SingularKernel("kernel LU hit an exactly-zero pivot: det E = 0")
    with workdps(k.dps):
        g = k.lu.solve_right(f)
        if k.dps is None:
            return g * np.exp(-k.row_shifts)[None, :]
        scale = np.array([mp.exp(-mp.mpf(m)) for m in k.row_shifts], dtype=object)
        return g * scale[None, :]


def _inverse_norm1_estimate(lu: LUFactors) -> float:
    """Lower bound on ||A^{-1}||_1 from the Hager-Higham iteration."""
    n = lu.n
    mpath = lu.mp
    conv = (lambda v: to_mp(v)) if mpath else (lambda v: np.asarray(v, dtype=complex))

    def abs_f(v):
        return np.array([float(abs(t)) for t in v]) if mpath else np.abs(v)

    def conj(v):
        return np.array([t.conjugate() for t in v], dtype=object) if mpath else np.conj(v)

    x = conv(np.full(n, 1.0 / n))
    est = 0.0
    for it in range(5):
        y = lu.solve(x)
        new = float(np.sum(abs_f(y)))
        if it > 0 and new <= est:
            break
        est = new
        ay = abs_f(y)
        xi = np.ones(n, dtype=complex)
        nz = ay > 0
        yc = as_complex(y)
        xi[nz] = yc[nz] / ay[nz]
        z = conj(lu.solve(conj(conv(xi)), trans=True))
        az = abs_f(z)
        j = int(np.argmax(az))
        if it > 0 and az[j] <= float(np.real(np.vdot(as_complex(z), as_complex(x)))):
            break
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        x = conv(e)
    if n > 1:
        alt = np.array([(-1) ** i * (1 + i / (n - 1)) for i in range(n)], dtype=complex)
        est = max(est, 2 * float(np.sum(abs_f(lu.solve(conv(alt))))) / (3 * n))
    return est


def condition_estimate(k: KernelMatrix) -> float:
    """1-norm condition estimate of the scaled kernel (>= 1, inf if singular)."""
    lu = k.lu
    if lu.singular:
        return math.inf
    with workdps(k.dps):
        a = k.scaled_entries
        norm = max(float(sum(abs(v) for v in a[:, j])) for j in range(k.n))
        inv = _inverse_norm1_estimate(lu)
    return max(1.0, norm * inv)


def double_is_enough(cond: float, target_digits: int = DEFAULT_TARGET_DIGITS) -> bool:
    return DOUBLE_ERROR_FACTOR * EPS * cond <= 10.0 ** (-target_digits)


def resolve_precision(
    pair: ProblemPair,
    precision: Precision = "auto",
    target_digits: int = DEFAULT_TARGET_DIGITS,
) -> KernelMatrix:
    """Build the kernel at the precision needed for ``target_digits``.

    ``precision`` is ``"auto"``, ``"double"`` (or ``None``), or an explicit
    mpmath ``dps``. The returned kernel's ``dps`` is the chosen precision.
    """
    if precision is None or precision == "double":
        return build_kernel(pair)
    if isinstance(precision, int) and not isinstance(precision, bool):
        return build_kernel(pair, dps=precision)
    if precision != "auto":
        raise ValueError(f"unknown precision {precision!r}")
    k = build_kernel(pair)
    cond = condition_estimate(k)
    if double_is_enough(cond, target_digits):
        return k
    if not (cond < 1e13):
        # the double estimate saturates; re-estimate in multiprecision
        probe = 40
        while True:
            cond = condition_estimate(build_kernel(pair, dps=probe))
            if cond < 10.0 ** (probe - 12) or probe >= MAX_DPS:
                break
            probe *= 2
    dps = target_digits + int(math.ceil(math.log10(max(cond, 1.0)))) + 8
    return build_kernel(pair, dps=min(dps, MAX_DPS))
