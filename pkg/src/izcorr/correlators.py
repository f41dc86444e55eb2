"""Every <|U_ij|^2> as a double residue of W(x, y) at (x_i, y_j).

W = sum_ij P_ij / ((x - x_i)(y - y_j)) exactly, and W = 1 - h(a, b) with
h(u, v) = det(1 - D_u E D_v E^{-1}) affine in each u_k and in each v_m.
The residue at (x_i, y_j) is therefore minus the mixed coefficient of
u_i v_j, with u_k = 1/(x_i - x_k), v_m = 1/(y_j - y_m) for k != i, m != j.

That coefficient is read off exactly as one determinant ratio,

    P_ij = det(E o T) / det E,

where T has 1 - u_k v_m off row i and column j, v_m on row i, -u_k on
column j and 1 at (i, j) (expand row i, then column j, and keep the
1/(x - x_i) 1/(y - y_j) term). Evaluating h at the four corners of
(u_i, v_j) in {0, 1}^2 gives the same number in exact arithmetic but
subtracts O(prod u_k v_m) quantities; it is kept as ``method="corners"``.

Index convention: P[i, j] pairs x_i with y_j. Under the weight
exp tr(X U^dag Y U) this is the Haar average of |U_ji|^2.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .clinalg import (
    DEFAULT_TARGET_DIGITS,
    KernelMatrix,
    LUFactors,
    Precision,
    condition_estimate,
    det,
    identity_like,
    resolve_precision,
    to_mp,
    workdps,
)
from .errors import IndexOutOfRange, SingularKernel, StochasticityViolation
from .resolvent import ResolventEvaluator
from .spectra import ProblemPair

ROW_SUM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class CorrelatorMatrix:
    """p[i, j] = <|U_ji|^2> under exp tr(X U^dag Y U); doubly stochastic."""

    p: np.ndarray
    condition: float = float("nan")
    dps: int | None = None

    @property
    def n(self) -> int:
        return self.p.shape[0]

    def row_sums(self) -> np.ndarray:
        return self.p.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.p.sum(axis=0)

    def sum_rule_deviation(self) -> float:
        return float(max(np.max(np.abs(self.row_sums() - 1)), np.max(np.abs(self.col_sums() - 1))))


def _check_index(n: int, i: int, j: int):
    if not (0 <= i < n and 0 <= j < n):
        raise IndexOutOfRange(f"index ({i}, {j}) outside 0..{n - 1}")


def _spectra(pair: ProblemPair, dps):
    x, y = pair.x.array(), pair.y.array()
    return (to_mp(x), to_mp(y)) if dps else (x, y)


def _off_weights(z, i):
    """1/(z_i - z_k) for k != i, with a zero placeholder at k = i."""
    out = z.copy()
    for k in range(len(z)):
        out[k] = 0 if k == i else 1 / (z[i] - z[k])
    return out


def _residue_weights(x, y, i, j):
    u = _off_weights(x, i)
    v = _off_weights(y, j)
    t = 1 - np.multiply.outer(u, v)
    t[i, :] = v
    t[:, j] = -u
    t[i, j] = 1
    return t


def _entry_coefficient(k: KernelMatrix, x, y, i, j) -> complex:
    t = _residue_weights(x, y, i, j)
    ratio = LUFactors(k.scaled_entries * t).logdet() / k.lu.logdet()
    return ratio.to_complex()


def _entry_corners(k: KernelMatrix, x, y, i, j) -> complex:
    u = _off_weights(x, i)
    v = _off_weights(y, j)
    s = k.scaled_entries
    h = {}
    for cu in (0, 1):
        for cv in (0, 1):
            uu, vv = u.copy(), v.copy()
            uu[i], vv[j] = cu, cv
            g = k.lu.solve_right(uu[:, None] * s * vv[None, :])
            h[cu, cv] = det(identity_like(g) - g)
    return complex(-(h[1, 1] - h[1, 0] - h[0, 1] + h[0, 0]))


def correlator_entry_affine(
    pair: ProblemPair,
    i: int,
    j: int,
    precision: Precision = "auto",
    method: str = "coefficient",
    kernel: KernelMatrix | None = None,
) -> complex:
    """<|U_ji|^2> by extracting the mixed affine coefficient of h at (x_i, y_j)."""
    n = pair.n
    _check_index(n, i, j)
    k = kernel if kernel is not None else resolve_precision(pair, precision)
    if k.lu.singular:
        raise SingularKernel("kernel LU hit an exactly-zero pivot: det E = 0")
    if n == 1:
        return 1.0 + 0j
    entry = {"coefficient": _entry_coefficient, "corners": _entry_corners}[method]
    with workdps(k.dps):
        x, y = _spectra(pair, k.dps)
        return entry(k, x, y, i, j)


def correlator_matrix(
    pair: ProblemPair,
    precision: Precision = "auto",
    row_sum_tol: float = ROW_SUM_TOL,
    target_digits: int = DEFAULT_TARGET_DIGITS,
    threads: int | None = None,
) -> CorrelatorMatrix:
    """All N^2 correlators from one kernel factorization; sum rules are enforced."""
    k = resolve_precision(pair, precision, target_digits)
    if k.lu.singular:
        raise SingularKernel("kernel LU hit an exactly-zero pivot: det E = 0")
    n = pair.n
    cells = [(i, j) for i in range(n) for j in range(n)]

    def fill(cell):
        return correlator_entry_affine(pair, *cell, kernel=k)

    if threads and threads > 1 and k.dps is None:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(fill, cells))
    else:
        values = [fill(c) for c in cells]
    cond = condition_estimate(k)
    out = CorrelatorMatrix(np.array(values, dtype=complex).reshape(n, n), cond, k.dps)
    dev = out.sum_rule_deviation()
    if not dev <= row_sum_tol:
        raise StochasticityViolation(dev, row_sum_tol, cond)
    return out


def _spread(z: np.ndarray) -> float:
    return float(np.max(np.abs(z[:, None] - z[None, :]))) if len(z) > 1 else 1.0


def contour_radius(z: np.ndarray, i: int, radius_fraction: float) -> float:
    if len(z) == 1:
        return radius_fraction
    return radius_fraction * float(np.min(np.abs(np.delete(z, i) - z[i])))


def correlator_entry_quadrature(
    pair: ProblemPair,
    i: int,
    j: int,
    radius_fraction: float = 0.25,
    nodes: int = 64,
    precision: Precision = "auto",
    target_digits: int = 9,
    evaluator: ResolventEvaluator | None = None,
    w_func: Callable[[complex, complex], complex] | None = None,
) -> complex:
    """(1/2 pi i)^2 contour integral of W around (x_i, y_j), trapezoidal in both angles.

    Circles of radius ``radius_fraction`` times the distance to the nearest
    other eigenvalue. ``w_func(x, y)`` replaces the determinant evaluation of
    W, e.g. to take residues of an oracle.
    """
    if not 0 < radius_fraction < 0.5:
        raise ValueError("radius_fraction must lie in (0, 0.5)")
    if nodes < 16:
        raise ValueError("need at least 16 nodes")
    _check_index(pair.n, i, j)
    x, y = pair.x.array(), pair.y.array()
    rx, ry = contour_radius(x, i, radius_fraction), contour_radius(y, j, radius_fraction)
    circle = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    dx, dy = rx * circle, ry * circle
    if w_func is not None:
        w = np.array([[w_func(x[i] + a, y[j] + b) for b in dy] for a in dx])
        return complex(dx @ w @ dy) / nodes**2
    if evaluator is None:
        evaluator = ResolventEvaluator(pair, precision, _quadrature_digits(pair, radius_fraction, target_digits))
    return evaluator.w_contour_sum(x[i] + dx, y[j] + dy, dx, dy) / nodes**2


def _quadrature_digits(pair: ProblemPair, radius_fraction: float, target_digits: int) -> int:
    """Target digits raised by the worst pole-distance amplification over all entries.

    Roundoff in W grows like 1/distance to the pole in each variable.
    """
    x, y = pair.x.array(), pair.y.array()
    rx = min(contour_radius(x, i, radius_fraction) for i in range(pair.n))
    ry = min(contour_radius(y, j, radius_fraction) for j in range(pair.n))
    amplification = (_spread(x) / rx) * (_spread(y) / ry)
    return target_digits + max(0, math.ceil(math.log10(amplification)))


def correlator_matrix_quadrature(
    pair: ProblemPair,
    radius_fraction: float = 0.25,
    nodes: int = 64,
    precision: Precision = "auto",
    target_digits: int = 9,
) -> np.ndarray:
    """Every entry by contour quadrature, sharing one evaluator (and its per-y work)."""
    ev = ResolventEvaluator(pair, precision, _quadrature_digits(pair, radius_fraction, target_digits))
    n = pair.n
    out = np.empty((n, n), dtype=complex)
    for j in range(n):
        for i in range(n):
            out[i, j] = correlator_entry_quadrature(pair, i, j, radius_fraction, nodes, evaluator=ev)
    return out
