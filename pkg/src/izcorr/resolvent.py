"""Two-point resolvent correlator W(x, y) = < tr((x-X)^{-1} U (y-Y)^{-1} U^dag) >.

With D_x = diag(1/(x - x_i)) and D_y = diag(1/(y - y_j)),

    W = 1 - det(1 - D_x E D_y E^{-1})          (identity-minus form)
      = 1 - det(E - D_x E D_y) / det E          (ratio form)

Both are rational in (x, y) with poles only on the spectra, so any off-pole
point is accepted. Row scaling of E is a similarity of D_x E D_y E^{-1}
(diagonal matrices commute), so both forms are evaluated on the scaled
kernel directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import mpmath as mp
import numpy as np

from .clinalg import (
    DEFAULT_TARGET_DIGITS,
    MAX_DPS,
    KernelMatrix,
    LUFactors,
    Precision,
    as_complex,
    build_kernel,
    condition_estimate,
    det,
    double_is_enough,
    identity_like,
    resolve_precision,
    to_mp,
    workdps,
)
from .errors import DimensionMismatch, PoleProximity, SingularKernel
from .spectra import ProblemPair

POLE_TOL = 1e-8
# multiprecision grids expand det(1 - D_x K) over the 2^n principal minors up to this size
SUBSET_EXPANSION_MAX_N = 8


def _subset_products(c: np.ndarray) -> np.ndarray:
    """out[:, mask] = prod of c[:, k] over the bits k set in mask."""
    rows, n = c.shape
    out = np.empty((rows, 1 << n), dtype=object)
    out[:, 0] = mp.mpc(1)
    for mask in range(1, 1 << n):
        k = (mask & -mask).bit_length() - 1
        out[:, mask] = out[:, mask ^ (1 << k)] * c[:, k]
    return out


def _principal_minors(k: np.ndarray) -> np.ndarray:
    n = k.shape[0]
    out = np.empty(1 << n, dtype=object)
    out[0] = mp.mpc(1)
    for mask in range(1, 1 << n):
        idx = [b for b in range(n) if mask >> b & 1]
        out[mask] = det(k[np.ix_(idx, idx)])
    return out


@dataclass(frozen=True)
class ResolventPoint:
    """Spectator variables (x, y) at which W is evaluated."""

    x: complex
    y: complex

    def __post_init__(self):
        object.__setattr__(self, "x", complex(self.x))
        object.__setattr__(self, "y", complex(self.y))


def pole_distance(pair: ProblemPair, pt: ResolventPoint) -> tuple[float, float]:
    return (
        float(np.min(np.abs(pt.x - pair.x.array()))),
        float(np.min(np.abs(pt.y - pair.y.array()))),
    )


def check_point(pair: ProblemPair, pt: ResolventPoint, pole_tol: float = POLE_TOL) -> None:
    dx, dy = pole_distance(pair, pt)
    if dx <= pole_tol or dy <= pole_tol:
        raise PoleProximity(
            f"point ({pt.x}, {pt.y}) lies within {min(dx, dy):.3g} of a pole (pole_tol={pole_tol:.3g})"
        )


class ResolventEvaluator:
    """Pair plus kernel factorization, reusable across evaluation points.

    The working precision is fixed at construction (see
    :func:`izcorr.clinalg.resolve_precision`); the object is read-only
    afterwards.
    """

    def __init__(
        self,
        pair: ProblemPair,
        precision: Precision = "auto",
        target_digits: int = DEFAULT_TARGET_DIGITS,
        pole_tol: float = POLE_TOL,
        kernel: KernelMatrix | None = None,
    ):
        self.pair = pair
        self.pole_tol = pole_tol
        self.precision = precision if kernel is None else (kernel.dps or "double")
        self.target_digits = target_digits
        self._escalated: dict[int, ResolventEvaluator] = {}
        self._minor_cache: dict[complex, tuple[int, np.ndarray]] = {}
        self.kernel = kernel if kernel is not None else resolve_precision(pair, precision, target_digits)
        if self.kernel.lu.singular:
            raise SingularKernel("kernel LU hit an exactly-zero pivot: det E = 0")
        self.dps = self.kernel.dps
        with workdps(self.dps):
            if self.dps is None:
                self._x, self._y = pair.x.array(), pair.y.array()
            else:
                self._x, self._y = to_mp(pair.x.array()), to_mp(pair.y.array())
            self._scaled_logdet = self.kernel.lu.logdet()

    @property
    def n(self) -> int:
        return self.pair.n

    @cached_property
    def condition(self) -> float:
        return condition_estimate(self.kernel)

    def _scalar(self, z: complex):
        return mp.mpc(complex(z)) if self.dps else complex(z)

    def _sandwich(self, x: complex, y: complex) -> np.ndarray:
        a = 1 / (self._scalar(x) - self._x)
        b = 1 / (self._scalar(y) - self._y)
        return a[:, None] * self.kernel.scaled_entries * b[None, :]

    def _for_point(self, x: complex, y: complex, w_abs: float | None = None) -> ResolventEvaluator:
        """Evaluator with enough digits for W at (x, y).

        Kernel roundoff of relative size eps * cond reaches W through a
        determinant that is multi-affine in every 1/(x - x_k) and 1/(y - y_k),
        so its absolute effect is bounded by eps * cond * prod(1 + |a_k|)
        prod(1 + |b_k|). Relative to |W| (estimated by max|a| max|b| before W
        is known) that sets the digits needed; far from the spectra, near
        poles and near zeros of W it exceeds what the kernel alone needs.
        """
        if self.precision != "auto":
            return self
        a = 1 / np.abs(x - self.pair.x.array())
        b = 1 / np.abs(y - self.pair.y.array())
        w_abs = float(np.max(a) * np.max(b)) if w_abs is None else w_abs
        # det(1 - D_x K) is multi-affine in the 1/(x - x_k): terms up to prod(1 + |.|)
        growth = float(np.prod(1 + a) * np.prod(1 + b))
        amplification = self.condition * growth / max(w_abs, 1e-300)
        if self.dps is None and double_is_enough(amplification, self.target_digits):
            return self
        dps = self.target_digits + math.ceil(math.log10(max(amplification, 1.0))) + 8
        if self.dps is not None and self.dps >= dps:
            return self
        dps = min(10 * math.ceil(dps / 10), MAX_DPS)
        if dps not in self._escalated:
            kernel = build_kernel(self.pair, dps=dps)
            self._escalated[dps] = ResolventEvaluator(self.pair, dps, self.target_digits, self.pole_tol, kernel)
        return self._escalated[dps]

    def _adaptive(self, x: complex, y: complex, form: str) -> complex:
        ev = self._for_point(x, y)
        for _ in range(4):
            value = getattr(ev, form)(x, y)
            nxt = self._for_point(x, y, abs(value))
            if nxt is ev or (nxt.dps or 0) <= (ev.dps or 0):
                return value
            ev = nxt
        return value

    def _w_identity(self, x: complex, y: complex) -> complex:
        with workdps(self.dps):
            g = self.kernel.lu.solve_right(self._sandwich(x, y))
            return complex(1 - det(identity_like(g) - g))

    def _w_ratio(self, x: complex, y: complex) -> complex:
        with workdps(self.dps):
            m = self.kernel.scaled_entries - self._sandwich(x, y)
            ratio = LUFactors(m).logdet() / self._scaled_logdet
        return 1.0 - ratio.to_complex()

    def w(self, x: complex, y: complex) -> complex:
        """Identity-minus form through one right-solve with the kernel."""
        check_point(self.pair, ResolventPoint(x, y), self.pole_tol)
        return self._adaptive(x, y, "_w_identity")

    def w_ratio(self, x: complex, y: complex) -> complex:
        """Ratio of two determinants; no solve."""
        check_point(self.pair, ResolventPoint(x, y), self.pole_tol)
        return self._adaptive(x, y, "_w_ratio")

    def __call__(self, pt: ResolventPoint) -> complex:
        return self.w(pt.x, pt.y)

    def w_grid(self, xs, ys) -> np.ndarray:
        """W on the tensor grid xs x ys, shape (len(xs), len(ys)).

        Factors K_y = S D_y S^{-1} once per y so each grid point costs only
        one determinant.
        """
        xs, ys = self._check_grid(xs, ys)
        n, s = self.n, self.kernel.scaled_entries
        if self.dps is None:
            b = 1.0 / (ys[:, None] - self._y[None, :])  # (T, n)
            f = s[None, :, :] * b[:, None, :]  # (T, n, n)
            rhs = np.concatenate(list(np.transpose(f, (0, 2, 1))), axis=1)  # (n, T*n)
            gt = self.kernel.lu.solve(rhs, trans=True)
            k = np.transpose(gt.reshape(n, len(ys), n), (1, 2, 0))  # (T, n, n)
            a = 1.0 / (xs[:, None] - self._x[None, :])  # (S, n)
            m = np.eye(n)[None, None] - a[:, None, :, None] * k[None, :, :, :]
            return 1.0 - np.linalg.det(m)
        out = np.empty((len(xs), len(ys)), dtype=complex)
        if n > SUBSET_EXPANSION_MAX_N:
            with workdps(self.dps):
                for t, y in enumerate(ys):
                    b = 1 / (mp.mpc(complex(y)) - self._y)
                    k = self.kernel.lu.solve_right(s * b[None, :])
                    eye = identity_like(k)
                    for r, x in enumerate(xs):
                        a = 1 / (mp.mpc(complex(x)) - self._x)
                        out[r, t] = complex(1 - det(eye - a[:, None] * k))
            return out
        # det(1 - D_a K) = sum_S prod_{k in S} (-a_k) * minor_S(K): the 2^n
        # principal minors are computed once per y, then every x is one dot.
        dps = self.dps + self._subset_guard(xs)
        with workdps(dps):
            coeff = _subset_products(-1 / (to_mp(xs)[:, None] - self._x[None, :]))
            for t, y in enumerate(ys):
                out[:, t] = as_complex(1 - coeff @ self._minors_at(complex(y), dps))
        return out

    def w_contour_sum(self, xs, ys, wx, wy) -> complex:
        """sum_{r,t} wx[r] W(xs[r], ys[t]) wy[t], e.g. a tensor trapezoidal rule.

        On the multiprecision path the grid W = 1 - A M (A: subset products
        of the x nodes, M: principal minors at the y nodes) has rank 2^n, so
        the sum is reassociated as sum(wx) sum(wy) - (wx A)(M wy) instead of
        filling all len(xs) * len(ys) values.
        """
        xs, ys = self._check_grid(xs, ys)
        wx, wy = np.asarray(wx, dtype=complex), np.asarray(wy, dtype=complex)
        if self.dps is None or self.n > SUBSET_EXPANSION_MAX_N:
            return complex(wx @ self.w_grid(xs, ys) @ wy)
        dps = self.dps + self._subset_guard(xs)
        with workdps(dps):
            coeff = _subset_products(-1 / (to_mp(xs)[:, None] - self._x[None, :]))
            minors = np.stack([self._minors_at(complex(y), dps) for y in ys], axis=1)
            wxm, wym = to_mp(wx), to_mp(wy)
            total = np.sum(wxm) * np.sum(wym) - (wxm @ coeff) @ (minors @ wym)
            return complex(total)

    def _check_grid(self, xs, ys):
        xs = np.asarray(xs, dtype=complex)
        ys = np.asarray(ys, dtype=complex)
        dx = np.min(np.abs(xs[:, None] - self.pair.x.array()[None, :]))
        dy = np.min(np.abs(ys[:, None] - self.pair.y.array()[None, :]))
        if min(dx, dy) <= self.pole_tol:
            raise PoleProximity(f"grid comes within {min(dx, dy):.3g} of a pole")
        return xs, ys

    def _subset_guard(self, xs: np.ndarray) -> int:
        """Extra digits for the cancellation between subset terms: log10 prod(1 + max|a_k|)."""
        amax = 1.0 / np.min(np.abs(xs[:, None] - self.pair.x.array()[None, :]), axis=0)
        return 4 + math.ceil(float(np.sum(np.log10(1.0 + amax))))

    def _minors_at(self, y: complex, dps: int) -> np.ndarray:
        """Principal minors of K_y = S D_y S^{-1}, cached per y at the highest dps seen."""
        hit = self._minor_cache.get(y)
        if hit is not None and hit[0] >= dps:
            return hit[1]
        with workdps(dps):
            b = 1 / (mp.mpc(y) - self._y)
            k = self.kernel.lu.solve_right(self.kernel.scaled_entries * b[None, :])
            minors = _principal_minors(k)
        self._minor_cache[y] = (dps, minors)
        return minors


def resolvent_w(
    pair: ProblemPair,
    pt: ResolventPoint,
    precision: Precision = "auto",
    pole_tol: float = POLE_TOL,
) -> complex:
    """W(x, y) = 1 - det(1 - D_x E D_y E^{-1})."""
    check_point(pair, pt, pole_tol)
    return ResolventEvaluator(pair, precision, pole_tol=pole_tol).w(pt.x, pt.y)


def resolvent_w_ratio_form(
    pair: ProblemPair,
    pt: ResolventPoint,
    precision: Precision = "auto",
    pole_tol: float = POLE_TOL,
) -> complex:
    """W(x, y) = 1 - det(E - D_x E D_y) / det E."""
    check_point(pair, pt, pole_tol)
    return ResolventEvaluator(pair, precision, pole_tol=pole_tol).w_ratio(pt.x, pt.y)


def pole_sum(pair: ProblemPair, p: np.ndarray, pt: ResolventPoint) -> complex:
    """sum_ij p[i, j] / ((x - x_i)(y - y_j))."""
    a = 1.0 / (pt.x - pair.x.array())
    b = 1.0 / (pt.y - pair.y.array())
    return complex(a @ np.asarray(p, dtype=complex) @ b)


def pole_expansion_check(
    pair: ProblemPair,
    p,
    pt: ResolventPoint,
    precision: Precision = "auto",
    evaluator: ResolventEvaluator | None = None,
) -> float:
    """Relative gap between W(pt) and its reconstruction from the correlators."""
    p = as_complex(getattr(p, "p", p))
    if p.shape != (pair.n, pair.n):
        raise DimensionMismatch(f"correlator matrix has shape {p.shape}, pair has N={pair.n}")
    ev = evaluator if evaluator is not None else ResolventEvaluator(pair, precision)
    w = ev.w(pt.x, pt.y)
    return abs(w - pole_sum(pair, p, pt)) / (abs(w) + 1e-300)
