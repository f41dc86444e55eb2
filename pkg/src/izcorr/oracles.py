"""Independent ground truth: the original subset/permutation sum, its
partially resummed permutation-product form, and Monte Carlo over Haar
unitaries.

The exact oracles run entirely in mpmath and share no code with the
determinant route: det E is rebuilt as a Leibniz sum over permutations in
the same loop as the numerator, and the two are divided at the end.
Leibniz sums of a nearly singular kernel cancel heavily, so the working
precision is raised until the measured cancellation leaves enough digits.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import mpmath as mp
import numpy as np

from .errors import DegenerateDenominator, DimensionTooLarge, IndexOutOfRange, VarianceOverflow
from .resolvent import ResolventPoint, check_point
from .spectra import ProblemPair

SUBSET_SUM_MAX_N = 6
PERMUTATION_MAX_N = 7
ORACLE_DPS = 40
ORACLE_GUARD_DIGITS = 20
MC_MIN_SAMPLES = 1000
MC_MAX_EXPONENT = 20.0
MC_BLOCKS = 100

RngStream = Union[int, np.random.SeedSequence, None]


# ---------------------------------------------------------------- exact sums


def _signed_permutations(n: int):
    for perm in itertools.permutations(range(n)):
        sign, seen = 1, [False] * n
        for start in range(n):
            if seen[start]:
                continue
            k, length = start, 0
            while not seen[k]:
                seen[k] = True
                k = perm[k]
                length += 1
            if length % 2 == 0:
                sign = -sign
        yield perm, sign


def _mp_vector(values) -> list:
    return [mp.mpc(complex(v)) for v in values]


def _kernel_exp(x, y) -> list[list]:
    return [[mp.exp(xi * yj) for yj in y] for xi in x]


def _bordered_ratio(z: list, w: list) -> mp.mpc:
    """Vandermonde of z with its top power row replaced by w, over the plain one."""
    m = len(z)
    den = mp.matrix(m, m)
    for r in range(m):
        for c in range(m):
            den[r, c] = z[c] ** r
    num = den.copy()
    for c in range(m):
        num[m - 1, c] = w[c]
    return mp.det(num) / mp.det(den)


def _subset_factors(z: list, a: list, mode: str) -> list:
    """Per-subset factor, indexed by bitmask: prod 1/(t - z_k) or the bordered ratio."""
    n = len(z)
    out = [mp.mpc(0)] * (1 << n)
    for mask in range(1, 1 << n):
        idx = [k for k in range(n) if mask >> k & 1]
        if mode == "product":
            out[mask] = mp.fprod(a[k] for k in idx)
        else:
            out[mask] = _bordered_ratio([z[k] for k in idx], [a[k] for k in idx])
    return out


def _with_cancellation_control(evaluate: Callable[[], tuple], dps: int):
    """Run ``evaluate`` (returning value, digits lost) until the digits left suffice."""
    while True:
        with mp.workdps(dps):
            value, lost = evaluate()
        if dps - lost >= ORACLE_GUARD_DIGITS:
            return complex(value)
        dps = max(2 * dps, int(lost) + 2 * ORACLE_GUARD_DIGITS)


def _digits_lost(scale, value) -> float:
    if value == 0:
        return math.inf
    return max(0.0, float(mp.log10(scale / abs(value))))


def morozov_subset_sum(
    pair: ProblemPair,
    pt: ResolventPoint,
    mode: str = "product",
    dps: int = ORACLE_DPS,
) -> complex:
    """W(x, y) from the signed sum over permutations, orders and index subsets.

    ``mode="product"`` uses the generating-function closed forms
    prod 1/(x - x_k) and prod 1/(y - y_k) for the two bordered ratios;
    ``mode="bordered"`` evaluates both bordered Vandermonde determinants
    literally with a_k = 1/(x - x_k) and b_k = 1/(y - y_k) in the last row.
    """
    n = pair.n
    if n > SUBSET_SUM_MAX_N:
        raise DimensionTooLarge(f"subset-sum oracle is limited to N <= {SUBSET_SUM_MAX_N}, got {n}")
    if mode not in ("product", "bordered"):
        raise ValueError(f"unknown mode {mode!r}")
    check_point(pair, pt)
    perms = list(_signed_permutations(n))
    masks = range(1, 1 << n)
    parity = [(-1) ** (bin(m).count("1") - 1) for m in range(1 << n)]

    def evaluate():
        x, y = _mp_vector(pair.x.values), _mp_vector(pair.y.values)
        a = [1 / (mp.mpc(pt.x) - xi) for xi in x]
        b = [1 / (mp.mpc(pt.y) - yj) for yj in y]
        fx = _subset_factors(x, a, mode)
        fy = _subset_factors(y, b, mode)
        e = _kernel_exp(x, y)
        num = den = mp.mpc(0)
        scale = mp.mpf(0)
        for perm, sign in perms:
            weight = sign * mp.fprod(e[k][perm[k]] for k in range(n))
            inner = mp.mpc(0)
            for mask in masks:
                image = sum(1 << perm[k] for k in range(n) if mask >> k & 1)
                inner += parity[mask] * fx[mask] * fy[image]
            num += weight * inner
            den += weight
            scale += abs(weight) * (1 + abs(inner))
        lost = max(_digits_lost(scale, num), _digits_lost(scale, den))
        return num / den, lost

    return _with_cancellation_control(evaluate, dps)


def permutation_product_form(pair: ProblemPair, pt: ResolventPoint, dps: int = ORACLE_DPS) -> complex:
    """W from sum_rho sign(rho) prod_i e^{x_i y_rho(i)} [1 - prod_i (1 - u_i v_rho(i))] over det E."""
    n = pair.n
    if n > PERMUTATION_MAX_N:
        raise DimensionTooLarge(f"permutation oracle is limited to N <= {PERMUTATION_MAX_N}, got {n}")
    check_point(pair, pt)
    perms = list(_signed_permutations(n))

    def evaluate():
        x, y = _mp_vector(pair.x.values), _mp_vector(pair.y.values)
        u = [1 / (mp.mpc(pt.x) - xi) for xi in x]
        v = [1 / (mp.mpc(pt.y) - yj) for yj in y]
        e = _kernel_exp(x, y)
        num = den = mp.mpc(0)
        scale = mp.mpf(0)
        for perm, sign in perms:
            weight = sign * mp.fprod(e[k][perm[k]] for k in range(n))
            bracket = 1 - mp.fprod(1 - u[k] * v[perm[k]] for k in range(n))
            num += weight * bracket
            den += weight
            scale += abs(weight) * (1 + abs(bracket))
        lost = max(_digits_lost(scale, num), _digits_lost(scale, den))
        return num / den, lost

    return _with_cancellation_control(evaluate, dps)


# --------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class HaarSample:
    u: np.ndarray

    def unitarity_defect(self) -> float:
        n = self.u.shape[0]
        return float(np.max(np.abs(self.u @ self.u.conj().T - np.eye(n))))


@dataclass(frozen=True)
class MCEstimate:
    """Jackknife-debiased mean and standard error over equal sample blocks."""

    mean: complex
    std_error: float
    samples: int
    blocks: int = MC_BLOCKS

    def __post_init__(self):
        if not self.std_error >= 0:
            raise ValueError("std_error must be non-negative")
        if self.samples < 2:
            raise ValueError("an estimate needs at least two samples")

    def z_score(self, reference: complex) -> float:
        gap = abs(self.mean - complex(reference))
        if self.std_error == 0:
            return 0.0 if gap == 0 else math.inf
        return gap / self.std_error


def haar_unitaries(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """(count, n, n) Haar unitaries: QR of complex Ginibre with the phase of diag R removed."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    z = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


def sample_haar_unitary(n: int, rng: np.random.Generator) -> HaarSample:
    return HaarSample(haar_unitaries(n, 1, rng)[0])


def block_generators(rng_stream: RngStream, blocks: int) -> list[np.random.Generator]:
    """Stream k of a run is child k of the master SeedSequence, driving PCG64."""
    seq = rng_stream if isinstance(rng_stream, np.random.SeedSequence) else np.random.SeedSequence(rng_stream)
    return [np.random.Generator(np.random.PCG64(child)) for child in seq.spawn(blocks)]


def _check_mc_input(pair: ProblemPair, samples: int, blocks: int):
    if samples < MC_MIN_SAMPLES:
        raise ValueError(f"need at least {MC_MIN_SAMPLES} samples, got {samples}")
    if not 2 <= blocks <= samples:
        raise ValueError("blocks must lie between 2 and the sample count")
    exponent = np.max(np.abs(np.outer(pair.x.array(), pair.y.array()).real))
    if exponent > MC_MAX_EXPONENT:
        raise ValueError(f"max |Re(x_i y_j)| = {exponent:.3g} exceeds {MC_MAX_EXPONENT}; variance is uncontrolled")


def _block_sums(pair: ProblemPair, samples: int, rng_stream: RngStream, blocks: int, threads: int | None):
    """Per block: (count, sum w, sum w * A) with A[i, j] = |U_ji|^2."""
    x, y = pair.x.array(), pair.y.array()
    n = pair.n
    sizes = [samples // blocks + (1 if b < samples % blocks else 0) for b in range(blocks)]
    gens = block_generators(rng_stream, blocks)

    def run(b):
        u = haar_unitaries(n, sizes[b], gens[b])
        a = np.abs(np.swapaxes(u, 1, 2)) ** 2
        w = np.exp(np.einsum("i,sij,j->s", x, a, y))
        return sizes[b], w.sum(), np.einsum("s,sij->ij", w, a)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(blocks)))
    else:
        parts = [run(b) for b in range(blocks)]
    counts = np.array([p[0] for p in parts], dtype=float)
    sw = np.array([p[1] for p in parts])
    swa = np.stack([p[2] for p in parts])
    if not (np.all(np.isfinite(sw)) and np.all(np.isfinite(swa))):
        raise VarianceOverflow("weights overflowed; the estimator variance is not finite")
    return counts, sw, swa


def _jackknife(estimates_loo: np.ndarray, full: np.ndarray):
    """Debiased estimate and standard error from leave-one-block-out estimates (axis 0)."""
    b = estimates_loo.shape[0]
    with np.errstate(invalid="ignore", over="ignore"):
        centre = estimates_loo.mean(axis=0)
        debiased = b * full - (b - 1) * centre
        spread = np.sum(np.abs(estimates_loo - centre) ** 2, axis=0)
        se = np.sqrt((b - 1) / b * spread)
    if not np.all(np.isfinite(se)):
        raise VarianceOverflow("jackknife variance is not finite")
    return debiased, se


def _loo_means(counts, sums):
    total_c, total_s = counts.sum(), sums.sum(axis=0)
    shape = (-1,) + (1,) * (sums.ndim - 1)
    return (total_s - sums) / (total_c - counts).reshape(shape), total_s / total_c


def mc_hciz(
    pair: ProblemPair,
    samples: int,
    rng_stream: RngStream = 0,
    blocks: int = MC_BLOCKS,
    threads: int | None = None,
) -> MCEstimate:
    """Mean of exp tr(X U^dag Y U) over Haar unitaries (probability normalization)."""
    _check_mc_input(pair, samples, blocks)
    counts, sw, _ = _block_sums(pair, samples, rng_stream, blocks, threads)
    loo, full = _loo_means(counts, sw)
    mean, se = _jackknife(loo, full)
    return MCEstimate(complex(mean), float(se), samples, blocks)


def mc_correlator_matrix(
    pair: ProblemPair,
    samples: int,
    rng_stream: RngStream = 0,
    blocks: int = MC_BLOCKS,
    threads: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Ratio estimates of <|U_ji|^2> for every (i, j): (means, standard errors)."""
    _check_mc_input(pair, samples, blocks)
    counts, sw, swa = _block_sums(pair, samples, rng_stream, blocks, threads)
    w_loo, w_full = _loo_means(counts, sw)
    _, w_se = _jackknife(w_loo, w_full)
    if abs(w_full) <= 2 * w_se:
        raise DegenerateDenominator(f"|mean weight| = {abs(w_full):.3g} is within 2 standard errors of zero")
    wa_loo, wa_full = _loo_means(counts, swa)
    ratio_loo = wa_loo / w_loo[:, None, None]
    mean, se = _jackknife(ratio_loo, wa_full / w_full)
    if pair.n == 1:
        return np.ones((1, 1), dtype=complex), np.zeros((1, 1))
    return mean.astype(complex), se.astype(float)


def mc_correlator(
    pair: ProblemPair,
    i: int,
    j: int,
    samples: int,
    rng_stream: RngStream = 0,
    blocks: int = MC_BLOCKS,
    threads: int | None = None,
) -> MCEstimate:
    """Ratio estimate of <|U_ji|^2>, the entry P[i, j] of the correlator matrix."""
    if not (0 <= i < pair.n and 0 <= j < pair.n):
        raise IndexOutOfRange(f"index ({i}, {j}) outside 0..{pair.n - 1}")
    mean, se = mc_correlator_matrix(pair, samples, rng_stream, blocks, threads)
    return MCEstimate(complex(mean[i, j]), float(se[i, j]), samples, blocks)
