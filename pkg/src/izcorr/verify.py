"""Randomized property battery: oracle agreement, sum rules, symmetries.

Every check draws its pairs from one seeded generator, so a report is
reproducible from (n, trials, seed).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .clinalg import Precision
from .correlators import correlator_matrix
from .oracles import PERMUTATION_MAX_N, SUBSET_SUM_MAX_N, morozov_subset_sum, permutation_product_form
from .resolvent import ResolventEvaluator, ResolventPoint, pole_sum
from .spectra import ProblemPair, make_pair

MIN_GAP = 0.1
POINT_MARGIN = 0.05
ASYMPTOTIC_RADIUS = 1e8


@dataclass(frozen=True)
class VerifyConfig:
    n: int = 3
    trials: int = 25
    seed: int = 42
    tol: float = 1e-9
    points_per_pair: int = 4
    asymptotic_tol: float = 1e-6
    precision: Precision = "auto"


@dataclass
class CheckResult:
    name: str
    tol: float
    max_error: float = 0.0
    count: int = 0

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol

    def record(self, error: float):
        self.count += 1
        if not error <= self.max_error:  # NaN propagates as a failure
            self.max_error = error if not math.isnan(error) else math.inf

    def to_dict(self) -> dict:
        return {"name": self.name, "tol": self.tol, "max_error": self.max_error, "count": self.count, "passed": self.passed}


@dataclass
class VerificationReport:
    config: VerifyConfig
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"config": asdict(self.config), "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def random_spectrum(rng: np.random.Generator, n: int, min_gap: float = MIN_GAP) -> np.ndarray:
    """n points uniform in the unit square of the complex plane, pairwise gaps above min_gap."""
    while True:
        z = rng.uniform(0, 1, n) + 1j * rng.uniform(0, 1, n)
        if n == 1 or np.min(np.abs(z[:, None] - z[None, :]) + 2 * np.eye(n)) > min_gap:
            return z


def random_real_spectrum(rng: np.random.Generator, n: int, min_gap: float = MIN_GAP) -> np.ndarray:
    while True:
        z = np.sort(rng.uniform(0, 1, n))
        if n == 1 or np.min(np.diff(z)) > min_gap:
            return z.astype(complex)


def random_pair(rng: np.random.Generator, n: int) -> ProblemPair:
    return make_pair(random_spectrum(rng, n), random_spectrum(rng, n))


def random_point(rng: np.random.Generator, pair: ProblemPair, margin: float = POINT_MARGIN) -> ResolventPoint:
    """Uniform in [-0.5, 1.5]^2 per variable, at least ``margin`` away from every pole."""

    def draw(poles):
        while True:
            z = complex(*rng.uniform(-0.5, 1.5, 2))
            if np.min(np.abs(z - poles)) > margin:
                return z

    return ResolventPoint(draw(pair.x.array()), draw(pair.y.array()))


def rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def run_verification(config: VerifyConfig) -> VerificationReport:
    n, tol = config.n, config.tol
    rng = np.random.default_rng(config.seed)
    checks = {
        name: CheckResult(name, tol)
        for name in (
            "oracle_triangle",
            "identity_vs_ratio",
            "sum_rules",
            "exchange_symmetry",
            "transpose_symmetry",
            "pole_reconstruction",
        )
    }
    checks["asymptotics"] = CheckResult("asymptotics", config.asymptotic_tol)
    for _ in range(config.trials):
        pair = random_pair(rng, n)
        ev = ResolventEvaluator(pair, config.precision)
        ev_swap = ResolventEvaluator(pair.swapped(), config.precision)
        p = correlator_matrix(pair, config.precision, row_sum_tol=math.inf)
        p_swap = correlator_matrix(pair.swapped(), config.precision, row_sum_tol=math.inf)
        checks["sum_rules"].record(p.sum_rule_deviation())
        checks["transpose_symmetry"].record(float(np.max(np.abs(p.p - p_swap.p.T))))
        for _ in range(config.points_per_pair):
            pt = random_point(rng, pair)
            w = ev.w(pt.x, pt.y)
            values = [w]
            if n <= SUBSET_SUM_MAX_N:
                values.append(morozov_subset_sum(pair, pt))
            if n <= PERMUTATION_MAX_N:
                values.append(permutation_product_form(pair, pt))
            for a, b in itertools.combinations(values, 2):
                checks["oracle_triangle"].record(rel(a, b))
            checks["identity_vs_ratio"].record(rel(w, ev.w_ratio(pt.x, pt.y)))
            checks["exchange_symmetry"].record(rel(w, ev_swap.w(pt.y, pt.x)))
            checks["pole_reconstruction"].record(rel(w, pole_sum(pair, p.p, pt)))
            x = ASYMPTOTIC_RADIUS * complex(np.exp(2j * np.pi * rng.uniform()))
            expected = complex(np.sum(1 / (pt.y - pair.y.array())))
            checks["asymptotics"].record(rel(x * ev.w(x, pt.y), expected))
    return VerificationReport(config, list(checks.values()))
