import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from izcorr.errors import DegenerateVariables, DivergentSeries, InvalidDegree
from izcorr.schur import (
    HookSchurInput,
    complete_homogeneous,
    generating_tail_bound,
    schur_generating_partial,
    schur_hook_det,
    schur_hook_sum,
)


def brute_h(z, k):
    """h_k by enumerating multisets of indices."""
    return sum(np.prod([z[i] for i in c]) for c in itertools.combinations_with_replacement(range(len(z)), k)) if k else 1.0


def random_variables(rng, m, min_gap=0.1):
    while True:
        r, t = np.sqrt(rng.uniform(0, 1, m)), rng.uniform(0, 2 * np.pi, m)
        z = r * np.exp(1j * t)
        if m == 1 or np.min(np.abs(z[:, None] - z[None, :]) + 2 * np.eye(m)) > min_gap:
            return z


def test_det_examples():
    assert schur_hook_det(HookSchurInput((2,), 3)) == 8
    assert schur_hook_det(HookSchurInput((1, 2), 5)) == pytest.approx(31, rel=1e-13)
    assert schur_hook_det(HookSchurInput((0.3, 1j, -2), 2)) == pytest.approx(1, rel=1e-13)


def test_sum_examples():
    assert schur_hook_sum((1, 1), 5) == 5
    assert schur_hook_sum((3,), 4) == 81
    assert schur_hook_sum((0.3, 1j, -2), 2) == 1


def test_errors():
    with pytest.raises(InvalidDegree):
        schur_hook_det(HookSchurInput((1, 2, 3), 1))
    with pytest.raises(InvalidDegree):
        schur_hook_sum((1, 2, 3), 1)
    with pytest.raises(InvalidDegree):
        HookSchurInput((1,), -1)
    with pytest.raises(DegenerateVariables):
        schur_hook_det(HookSchurInput((1, 1 + 1e-12), 4))
    with pytest.raises(DivergentSeries):
        schur_generating_partial((1, 2), 2, 10)


def test_recurrence_matches_enumeration(rng):
    z = random_variables(rng, 4)
    h = complete_homogeneous(z, 6)
    for k in range(7):
        assert h[k] == pytest.approx(brute_h(z, k), rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(0, 12))
def test_det_equals_sum(seed, m, r):
    z = random_variables(np.random.default_rng(seed), m)
    if r < m - 1:
        return
    a = schur_hook_det(HookSchurInput(tuple(z), r))
    b = schur_hook_sum(z, r)
    assert abs(a - b) <= 1e-10 * (1 + abs(b))


@given(st.integers(0, 2**32 - 1), st.permutations(range(5)))
def test_sum_symmetric(seed, perm):
    z = random_variables(np.random.default_rng(seed), 5)
    assert schur_hook_sum(z[list(perm)], 9) == pytest.approx(schur_hook_sum(z, 9), rel=1e-14, abs=1e-14)


def test_generating_examples():
    partial, product = schur_generating_partial((0,), 3.0, 0)
    assert partial == product == pytest.approx(1 / 3)
    partial, product = schur_generating_partial((0.5,), 1.0, 40)
    assert product == pytest.approx(2)
    assert abs(partial - product) <= generating_tail_bound((0.5,), 1.0, 40) * (1 + 1e-12)
    assert generating_tail_bound((0.5,), 1.0, 40) == pytest.approx(0.5**41 / 0.5)
    partial, product = schur_generating_partial((1, 2), 4, 60)
    assert abs(partial - product) <= generating_tail_bound((1, 2), 4, 60) + 1e-17
    # the heuristic form (n+1) rho^(R-n+1) / ((1-rho)|x|) underestimates this tail
    assert generating_tail_bound((1, 2), 4, 60) > 2 * 0.5**60 / (0.5 * 4)


def test_generating_below_n_is_zero():
    partial, _ = schur_generating_partial((1, 2, 3), 10, 1)
    assert partial == 0


@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_tail_bound_is_rigorous(seed, m):
    z = random_variables(np.random.default_rng(seed), m) * 0.5
    x = 1.0 * np.exp(2j * np.pi * np.random.default_rng(seed).uniform())
    for r_max in (5, 15, 30):
        partial, product = schur_generating_partial(z, x, r_max)
        roundoff = 1e-15 * max(1.0, abs(product))
        assert abs(partial - product) <= generating_tail_bound(z, x, r_max) * (1 + 1e-9) + roundoff


def test_gap_decays_geometrically():
    z = np.array([0.5, -0.3j, 0.2 + 0.1j])
    x = 1.1
    rho = np.max(np.abs(z)) / abs(x)
    g = [abs(np.subtract(*schur_generating_partial(z, x, r))) for r in (20, 30)]
    assert g[1] / g[0] <= 1.5 * rho**10


def test_tail_bound_diverges_outside_disk():
    assert generating_tail_bound((1, 2), 2, 10) == math.inf
