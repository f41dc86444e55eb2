import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings

from izcorr.correlators import (
    correlator_entry_affine,
    correlator_entry_quadrature,
    correlator_matrix,
)
from izcorr.errors import IndexOutOfRange, StochasticityViolation
from izcorr.oracles import morozov_subset_sum
from izcorr.resolvent import ResolventPoint
from izcorr.spectra import make_pair
from izcorr.verify import random_pair, random_real_spectrum

from conftest import pairs

P_UNIT = 1 / (math.e - 1)


def closed_form_n2(a, b):
    """Entry (1, 1) for X = [0, a], Y = [0, b], confirmed symbolically in test_closed_form_symbolic."""
    t = a * b
    return cmath.exp(t) / (cmath.exp(t) - 1) - 1 / t


def test_n1_is_one():
    pair = make_pair([0.3 + 1j], [2])
    assert correlator_entry_affine(pair, 0, 0) == 1
    assert correlator_matrix(pair).p.tolist() == [[1]]
    assert abs(correlator_entry_quadrature(pair, 0, 0, nodes=32) - 1) < 1e-12


def test_unit_pair(unit_pair):
    p = correlator_matrix(unit_pair).p
    np.testing.assert_allclose(p, [[P_UNIT, 1 - P_UNIT], [1 - P_UNIT, P_UNIT]], atol=1e-14)
    assert correlator_entry_affine(unit_pair, 1, 1) == pytest.approx(0.58197670686932642, abs=1e-14)


def test_closed_form_symbolic():
    sp = pytest.importorskip("sympy")
    a, b, x, y = sp.symbols("a b x y")
    xs, ys = [0, a], [0, b]
    u = [1 / (x - t) for t in xs]
    v = [1 / (y - t) for t in ys]
    num = sp.exp(a * b) * (1 - (1 - u[0] * v[0]) * (1 - u[1] * v[1])) - (1 - (1 - u[0] * v[1]) * (1 - u[1] * v[0]))
    w = num / (sp.exp(a * b) - 1)
    residue = sp.cancel(sp.together(w * (x - a) * (y - b))).subs(x, a).subs(y, b)
    claimed = sp.exp(a * b) / (sp.exp(a * b) - 1) - 1 / (a * b)
    assert sp.simplify(residue - claimed) == 0


@pytest.mark.parametrize("a,b", [(1, 1), (0.5, 2), (2, -0.7), (1j, 0.8)])
def test_closed_form_n2(a, b):
    pair = make_pair([0, a], [0, b])
    assert correlator_entry_affine(pair, 1, 1) == pytest.approx(closed_form_n2(a, b), abs=1e-12)


def test_haar_limit():
    pair = make_pair([0, 1e-3], [0, 1e-3])
    assert abs(correlator_entry_affine(pair, 1, 1) - 0.5) < 1e-2
    rng = np.random.default_rng(7)
    for n in (2, 3, 4):
        p = correlator_matrix(random_pair(rng, n).scaled(1e-3)).p
        assert np.max(np.abs(p - 1 / n)) < 1e-2


@given(pairs(max_n=8))
@settings(max_examples=30)
def test_doubly_stochastic(pair):
    assert correlator_matrix(pair).sum_rule_deviation() <= 1e-8


@given(pairs(max_n=6))
@settings(max_examples=20)
def test_transpose_symmetry(pair):
    a = correlator_matrix(pair).p
    b = correlator_matrix(pair.swapped()).p
    assert np.max(np.abs(a - b.T)) <= 1e-9


def test_real_spectra_real_entries(rng):
    for n in (2, 3, 4):
        pair = make_pair(random_real_spectrum(rng, n), random_real_spectrum(rng, n))
        p = correlator_matrix(pair).p
        assert np.max(np.abs(p.imag)) < 1e-10
        assert np.all((p.real > 0) & (p.real < 1))


def test_spot_check_against_subset_oracle(rng):
    pair = make_pair(random_real_spectrum(rng, 3), random_real_spectrum(rng, 3))
    p = correlator_matrix(pair).p
    residue = correlator_entry_quadrature(pair, 1, 2, nodes=32, w_func=lambda x, y: morozov_subset_sum(pair, ResolventPoint(x, y)))
    assert abs(residue - p[1, 2]) < 1e-8


def test_index_errors(unit_pair):
    with pytest.raises(IndexOutOfRange):
        correlator_entry_affine(unit_pair, 2, 0)
    with pytest.raises(IndexOutOfRange):
        correlator_entry_quadrature(unit_pair, 0, -1)
    with pytest.raises(ValueError):
        correlator_entry_quadrature(unit_pair, 0, 0, radius_fraction=0.6)


def test_stochasticity_violation_reports_condition(rng):
    pair = random_pair(rng, 6)
    with pytest.raises(StochasticityViolation) as info:
        correlator_matrix(pair, precision="double", row_sum_tol=1e-17)
    assert info.value.condition >= 1


def test_corner_method_agrees_when_well_conditioned(unit_pair):
    a = correlator_entry_affine(unit_pair, 0, 1, method="corners")
    assert a == pytest.approx(1 - P_UNIT, abs=1e-12)


def test_quadrature_unit_pair(unit_pair):
    q = correlator_entry_quadrature(unit_pair, 1, 1, radius_fraction=0.25, nodes=64)
    assert abs(q - P_UNIT) < 1e-10


@pytest.mark.parametrize("n", [2, 3])
def test_quadrature_converged(rng, n):
    pair = random_pair(rng, n)
    for i, j in [(0, 0), (n - 1, 0)]:
        a = correlator_entry_quadrature(pair, i, j, nodes=32)
        b = correlator_entry_quadrature(pair, i, j, nodes=64)
        assert abs(a - b) < 1e-10


def test_threads_do_not_change_result(rng):
    pair = random_pair(rng, 3)
    a = correlator_matrix(pair, precision="double").p
    b = correlator_matrix(pair, precision="double", threads=4).p
    assert np.array_equal(a, b)
