import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given

from izcorr.clinalg import (
    KernelMatrix,
    LUFactors,
    as_complex,
    build_kernel,
    condition_estimate,
    det,
    logdet,
    resolve_precision,
    solve_right,
    to_mp,
)
from izcorr.errors import SingularKernel
from izcorr.spectra import ProblemPair, make_pair, validate_spectrum

from conftest import pairs

E = math.e


def test_kernel_scaling_examples():
    k = build_kernel(make_pair([0], [0]))
    assert k.row_shifts.tolist() == [0] and k.scaled_entries.tolist() == [[1]]
    k = build_kernel(make_pair([0, 1], [0, 1]))
    assert k.row_shifts.tolist() == [0, 1]
    np.testing.assert_allclose(k.scaled_entries, [[1, 1], [1 / E, 1]], rtol=1e-15)
    np.testing.assert_allclose(k.entries(), [[1, 1], [1, E]], rtol=1e-15)
    k = build_kernel(make_pair([100], [10]))
    assert k.row_shifts[0] == 1000 and k.scaled_entries[0, 0] == 1


@given(pairs(max_n=6))
def test_scaled_entries_bounded(pair):
    k = build_kernel(pair)
    mods = np.abs(k.scaled_entries)
    assert np.all(mods <= 1 + 1e-15)
    np.testing.assert_allclose(mods.max(axis=1), 1, rtol=1e-14)


def test_logdet_examples():
    v = logdet(build_kernel(make_pair([2], [3])))
    assert v.log_magnitude == pytest.approx(6, abs=1e-15) and v.phase == 1
    v = logdet(build_kernel(make_pair([0, 1], [0, 1])))
    assert v.to_complex() == pytest.approx(E - 1, rel=1e-14)


def test_logdet_no_overflow():
    v = logdet(build_kernel(make_pair([100, 101], [10, 12])))
    assert math.isfinite(v.log_magnitude) and v.log_magnitude > 2000


def test_duplicate_rows_are_singular():
    s = np.array([[1.0, 0.5], [1.0, 0.5]], dtype=complex)
    k = KernelMatrix(np.zeros(2), s)
    with pytest.raises(SingularKernel):
        logdet(k)
    with pytest.raises(SingularKernel):
        solve_right(k, np.eye(2))


def test_near_duplicate_rows_tiny_determinant():
    pair = ProblemPair(validate_spectrum([0.3, 0.3 + 1e-9]), validate_spectrum([0, 1]))
    k = build_kernel(pair)
    assert abs(logdet(k).to_complex()) < 1e-8


@given(pairs(max_n=6))
def test_logdet_shift_convention_invariant(pair):
    # at the automatically chosen precision; in double the rescaling alone
    # perturbs a near-singular kernel by eps * cond
    k = resolve_precision(pair)
    c = 3.7
    with mp.workdps(k.dps or 15):
        factor = mp.exp(-c) if k.dps else math.exp(-c)
        shifted = KernelMatrix(k.row_shifts + c, k.scaled_entries * factor, k.dps)
    a, b = logdet(k), logdet(shifted)
    assert b.log_magnitude == pytest.approx(a.log_magnitude, abs=1e-12)
    assert abs(a.phase - b.phase) < 1e-12


@given(pairs(max_n=6))
def test_logdet_transpose_symmetry(pair):
    a = logdet(resolve_precision(pair))
    b = logdet(resolve_precision(pair.swapped()))
    assert a.rel_diff(b) < 1e-11


def test_solve_right_examples(unit_pair):
    k = build_kernel(unit_pair)
    np.testing.assert_allclose(solve_right(k, k.entries()), np.eye(2), atol=1e-12)
    assert np.all(solve_right(k, np.zeros((2, 2))) == 0)
    inv = np.array([[E, -1], [-1, 1]]) / (E - 1)
    np.testing.assert_allclose(solve_right(k, np.eye(2)), inv, rtol=1e-13)


@given(pairs(max_n=5))
def test_solve_right_roundtrip(pair):
    k = build_kernel(pair)
    if condition_estimate(k) >= 1e6:
        return
    f = np.arange(pair.n**2).reshape(pair.n, pair.n) + 1j
    g = solve_right(k, f)
    back = g @ k.entries()
    assert np.max(np.abs(back - f)) <= 1e-10 * np.max(np.abs(f))


def test_condition_examples(unit_pair):
    assert condition_estimate(build_kernel(make_pair([0.5], [2]))) == 1
    k = build_kernel(unit_pair)
    sv = np.linalg.svd(k.scaled_entries, compute_uv=False)
    est = condition_estimate(k)
    assert sv[0] / sv[-1] / 10 <= est <= 10 * sv[0] / sv[-1]
    near = build_kernel(make_pair([0, 1e-6], [0, 1]))
    assert condition_estimate(near) > 1e4


def test_condition_estimate_tracks_svd(rng):
    for n in range(2, 7):
        from izcorr.verify import random_pair

        k = build_kernel(random_pair(rng, n))
        s = k.scaled_entries
        true = np.linalg.norm(s, 1) * np.linalg.norm(np.linalg.inv(s), 1)
        assert true / 10 <= condition_estimate(k) <= true * 1.0000001


def test_generic_lu_matches_lapack(rng):
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    b = rng.standard_normal((5, 2)) + 0j
    with mp.workdps(30):
        lu = LUFactors(to_mp(a))
        assert complex(lu.det()) == pytest.approx(np.linalg.det(a), rel=1e-13)
        np.testing.assert_allclose(as_complex(lu.solve(b)), np.linalg.solve(a, b), rtol=1e-12)
        np.testing.assert_allclose(as_complex(lu.solve(b, trans=True)), np.linalg.solve(a.T, b), rtol=1e-12)
        assert lu.logdet().to_complex() == pytest.approx(np.linalg.det(a), rel=1e-13)
    assert det(a) == pytest.approx(np.linalg.det(a))


def test_multiprecision_kernel_agrees(unit_pair):
    k = build_kernel(unit_pair, dps=40)
    assert k.dps == 40
    assert logdet(k).to_complex() == pytest.approx(E - 1, rel=1e-15)


def test_resolve_precision_policy(rng):
    from izcorr.verify import random_pair

    assert resolve_precision(make_pair([0, 1], [0, 1])).dps is None
    assert resolve_precision(make_pair([0, 1], [0, 1]), precision=50).dps == 50
    clustered = make_pair([0, 0.01, 0.02, 0.03], [0, 0.01, 0.02, 0.03])
    assert resolve_precision(clustered).dps is not None
    assert resolve_precision(clustered, precision="double").dps is None
    with pytest.raises(ValueError):
        resolve_precision(clustered, precision="quad")
