import math

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

from izcorr.logcomplex import LogComplex

finite = st.complex_numbers(min_magnitude=1e-100, max_magnitude=1e100, allow_nan=False, allow_infinity=False)


@given(finite, finite)
def test_multiplication_matches_complex(a, b):
    prod = LogComplex.from_complex(a) * LogComplex.from_complex(b)
    assert abs(prod.to_complex() - a * b) <= 1e-13 * abs(a * b)
    assert abs(abs(prod.phase) - 1) < 1e-14


@given(finite, finite)
def test_division_roundtrip(a, b):
    q = LogComplex.from_complex(a) / LogComplex.from_complex(b)
    assert abs(q.to_complex() * b - a) <= 1e-13 * abs(a)


def test_zero_and_overflow_range():
    z = LogComplex.zero()
    assert z.is_zero and z.to_complex() == 0
    big = LogComplex(5000.0, 1j)
    assert (big / big).rel_diff(LogComplex.one()) < 1e-15
    with pytest.raises(ZeroDivisionError):
        big / z


def test_from_mpmath():
    with mp.workdps(50):
        v = LogComplex.from_complex(mp.exp(mp.mpf(2000)) * mp.mpc(0, 1))
    assert v.log_magnitude == pytest.approx(2000)
    assert abs(v.phase - 1j) < 1e-15


def test_pow_and_negation():
    v = LogComplex.from_complex(-2.0)
    assert (v**3).to_complex() == pytest.approx(-8)
    assert (-v).to_complex() == pytest.approx(2)
    assert v.conjugate().phase == -1


def test_from_log():
    v = LogComplex.from_log(complex(math.log(3), math.pi / 2))
    assert v.to_complex() == pytest.approx(3j)
