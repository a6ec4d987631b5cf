import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from baker_scope.errors import DomainError, InsufficientPrecision, RangeOverflow, RangeUnderflow
from baker_scope.numerics import (
    Angle,
    ExtReal,
    LogComplex,
    Point,
    lc_add_one,
    lc_inv,
    lc_mul,
    lc_pow,
    lc_to_complex,
    reduce_angle,
)

PI = Angle.pi_multiple


def lc(log_mod, angle):
    return LogComplex(ExtReal(log_mod), angle)


# ---- ExtReal ----------------------------------------------------------------

def test_extreal_normalizes_mantissa():
    x = ExtReal(12.0)
    assert 1 <= x.mantissa < 2
    assert x.to_float() == 12.0
    assert ExtReal.zero().is_zero()


def test_extreal_huge_exponent_roundtrip():
    x = ExtReal.pow2(10 ** 6)
    assert x.exponent == 10 ** 6
    assert ExtReal.from_json(x.to_json()) == x
    assert (x * ExtReal.pow2(-10 ** 6)).to_float() == 1.0
    with pytest.raises(RangeOverflow):
        x.to_float()
    with pytest.raises(RangeUnderflow):
        (1 / x).to_float()


def test_extreal_exp_matches_mpmath():
    x = ExtReal.exp(mpmath.mpf(5000))
    with mpmath.workprec(200):
        ref = mpmath.mpf(5000) / mpmath.log(2)
    assert abs(x.log2() - float(ref)) < 1e-9


def test_extreal_ordering_across_exponents():
    vals = [ExtReal(-3.0), ExtReal.zero(), ExtReal.pow2(-5000), ExtReal(1.5), ExtReal.pow2(4000)]
    assert sorted(reversed(vals)) == vals


finite = st.floats(min_value=-1e300, max_value=1e300, allow_nan=False).filter(lambda v: v != 0)


@settings(max_examples=200, deadline=None)
@given(finite, finite, st.integers(-3000, 3000), st.integers(-3000, 3000))
def test_extreal_arithmetic_vs_mpmath(a, b, ea, eb):
    x, y = ExtReal(a, ea), ExtReal(b, eb)
    with mpmath.workprec(120):
        ma, mb = mpmath.mpf(a) * mpmath.mpf(2) ** ea, mpmath.mpf(b) * mpmath.mpf(2) ** eb
        for got, ref in ((x * y, ma * mb), (x / y, ma / mb)):
            assert abs(got.to_mpf() / ref - 1) < 1e-15
        s = (x + y).to_mpf()
        scale = max(abs(ma), abs(mb))
        assert abs(s - (ma + mb)) <= 1e-15 * scale


@settings(max_examples=100, deadline=None)
@given(finite, st.integers(-5000, 5000))
def test_extreal_json_roundtrip(a, e):
    x = ExtReal(a, e)
    assert ExtReal.from_json(x.to_json()) == x


# ---- angles -----------------------------------------------------------------

def test_reduce_angle_exact_examples():
    assert reduce_angle(PI(Fraction(1, 4)), 4).exact == 1
    assert reduce_angle(PI(Fraction(1, 3)), 6).exact == 0


def test_reduce_angle_big_integer_against_oracle():
    n = 2 ** 128
    theta = Angle.from_mpf(mpmath.mpf(1), 256)
    got = reduce_angle(theta, n, prec=256)
    # independent: exact n * 1 reduced modulo 2 pi at 1024 bits
    with mpmath.workprec(1024):
        two_pi = 2 * mpmath.pi
        ref = mpmath.mpf(n) - two_pi * mpmath.floor(mpmath.mpf(n) / two_pi + mpmath.mpf(1) / 2)
        diff = abs(got.approx(256) - ref)
        diff = min(diff, abs(diff - two_pi))
    assert diff < mpmath.mpf(2) ** -200


def test_reduce_angle_requires_precision():
    theta = Angle.from_mpf(mpmath.mpf(1), 64)
    with pytest.raises(InsufficientPrecision):
        reduce_angle(theta, 2 ** 128)


def test_point_keeps_modulus_exact():
    p = Point.polar(4, PI(Fraction(2 * 5, 2 ** 2048)))
    assert p.modulus_sq == 16
    assert p.log_ratio(4) == 0


# ---- LogComplex ---------------------------------------------------------------

def test_lc_mul_examples():
    i = lc(0.0, PI(Fraction(1, 2)))
    prod = lc_mul(i, i)
    assert prod.log_modulus.to_float() == 0 and prod.argument.exact == 1
    six = lc_mul(lc(math.log(2), Angle.zero()), lc(math.log(3), Angle.zero()))
    assert abs(six.log_modulus.to_float() - math.log(6)) < 1e-15
    assert lc_mul(six, LogComplex.zero()).is_zero


def test_lc_pow_examples():
    w = lc_pow(lc(0.0, PI(Fraction(1, 4))), 4)
    assert w.argument.exact == 1
    w = lc_pow(lc(math.log(2), Angle.zero()), 10)
    assert abs(w.log_modulus.to_float() - 10 * math.log(2)) < 1e-14
    w = lc_pow(lc(0.0, PI(Fraction(1, 2 ** 2047))), 2 ** 2048)
    assert w.argument.exact == 0
    with pytest.raises(DomainError):
        lc_pow(LogComplex.zero(), 0)


def test_lc_add_one_examples():
    one = lc_add_one(LogComplex.zero())
    assert one.log_modulus.is_zero() and one.argument.exact == 0
    assert lc_add_one(lc(0.0, PI(1))).is_zero
    theta = 0.3
    w = lc(200.0, Angle.from_float(theta))
    got = lc_add_one(w).log_modulus.to_mpf()
    with mpmath.workprec(400):
        ref = abs(1 + mpmath.exp(200) * mpmath.expj(theta))
        assert abs(got - mpmath.log(ref)) / 200 <= mpmath.exp(-199)


def test_lc_to_complex_examples():
    assert lc_to_complex(LogComplex.one()) == 1 + 0j
    z = lc_to_complex(lc(math.log(2), PI(1)))
    assert abs(z - (-2)) < 1e-15
    with pytest.raises(RangeOverflow):
        lc_to_complex(lc(1e6, Angle.zero()))


@settings(max_examples=150, deadline=None)
@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False,
                          allow_infinity=False), st.integers(1, 40))
def test_lc_pow_and_inverse_vs_complex(z, n):
    w = LogComplex.from_complex(z)
    got = lc_to_complex(lc_pow(w, n))
    ref = complex(mpmath.mpc(z) ** n)
    assert abs(got - ref) <= 1e-12 * abs(ref)
    assert abs(lc_to_complex(lc_inv(w)) * z - 1) < 1e-14
