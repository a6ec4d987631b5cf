import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from baker_scope.construction import (
    ParameterSequence,
    Verdict,
    continuation_bound,
    eval_h,
    generate_strict,
    growth_check,
    growth_rhs,
    h_complex,
    nearest_pole_pair,
    pole_point,
    pole_residual,
    random_pole_indices,
    truncation_index,
    validate,
)
from baker_scope.errors import (
    ExponentBudgetExceeded,
    IndexOutOfRange,
    IndexTooSmall,
    InvalidSampleCount,
    RadiiInvalid,
)
from baker_scope.numerics import Point


def h_oracle(radii, exps, z, dps=60):
    with mpmath.workdps(dps):
        z = mpmath.mpc(z)
        out = mpmath.mpc(1)
        for r, n in zip(radii, exps):
            out *= 1 + (z / r) ** n
        return out


# ---- validation ---------------------------------------------------------------

def test_validate_relaxed_flags_c3(relaxed):
    rep = validate(relaxed)
    assert rep.verdict("c3", 2) is Verdict.FAILS
    assert rep.verdict("c3", 3) is Verdict.FAILS
    assert ("c3", 2) in rep.failures()
    assert not rep.all_hold()


def test_validate_strict_all_hold(strict):
    rep = validate(strict)
    assert rep.all_hold()
    # C3 at k=3 is an equality: 4**(4*256) == 2**2048
    assert strict.n(3) == Fraction(4) ** (4 * strict.n(2))


def test_validate_c1_fails_for_close_radii():
    rep = validate(ParameterSequence((1, 1.5), (2, 4)))
    assert rep.verdict("c1", 2) is Verdict.FAILS


def test_generate_strict_minimal(strict):
    assert strict.exponents == (2, 256, 2 ** 2048)
    # minimality: one less (or two less under parity) breaks a condition
    for k in (2, 3):
        smaller = list(strict.exponents)
        smaller[k - 1] -= 2
        rep = validate(ParameterSequence(strict.radii, smaller))
        assert not rep.all_hold()


def test_generate_strict_budget_and_radii():
    with pytest.raises(ExponentBudgetExceeded) as exc:
        generate_strict((1, 2, 4), True, 1024)
    assert exc.value.k == 3
    assert generate_strict((2,), True).exponents == (2,)
    with pytest.raises(RadiiInvalid):
        generate_strict((1, 1.5))


# ---- truncation and evaluation ------------------------------------------------

def test_truncation_index_example():
    radii = [2 ** (j - 1) for j in range(1, 21)]
    exps = [2 * j for j in range(1, 21)]
    seq = ParameterSequence(radii, exps)
    J, tail = truncation_index(seq, 1.0, 1e-6)
    assert J == 3
    # oracle: direct summation of the dropped bounds
    dropped = sum(2 * (1 / r) ** n for r, n in zip(radii[3:], exps[3:]))
    assert tail.to_float() == pytest.approx(dropped, rel=1e-12)
    assert dropped <= 1e-6
    assert sum(2 * (1 / r) ** n for r, n in zip(radii[2:], exps[2:])) > 1e-6


def test_truncation_at_zero(relaxed):
    assert truncation_index(relaxed, 0, 1.0) == (0, truncation_index(relaxed, 0, 1.0)[1])
    pv = eval_h(relaxed, 0)
    assert pv.to_complex() == 1


def test_eval_h_relaxed_at_one(relaxed):
    ref = h_oracle((1, 2, 4), (2, 4, 8), 1)
    pv = eval_h(relaxed, 1.0)
    assert pv.to_complex() == pytest.approx(complex(ref), rel=1e-14)
    assert abs(pv.to_complex() - 2.1250324) < 1e-7


def test_eval_h_zero_on_pole(relaxed):
    assert eval_h(relaxed, pole_point(relaxed, 2, 0)).is_zero


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 7.9), st.floats(-math.pi, math.pi))
def test_eval_h_matches_oracle(rho, theta):
    relaxed = ParameterSequence((1, 2, 4), (2, 4, 8), parity=True)
    z = cmath.rect(rho, theta)
    ref = complex(h_oracle((1, 2, 4), (2, 4, 8), z))
    if abs(ref) < 1e-6:
        return
    got = eval_h(relaxed, z).to_complex()
    assert abs(got - ref) <= 1e-12 * abs(ref)
    hc = complex(h_complex(relaxed, np.array([z]))[0])
    assert abs(hc - ref) <= 1e-12 * abs(ref)


def test_eval_h_strict_huge_exponent(strict):
    pv = eval_h(strict, 4.0)
    with mpmath.workprec(512):
        ref = mpmath.log(17) + mpmath.log(1 + mpmath.mpf(2) ** 256) + mpmath.log(2)
    assert abs(pv.log_abs.to_float() - float(ref)) < 1e-12
    # on |z| = 3.9 the 2**2048 power is negligible; just outside |z| = 4 it dominates
    inside = eval_h(strict, 3.9)
    with mpmath.workprec(512):
        two = mpmath.log(1 + mpmath.mpf(3.9) ** 2) + mpmath.log(1 + (mpmath.mpf(3.9) / 2) ** 256)
    assert abs(inside.log_abs.to_float() - float(two)) < 1e-12
    outside = eval_h(strict, 4.0 * (1 + 2.0 ** -40))
    assert outside.log_abs.log2() == pytest.approx(2048 - 40, abs=1e-6)


def test_continuation_bound_only_inside(strict, relaxed):
    assert continuation_bound(relaxed, 5.0) is None
    b = continuation_bound(relaxed, 2.0)
    # 2**(2-8) * (1/2)**8
    assert b.to_float() == pytest.approx(2.0 ** -6 * 0.5 ** 8, rel=1e-12)
    b = continuation_bound(strict, 4.0)
    assert (b.mantissa, b.exponent) == (1.0, 2 - 2 ** 2048)


# ---- pole rings ---------------------------------------------------------------

def test_pole_points(relaxed):
    assert pole_point(relaxed, 1, 0).to_complex() == pytest.approx(1j)
    assert pole_point(relaxed, 2, 0).to_complex() == pytest.approx(math.sqrt(2) * (1 + 1j))
    assert pole_point(relaxed, 2, 3).to_complex() == pytest.approx(2 * cmath.exp(-1j * math.pi / 4))
    with pytest.raises(IndexOutOfRange):
        pole_point(relaxed, 2, 4)


def test_nearest_pair_real_axis(relaxed):
    a, b, chord = nearest_pole_pair(relaxed, 2, 2.0)
    assert a.to_complex() == pytest.approx(2 * cmath.exp(1j * math.pi / 4))
    assert b.to_complex() == pytest.approx(2 * cmath.exp(-1j * math.pi / 4))
    assert chord.to_float() == pytest.approx(2 * math.sqrt(2))


def test_nearest_pair_imaginary_axis(relaxed):
    a, b, _ = nearest_pole_pair(relaxed, 2, 2j)
    angles = sorted([cmath.phase(a.to_complex()), cmath.phase(b.to_complex())])
    assert angles == pytest.approx([math.pi / 4, 3 * math.pi / 4])


def test_nearest_pair_strict_big_integer(strict):
    z = 4 * cmath.exp(0.7j)
    a, b, chord = nearest_pole_pair(strict, 3, z)
    n = strict.n(3)
    # oracle: the angle of the double z at 4200 bits, then exact floor
    with mpmath.workprec(4200):
        theta = mpmath.atan2(mpmath.mpf(z.imag), mpmath.mpf(z.real))
        nu_b = int(mpmath.floor((n * theta / mpmath.pi - 1) / 2)) % n
    assert b.angle.exact == Fraction(2 * nu_b + 1, n)
    assert a.angle.exact == Fraction(2 * nu_b + 3, n)
    assert chord.log2() == pytest.approx(math.log2(8 * math.pi) - 2048, abs=1e-12)


def test_pole_residuals_strict(strict):
    tol = mpmath.mpf(2) ** -200
    for k in (1, 2, 3):
        for nu in random_pole_indices(strict.n(k), 20, seed=k):
            assert pole_residual(strict, k, nu) <= tol
            assert pole_residual(strict, k, nu, exact_angles=False) <= tol


def test_random_pole_indices_deterministic():
    a = random_pole_indices(2 ** 2048, 20, 5)
    assert a == random_pole_indices(2 ** 2048, 20, 5)
    assert len(a) == 20 and max(a) > 2 ** 2000
    assert random_pole_indices(4, 20, 1) == [0, 1, 2, 3]


# ---- growth -------------------------------------------------------------------

def test_growth_rhs(strict):
    assert growth_rhs(strict, 3).to_float() == pytest.approx(3 * 256 * math.log(4), rel=1e-14)
    assert growth_rhs(strict, 3).to_float() >= 3 * 256 * math.log(4)
    with pytest.raises(IndexTooSmall):
        growth_rhs(strict, 2)
    seq = ParameterSequence((1, 2, 4, 8), (2, 256, 2 ** 2048, 2 ** 20000))
    assert growth_rhs(seq, 4).log2() == pytest.approx(2048 + math.log2(3 * math.log(8)), abs=1e-9)


def test_growth_check_strict(strict):
    g = growth_check(strict, 3, 256)
    assert g.passed
    assert g.max_log_h.to_float() < 182
    assert g.bound.to_float() == pytest.approx(768 * math.log(4), rel=1e-14)
    with pytest.raises(InvalidSampleCount):
        growth_check(strict, 3, 0)
