import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from baker_scope.construction import ParameterSequence, pole_point
from baker_scope.errors import OutsideDomain, PoleHit
from baker_scope.newton import (
    Classification,
    NewtonMap,
    consistency_points,
    fixed_point_residual,
    log_f,
    log_g_over_z,
    orbit,
    quadrature_consistency,
    real_descent_check,
    step,
)

RADII, EXPS = (1, 2, 4), (2, 4, 8)


def h_naive(z):
    out = 1
    for r, n in zip(RADII, EXPS):
        out *= 1 + (z / r) ** n
    return out


def poly_coeffs():
    """Exact coefficients of h as a polynomial: {degree: Fraction}."""
    coeffs = {0: Fraction(1)}
    for r, n in zip(RADII, EXPS):
        new = {}
        for d, c in coeffs.items():
            new[d] = new.get(d, 0) + c
            new[d + n] = new.get(d + n, 0) + c / Fraction(r) ** n
        coeffs = new
    return coeffs


def exact_log_f(z):
    return sum(complex(c / (d + 1)) * z ** (d + 1) for d, c in poly_coeffs().items())


def exact_log_g(z):
    return sum(complex(c / d) * z ** d for d, c in poly_coeffs().items() if d > 0)


@pytest.fixture
def fmap(relaxed):
    return NewtonMap("f", relaxed)


@pytest.fixture
def gmap(relaxed):
    return NewtonMap("g", relaxed)


def test_step_examples(fmap, gmap):
    assert step(fmap, 0) == -1
    assert step(gmap, 0) == 0
    assert step(fmap, 1.0) == pytest.approx(1 - 1 / h_naive(1.0), rel=1e-15)
    assert abs(step(fmap, 1.0) - 0.52942) < 1e-5


def test_step_pole(fmap):
    with pytest.raises(PoleHit) as exc:
        step(fmap, pole_point(fmap.seq, 2, 0).to_complex())
    assert (exc.value.k, exc.value.nu) == (2, 0)


def test_step_logspace_matches_direct(strict):
    # below |z| = 2 the strict map is a small polynomial in double range
    m = NewtonMap("f", strict)
    assert not m.direct
    for z in (0.3 + 0.2j, -1.1 + 0.4j, 1.5j):
        ref = z - 1 / complex((1 + z * z) * (1 + (mpmath.mpc(z) / 2) ** 256))
        assert step(m, z) == pytest.approx(ref, rel=1e-14)


def test_g_orbit_converges_monotonically(gmap):
    rec = orbit(gmap, 1.0)
    assert rec.classification is Classification.CONVERGED
    mods = rec.moduli()
    assert all(b < a for a, b in zip(mods, mods[1:]))
    # oracle: plain real iteration
    x, n = 1.0, 0
    while abs(x) >= 1e-12:
        x = x * (1 - 1 / h_naive(x))
        n += 1
    assert rec.steps == n


def test_f_orbit_drifts_left(fmap):
    rec = orbit(fmap, 0.0, max_iter=50)
    assert rec.classification is Classification.BUDGET
    x = 0.0
    for it in rec.iterates[:10]:
        assert it == pytest.approx(x, abs=1e-15)
        x = x - 1 / h_naive(x)
    assert rec.iterates[2] == pytest.approx(-1 - 1 / h_naive(1.0))
    assert all(b.real < a.real for a, b in zip(rec.iterates, rec.iterates[1:]))


def test_orbit_pole_seed(fmap, strict):
    rec = orbit(fmap, pole_point(fmap.seq, 2, 0).to_complex())
    assert rec.classification is Classification.POLE_HIT
    assert rec.steps == 0 and rec.pole == (2, 0)
    rec = orbit(NewtonMap("f", strict), pole_point(strict, 2, 5))
    assert rec.classification is Classification.POLE_HIT and rec.pole[0] == 2


def test_orbit_escape_and_trace(fmap):
    rec = orbit(fmap, 9.0)
    assert rec.classification is Classification.ESCAPED and rec.steps == 0
    rec = orbit(fmap, 0.0, max_iter=500, trace_head=4, trace_tail=3)
    assert rec.truncated and len(rec.iterates) == 7
    full = orbit(fmap, 0.0, max_iter=500, trace_head=600, trace_tail=0)
    assert rec.iterates[:4] == full.iterates[:4]
    assert rec.iterates[4:] == full.iterates[-3:]


def test_strict_g_orbit(strict):
    rec = orbit(NewtonMap("g", strict), 0.7)
    assert rec.classification is Classification.CONVERGED


def test_fixed_point_residual(strict, fmap, gmap):
    assert fixed_point_residual(fmap, 0).to_float() == 1.0
    assert fixed_point_residual(gmap, 0).is_zero()
    res = fixed_point_residual(NewtonMap("f", strict), 4.0)
    with mpmath.workprec(512):
        ref = -(mpmath.log(17) + mpmath.log(1 + mpmath.mpf(2) ** 256) + mpmath.log(2))
    assert res.log().to_float() == pytest.approx(float(ref), rel=1e-14)
    # f-mode has no finite fixed points
    rng = np.random.default_rng(3)
    for z in rng.uniform(-4, 4, 40) + 1j * rng.uniform(-4, 4, 40):
        assert fixed_point_residual(fmap, z) > 0


def test_g_superattracting_origin(gmap):
    zs = [1e-3 * cmath.exp(1j * t) * s for t in np.linspace(0, 6, 13) for s in (1, 0.1, 0.01)]
    ratios = [abs(step(gmap, z)) / abs(z) ** 2 for z in zs]
    C = 2 * max(ratios)
    assert all(abs(step(gmap, z)) <= C * abs(z) ** 2 for z in zs)
    assert C < 1


def test_log_f_exact_polynomial(relaxed):
    assert log_f(relaxed, 0) == 0
    assert log_f(relaxed, 1.0) == pytest.approx(exact_log_f(1.0), abs=1e-10)
    assert abs(log_f(relaxed, 1.0) - 1.35477) < 1e-5
    z = 1.3 + 0.9j
    assert log_f(relaxed, z) == pytest.approx(exact_log_f(z), abs=1e-10)
    assert log_f(relaxed, z.conjugate()) == pytest.approx(log_f(relaxed, z).conjugate(), abs=1e-12)
    with pytest.raises(OutsideDomain):
        log_f(relaxed, 4.5)


def test_log_g_over_z_exact_polynomial(relaxed):
    assert log_g_over_z(relaxed, 0) == 0
    v = log_g_over_z(relaxed, 1.0)
    assert v.imag == 0 and v.real > 0
    assert v == pytest.approx(exact_log_g(1.0), abs=1e-10)
    z = -0.7 + 1.6j
    assert log_g_over_z(relaxed, z) == pytest.approx(exact_log_g(z), abs=1e-10)
    assert abs(log_g_over_z(relaxed, 1e-9)) < 1e-15


def test_log_f_path_independence(relaxed):
    z, w = 1.2 + 0.8j, 0.2 + 1.5j
    detour = log_f(relaxed, w) + (exact_log_f(z) - exact_log_f(w))
    assert log_f(relaxed, z) == pytest.approx(detour, abs=2e-10)


def test_real_descent_examples(gmap):
    xs = [0.0, 0.5, -0.5, 1, -1, 2, -2, 5, -5]
    rep = real_descent_check(gmap, xs)
    assert rep.passed and rep.skipped == [0.0] and rep.parity
    assert rep.worst_ratio < 1


def test_real_descent_strict_beyond_double(strict):
    rep = real_descent_check(NewtonMap("g", strict), np.linspace(-8, 8, 33))
    assert rep.passed


def test_real_descent_odd_exponent_reported():
    seq = ParameterSequence((1,), (3,))
    rep = real_descent_check(NewtonMap("g", seq, require_parity=False), [-2.0, -0.5, 0.5, 2.0])
    assert not rep.parity
    assert -2.0 in rep.failures


def test_quadrature_consistency(relaxed, strict):
    for seq in (relaxed, strict):
        pts = consistency_points(seq, 20, seed=1)
        rep = quadrature_consistency(seq, pts)
        assert rep.passed and rep.worst_f < 1e-8 and rep.worst_g < 1e-8
