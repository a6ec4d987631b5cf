"""Hyperbolic distances, affine normalizers, and the Baker-obstruction certificate.

The certificate walks through the estimate behind the divergence of
``|L_k(N(z_k))|``: for a point z_k on |z| = r_k halfway between two
neighbouring poles a_k, b_k, the normalizer L_k sends a_k, b_k to 0, 1 and z_k
into D(1/2, 1/2), while N moves z_k by ``1/|h(z_k)|`` (f-mode) or
``|z_k|/|h(z_k)|`` (g-mode), a distance enormous compared to ``|a_k - b_k|``.
A density lower bound for the thrice-punctured plane turns that into a
lower bound on the hyperbolic distance from L_k(N(z_k)) to D(1/2, 1/2).
"""

import cmath
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .construction import eval_h, pole_ring
from .errors import DegenerateNormalizer, DomainError, IndexTooSmall, OutsideDomain
from .numerics import DEFAULT_PREC, Angle, ExtReal, Point, _mag, _mpf_frac

DEFAULT_DENSITY_C = 4.38


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    def contains(self, z, slack=0.0):
        return abs(complex(z) - self.center) < self.radius + slack


HALF_DISK = Disk(0.5 + 0j, 0.5)


@dataclass(frozen=True)
class DensityConstants:
    """``C`` in the bound lambda(z) >= 1 / (2|z| (C + |log|z||)) on C minus {0, 1}."""

    C: float = DEFAULT_DENSITY_C

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("density constant must be positive")


def disk_dist(z, w):
    """Poincare distance in the unit disk (curvature -1)."""
    z, w = complex(z), complex(w)
    if abs(z) >= 1 or abs(w) >= 1:
        raise OutsideDomain("disk_dist needs points inside the unit disk")
    return 2.0 * math.atanh(abs((z - w) / (1 - z.conjugate() * w)))


def disk_automorphism(alpha, rotation=0.0):
    """``z -> e^{i rotation} (z - alpha) / (1 - conj(alpha) z)``."""
    alpha = complex(alpha)
    if abs(alpha) >= 1:
        raise OutsideDomain("automorphism centre must lie in the unit disk")
    u = cmath.exp(1j * rotation)
    return lambda z: u * (z - alpha) / (1 - alpha.conjugate() * z)


def c01_density_lower(z, consts=DensityConstants()):
    """Lower bound for the hyperbolic density of C minus {0, 1}; 0 for |z| < 2."""
    z = complex(z)
    if z == 0 or z == 1:
        raise DomainError("the density is undefined at the punctures 0 and 1")
    m = abs(z)
    if m < 2:
        return 0.0
    return 1.0 / (2.0 * m * (consts.C + abs(math.log(m))))


def _log_modulus(z):
    if isinstance(z, ExtReal):
        if z.is_zero():
            return -math.inf
        return float(abs(z).log())
    return math.log(abs(complex(z))) if z != 0 else -math.inf


def dist_lower_to_disk(z, consts=DensityConstants()):
    """Lower bound on the distance in C minus {0, 1} from z to D(1/2, 1/2).

    A path from z to the disk crosses every circle |w| = t with 2 < t < |z|,
    so integrating the density bound radially gives
    ``1/2 log((C + log|z|) / (C + log 2))``.  ``z`` may be a complex number
    or an ExtReal modulus.
    """
    log_m = _log_modulus(z)
    if log_m <= math.log(2.0):
        return 0.0
    return 0.5 * math.log((consts.C + log_m) / (consts.C + math.log(2.0)))


@dataclass(frozen=True)
class MobiusNormalizer:
    """The affine map ``z -> (z - a) / (b - a)`` sending a to 0 and b to 1."""

    a: complex
    b: complex

    def __post_init__(self):
        if self.a == self.b:
            raise DegenerateNormalizer("normalizer needs two distinct points")

    def apply(self, z):
        return (z - self.a) / (self.b - self.a)

    __call__ = apply

    def scale(self):
        return abs(self.b - self.a)


def normalizer(a, b):
    if isinstance(a, Point):
        a = a.to_complex()
    if isinstance(b, Point):
        b = b.to_complex()
    return MobiusNormalizer(complex(a), complex(b))


def _angle_mpf(angle, prec):
    """The angle with ``prec`` relative bits, however small it is."""
    q = angle.exact
    if q is not None:
        return mpmath.pi * _mpf_frac(q)
    v = angle.approx(prec)
    if v == 0 or _mag(v) < -prec // 2:
        v = angle.approx(prec + max(0, -_mag(v)) + 32)
    return v


def _expj_minus_one(delta, prec):
    """``exp(i delta) - 1`` without cancellation, for an Angle ``delta``."""
    q = delta.exact
    with mpmath.workprec(prec):
        if q is not None:
            half = _mpf_frac(q) / 2
            s, c = mpmath.sinpi(half), mpmath.cospi(half)
        else:
            half = _angle_mpf(delta, prec) / 2
            s, c = mpmath.sin(half), mpmath.cos(half)
        return 2j * s * mpmath.mpc(c, s)


def normalized_position(z, a, b, prec=DEFAULT_PREC):
    """``(z - a) / (b - a)`` at high precision for exact points.

    Written as ``(z/a - 1) / (b/a - 1)`` with both differences formed from
    angle differences, so chords of size 2**-2048 lose no accuracy.
    """
    z, a, b = (Point.from_complex(p) for p in (z, a, b))
    if a.is_zero:
        return normalizer(a.to_complex(), b.to_complex()).apply(z.to_complex())

    def ratio_minus_one(p):
        q = p.modulus_sq / a.modulus_sq
        delta = p.angle - a.angle
        with mpmath.workprec(prec):
            e = _expj_minus_one(delta, prec)
            if q == 1:
                return e
            qm = _mpf_frac(q)
            rho_m1 = _mpf_frac(q - 1) / (mpmath.sqrt(qm) + 1)
            return rho_m1 * (e + 1) + e

    num = ratio_minus_one(z)
    den = ratio_minus_one(b)
    with mpmath.workprec(prec):
        if den == 0:
            raise DegenerateNormalizer("normalizer needs two distinct points")
        return num / den


# ---------------------------------------------------------------------------
# Bounds and certificate
# ---------------------------------------------------------------------------


def _ext_pow(r, m):
    """``r**m`` as an ExtReal for rational r and a (big) integer m."""
    r = Fraction(r)
    p, q = r.numerator, r.denominator
    if p & (p - 1) == 0 and q & (q - 1) == 0:
        return ExtReal.pow2(m * (p.bit_length() - q.bit_length()))
    with mpmath.workprec(abs(m).bit_length() + 80):
        return ExtReal.exp(mpmath.mpf(m) * mpmath.log(_mpf_frac(r)))


_FOUR_PI = ExtReal(4.0 * math.pi)


@dataclass(frozen=True)
class ObstructionBound:
    """Lower bounds on |L_k(N(z_k))|: nominal, and with the chord factor 1/r_k."""

    nominal: ExtReal
    corrected: ExtReal

    def to_dict(self):
        return {"nominal": self.nominal, "corrected": self.corrected}


def obstruction_bound(mode, seq, k):
    """f-mode: n_k / (4 pi r_k**(3 n_{k-1})) - 1; g-mode: r_k**(n_{k-1} - 1) / (4 pi) - 1."""
    if k < 2:
        raise IndexTooSmall(f"the obstruction bound needs k >= 2, got k={k}")
    r, n_k, n_prev = seq.r(k), seq.n(k), seq.n(k - 1)
    if mode == "f":
        main = ExtReal.from_int(n_k) / (_FOUR_PI * _ext_pow(r, 3 * n_prev))
    elif mode == "g":
        main = _ext_pow(r, n_prev - 1) / _FOUR_PI
    else:
        raise ValueError(f"mode must be 'f' or 'g', got {mode!r}")
    corrected = main / ExtReal.from_fraction(r)
    return ObstructionBound(main - 1, corrected - 1)


@dataclass
class CertificateSample:
    index: int
    nu: int
    z: complex
    log_h: ExtReal
    displacement: ExtReal
    chord: ExtReal
    L_z: complex
    in_disk: bool
    value: ExtReal
    witness: float
    passed: bool

    def to_dict(self):
        return {
            "index": self.index,
            "nu": str(self.nu),
            "z": [self.z.real, self.z.imag],
            "log_h": self.log_h,
            "displacement": self.displacement,
            "chord": self.chord,
            "L_z": [self.L_z.real, self.L_z.imag],
            "in_disk": self.in_disk,
            "value": self.value,
            "witness": self.witness,
            "passed": self.passed,
        }


@dataclass
class CertificateEntry:
    k: int
    mode: str
    bound: ObstructionBound
    vacuous: bool
    samples: list
    min_value: ExtReal
    max_value: ExtReal
    min_witness: float
    passed: bool
    errors: list = field(default_factory=list)

    def to_dict(self):
        return {
            "k": self.k,
            "mode": self.mode,
            "bound_nominal": self.bound.nominal,
            "bound_corrected": self.bound.corrected,
            "vacuous": self.vacuous,
            "min_value": self.min_value,
            "max_value": self.max_value,
            "min_witness": self.min_witness,
            "passed": self.passed,
            "errors": list(self.errors),
            "samples": [s.to_dict() for s in self.samples],
        }


def mid_arc_indices(n, samples, seed=0):
    """Ring indices nu for mid-arc points 2 nu pi / n: an even spread, then seeded draws."""
    spread = (samples + 1) // 2
    picks = [(s * n) // spread for s in range(spread)]
    rng = random.Random(seed)
    while len(picks) < samples:
        picks.append(rng.randrange(n))
    return picks


def obstruction_certificate(nmap, k, samples=64, seed=0, consts=DensityConstants(),
                            prec=DEFAULT_PREC):
    """Certified lower values for |L_k(N(z_k))| at mid-arc points of |z| = r_k.

    Each value is ``|N(z_k) - z_k| / |a_k - b_k| - |L_k(z_k)|`` with h's
    truncation and continuation bounds folded in, so it stays below the true
    modulus.  A sample passes when L_k(z_k) lies in D(1/2, 1/2) and the value
    reaches the chord-corrected bound.
    """
    if k < 2:
        raise IndexTooSmall(f"the obstruction certificate needs k >= 2, got k={k}")
    seq = nmap.seq
    ring = pole_ring(seq, k)
    bound = obstruction_bound(nmap.mode, seq, k)
    vacuous = bound.corrected < 0
    results, errors = [], []
    for idx, nu in enumerate(mid_arc_indices(ring.n, samples, seed)):
        z = Point.polar(ring.radius, Angle.pi_multiple(Fraction(2 * nu, ring.n)))
        try:
            pv = eval_h(seq, z, nmap.eval_eps, prec)
            if pv.is_zero:
                raise ArithmeticError("h vanishes at a mid-arc point")
            log_h = pv.log_abs + pv.tail_log_bound
            if pv.continuation_bound is not None:
                log_h = log_h + pv.continuation_bound
            displacement = ExtReal.exp(-log_h)
            if nmap.gmode:
                displacement = displacement * ExtReal.from_fraction(ring.radius)
            a, b, chord = ring.nearest_pair(z)
            L_z = complex(normalized_position(z, a, b, prec))
            in_disk = abs(L_z - 0.5) <= 0.5 + 1e-12
            value = displacement / chord - ExtReal(abs(L_z))
            witness = dist_lower_to_disk(value, consts) if value > 0 else 0.0
            ok = in_disk and value >= bound.corrected
            results.append(CertificateSample(idx, nu, z.to_complex(), pv.log_abs, displacement,
                                             chord, L_z, in_disk, value, witness, ok))
        except ArithmeticError as exc:
            errors.append({"index": idx, "nu": str(nu), "error": str(exc)})
    values = [s.value for s in results]
    min_value = min(values) if values else None
    max_value = max(values) if values else None
    min_witness = min((s.witness for s in results), default=0.0)
    passed = not errors and all(s.passed for s in results)
    return CertificateEntry(k, nmap.mode, bound, vacuous, results, min_value, max_value,
                            min_witness, passed, errors)
