"""Parameter sequences, the product h, pole rings and the growth certificate.

The entire function is

    h(z) = prod_k (1 + (z / r_k)**n_k)

for a finite stored prefix ``k = 1..K``.  Evaluation happens in log space so
that exponents such as ``n_3 = 2**2048`` are handled exactly; every omitted
factor is covered by a certified bound on its logarithm.
"""

import enum
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .errors import (
    ExponentBudgetExceeded,
    IndexOutOfRange,
    IndexTooSmall,
    InvalidSampleCount,
    RadiiInvalid,
)
from .numerics import (
    DEFAULT_PREC,
    Angle,
    ExtReal,
    LogComplex,
    Point,
    _mpf_frac,
    lc_add_one,
    lc_mul,
    lc_pow,
    lc_to_complex,
)

# factors with n_k above this are never raised to a power in double precision
DIRECT_MAX_EXPONENT = 1 << 16

# exact big-integer evaluation of r**m in the C3 check up to this many bits
_EXACT_POWER_BITS = 1 << 18


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class ParameterSequence:
    """Radii ``r_1..r_K`` (exact rationals) and exponents ``n_1..n_K``.

    With ``parity=True`` every exponent must be even, which is what makes
    ``h(x) > 1`` on the whole real axis.
    """

    radii: tuple
    exponents: tuple
    parity: bool = False

    def __post_init__(self):
        radii = tuple(_as_fraction(r) for r in self.radii)
        exponents = tuple(int(n) for n in self.exponents)
        if not radii:
            raise ValueError("a parameter sequence needs at least one factor")
        if len(radii) != len(exponents):
            raise ValueError("radii and exponents must have equal length")
        if any(r <= 0 for r in radii):
            raise ValueError("radii must be strictly positive")
        if any(n < 1 for n in exponents):
            raise ValueError("exponents must be positive integers")
        if self.parity and any(n % 2 for n in exponents):
            raise ValueError("parity policy requires every exponent to be even")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "exponents", exponents)

    @property
    def K(self):
        return len(self.radii)

    def r(self, k):
        return self.radii[k - 1]

    def n(self, k):
        return self.exponents[k - 1]

    def with_parity(self, parity=True):
        return ParameterSequence(self.radii, self.exponents, parity)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class ConditionEntry:
    k: int
    c0: Verdict
    c1: Verdict = None
    c2: Verdict = None
    c3: Verdict = None
    parity: Verdict = None

    def to_dict(self):
        return {name: (v.value if isinstance(v, Verdict) else v)
                for name, v in (("k", self.k), ("c0", self.c0), ("c1", self.c1),
                                ("c2", self.c2), ("c3", self.c3), ("parity", self.parity))}


@dataclass(frozen=True)
class ConditionReport:
    entries: tuple

    def entry(self, k):
        return self.entries[k - 1]

    def verdict(self, condition, k):
        return getattr(self.entry(k), condition)

    def failures(self):
        out = []
        for e in self.entries:
            for name in ("c0", "c1", "c2", "c3"):
                if getattr(e, name) is Verdict.FAILS:
                    out.append((name, e.k))
        return out

    def all_hold(self):
        return all(getattr(e, name) in (None, Verdict.HOLDS)
                   for e in self.entries for name in ("c0", "c1", "c2", "c3"))

    def to_dict(self):
        return [e.to_dict() for e in self.entries]


def _v(flag):
    return Verdict.HOLDS if flag else Verdict.FAILS


def _check_c3(n_k, n_prev, r_k):
    """Decide ``n_k >= r_k**(4*n_prev)``: exactly when affordable, else by interval logs."""
    m = 4 * n_prev
    p, q = r_k.numerator, r_k.denominator
    if m * max(p.bit_length(), q.bit_length()) <= _EXACT_POWER_BITS:
        return _v(n_k * q ** m >= p ** m)
    iv = mpmath.iv
    old = iv.prec
    try:
        iv.prec = max(128, n_prev.bit_length() + 96)
        lhs = iv.log(iv.mpf(n_k))
        rhs = m * iv.log(iv.mpf(p) / q)
        if lhs.a >= rhs.b:
            return Verdict.HOLDS
        if lhs.b < rhs.a:
            return Verdict.FAILS
        return Verdict.UNDETERMINED
    finally:
        iv.prec = old


def validate(seq):
    """Check the growth conditions on (r_k, n_k) index by index.

    C0: n_k >= k.  For k >= 2 also C1: r_k >= 2 r_{k-1} >= 2,
    C2: n_k >= n_1 + ... + n_{k-1}, C3: n_k >= r_k**(4 n_{k-1}).
    """
    entries = []
    running = 0
    for k in range(1, seq.K + 1):
        n_k, r_k = seq.n(k), seq.r(k)
        c0 = _v(n_k >= k)
        parity = _v(n_k % 2 == 0)
        if k == 1:
            entries.append(ConditionEntry(k, c0, parity=parity))
        else:
            r_prev, n_prev = seq.r(k - 1), seq.n(k - 1)
            c1 = _v(r_k >= 2 * r_prev and 2 * r_prev >= 2)
            c2 = _v(n_k >= running)
            c3 = _check_c3(n_k, n_prev, r_k)
            entries.append(ConditionEntry(k, c0, c1, c2, c3, parity))
        running += n_k
    return ConditionReport(tuple(entries))


def _ceil_power(r, m):
    p, q = r.numerator, r.denominator
    num, den = p ** m, q ** m
    return -(-num // den)


def generate_strict(radii, parity=True, exponent_bit_budget=4096):
    """Smallest exponents satisfying C0, C2 and C3 for the given radii.

    Raises RadiiInvalid if the radii violate C1 and ExponentBudgetExceeded
    when some n_k would need more than ``exponent_bit_budget`` bits.
    """
    radii = tuple(_as_fraction(r) for r in radii)
    if not radii or any(r <= 0 for r in radii):
        raise RadiiInvalid("radii must be a non-empty list of positive numbers")
    for k in range(2, len(radii) + 1):
        if not (radii[k - 1] >= 2 * radii[k - 2] and 2 * radii[k - 2] >= 2):
            raise RadiiInvalid(f"r_{k} >= 2 r_{k - 1} >= 2 fails")
    exponents = []
    for k, r in enumerate(radii, start=1):
        need = max(sum(exponents), k)
        if k >= 2:
            m = 4 * exponents[-1]
            log2_r = math.log2(r.numerator) - math.log2(r.denominator)
            if m.bit_length() > exponent_bit_budget + 64 or m * log2_r > exponent_bit_budget + 1:
                raise ExponentBudgetExceeded(k, math.ceil(m * log2_r), exponent_bit_budget)
            need = max(need, _ceil_power(r, m))
        if parity and need % 2:
            need += 1
        if need.bit_length() > exponent_bit_budget:
            raise ExponentBudgetExceeded(k, need.bit_length(), exponent_bit_budget)
        exponents.append(need)
    return ParameterSequence(radii, tuple(exponents), parity)


# ---------------------------------------------------------------------------
# Evaluation of h
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductValue:
    """h at a point: the value, the index J of the last factor used, and bounds.

    ``tail_log_bound`` bounds |log| of the stored factors J+1..K that were
    omitted.  ``continuation_bound`` bounds |log| of every factor beyond K for
    any continuation of the sequence satisfying the growth conditions; it is
    only available when |z| <= r_K.
    """

    value: LogComplex
    truncation_index: int
    tail_log_bound: ExtReal
    continuation_bound: ExtReal = None

    @property
    def is_zero(self):
        return self.value.is_zero

    @property
    def log_abs(self):
        return self.value.log_modulus

    def to_complex(self):
        return lc_to_complex(self.value)


def _factor_log_bound(p, r, n, prec=DEFAULT_PREC):
    """``2 (|z|/r)**n``, the bound on |log(1 + (z/r)**n)| when r >= 2|z|."""
    return ExtReal(2.0) * ExtReal.exp(p.log_ratio(r, prec) * ExtReal.from_int(n))


def truncation_index(seq, z, eps):
    """Smallest J such that the stored factors after J may be dropped.

    Every dropped factor has ``r_j >= 2|z|`` and the dropped bounds
    ``2(|z|/r_j)**n_j`` sum to at most ``eps``.  Returns (J, bound).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    p = Point.from_complex(z)
    if p.is_zero:
        return 0, ExtReal.zero()
    j_min = 0
    for j in range(1, seq.K + 1):
        if seq.r(j) ** 2 < 4 * p.modulus_sq:
            j_min = j
    tail = ExtReal.zero()
    J = seq.K
    for j in range(seq.K, j_min, -1):
        candidate = tail + _factor_log_bound(p, seq.r(j), seq.n(j))
        if candidate > eps:
            break
        tail, J = candidate, j - 1
    return J, tail


def continuation_bound(seq, z):
    """Bound on |log prod_{j>K}| for any admissible continuation, or None.

    For |z| <= r_K each later factor has r_j >= 2**(j-K) r_K and
    n_j >= n_K, giving sum_m 2 (rho 2**-m)**n_K <= 2**(2 - n_K) rho**n_K
    with rho = |z| / r_K.
    """
    p = Point.from_complex(z)
    r_K, n_K = seq.r(seq.K), seq.n(seq.K)
    if p.modulus_sq > r_K ** 2:
        return None
    if p.is_zero:
        return ExtReal.zero()
    return ExtReal.pow2(2 - n_K) * ExtReal.exp(p.log_ratio(r_K) * ExtReal.from_int(n_K))


def factor(seq, j, p, prec=DEFAULT_PREC):
    """The single factor ``1 + (z/r_j)**n_j`` in log space."""
    base = LogComplex(p.log_ratio(seq.r(j), prec), p.angle)
    return lc_add_one(lc_pow(base, seq.n(j)), prec)


def eval_h(seq, z, eps=1e-15, prec=DEFAULT_PREC):
    """Evaluate h at ``z`` (complex or :class:`Point`) in log space."""
    p = Point.from_complex(z)
    cont = continuation_bound(seq, p)
    if p.is_zero:
        return ProductValue(LogComplex.one(), 0, ExtReal.zero(), cont)
    J, tail = truncation_index(seq, p, eps)
    value = LogComplex.one()
    for j in range(1, J + 1):
        f = factor(seq, j, p, prec)
        if f.is_zero:
            return ProductValue(LogComplex.zero(), J, tail, cont)
        value = lc_mul(value, f)
    return ProductValue(value, J, tail, cont)


def h_complex(seq, z):
    """Double-precision h on an array of points.

    Factors with small exponents are raised directly; a factor with a huge
    exponent is dropped where ``(|z|/r)**n`` is far below double resolution
    and otherwise evaluated in log space.
    """
    z = np.asarray(z, dtype=complex)
    out = np.ones(z.shape, dtype=complex)
    for r, n in zip(seq.radii, seq.exponents):
        rf = float(r)
        if n <= DIRECT_MAX_EXPONENT:
            out = out * (1 + (z / rf) ** n)
            continue
        rho = np.abs(z) / rf
        if n > (1 << 60):
            negligible = rho < 1.0
        else:
            with np.errstate(divide="ignore"):
                negligible = np.log(rho) * float(n) < -60.0
        for idx in zip(*np.nonzero(~negligible)):
            p = Point.from_complex(z[idx])
            w = lc_pow(LogComplex(p.log_ratio(r), p.angle), n)
            out[idx] = out[idx] * lc_to_complex(lc_add_one(w))
    return out


# ---------------------------------------------------------------------------
# Pole rings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PoleRing:
    """The zeros ``r_k exp((2 nu + 1) pi i / n_k)`` of factor k, never materialized."""

    k: int
    radius: Fraction
    n: int

    def point(self, nu):
        nu = int(nu)
        if not 0 <= nu < self.n:
            raise IndexOutOfRange(f"nu={nu} outside 0..{self.n - 1}")
        return Point.polar(self.radius, Angle.pi_multiple(Fraction(2 * nu + 1, self.n)))

    def chord(self, prec=DEFAULT_PREC):
        """Distance between adjacent ring points, ``2 r_k sin(pi / n_k)``."""
        with mpmath.workprec(prec):
            return ExtReal.from_mpf(2 * _mpf_frac(self.radius) * mpmath.sinpi(mpmath.mpf(1) / self.n))

    def lower_index(self, z):
        """Index of the ring point at or clockwise of arg z (mod n)."""
        p = Point.from_complex(z)
        q = p.angle.exact
        if q is not None:
            t = (self.n * q - 1) / 2
            return math.floor(t) % self.n
        bits = self.n.bit_length() + 64
        with mpmath.workprec(bits + 16):
            theta = p.angle.approx(bits)
            t = (self.n * theta / mpmath.pi - 1) / 2
            return int(mpmath.floor(t)) % self.n

    def nearest_pair(self, z):
        """(a, b, chord): the ring points bracketing arg z, a counter-clockwise of b."""
        if Point.from_complex(z).is_zero:
            raise ValueError("nearest pole pair is undefined at z = 0")
        nu_b = self.lower_index(z)
        nu_a = (nu_b + 1) % self.n
        return self.point(nu_a), self.point(nu_b), self.chord()

    def nearest_index(self, z):
        p = Point.from_complex(z)
        a_nu = (self.lower_index(p) + 1) % self.n
        b_nu = self.lower_index(p)
        za = self.point(a_nu).to_complex()
        zb = self.point(b_nu).to_complex()
        zc = p.to_complex()
        return a_nu if abs(zc - za) < abs(zc - zb) else b_nu


def pole_ring(seq, k):
    if not 1 <= k <= seq.K:
        raise IndexOutOfRange(f"k={k} outside 1..{seq.K}")
    return PoleRing(k, seq.r(k), seq.n(k))


def pole_point(seq, k, nu):
    return pole_ring(seq, k).point(nu)


def nearest_pole_pair(seq, k, z):
    return pole_ring(seq, k).nearest_pair(z)


def pole_residual(seq, k, nu, prec=DEFAULT_PREC, exact_angles=True):
    """``|1 + (p/r_k)**n_k|`` at the ring point ``p`` with index ``nu``.

    With ``exact_angles=False`` the ring angle is first rounded to an mpf
    carrying ``prec + bit_length(n_k)`` absolute bits, so the big-integer
    reduction runs on a numerical angle.
    """
    ring = pole_ring(seq, k)
    p = ring.point(nu)
    angle = p.angle
    if not exact_angles:
        bits = prec + ring.n.bit_length() + 8
        with mpmath.workprec(bits + 16):
            theta = angle.approx(bits)
        angle = Angle.lazy(lambda _b: theta, bits=bits)
    base = LogComplex(p.log_ratio(ring.radius, prec), angle)
    w = lc_pow(base, ring.n)
    with mpmath.workprec(prec + 24):
        s = 1 + mpmath.exp(w.log_modulus.to_mpf()) * w.argument.unit(prec + 24)
        return abs(s)


# ---------------------------------------------------------------------------
# Growth certificate
# ---------------------------------------------------------------------------


def growth_rhs(seq, k):
    """``3 n_{k-1} ln r_k`` rounded upward; defined for k >= 3."""
    if k < 3:
        raise IndexTooSmall(f"the growth bound holds for k >= 3, got k={k}")
    if k > seq.K:
        raise IndexOutOfRange(f"k={k} outside 1..{seq.K}")
    n_prev = seq.n(k - 1)
    with mpmath.workprec(n_prev.bit_length() + 96):
        v = 3 * mpmath.mpf(n_prev) * mpmath.log(_mpf_frac(seq.r(k)))
    out = ExtReal.from_mpf(v, rounding="ceil")
    return ExtReal(math.nextafter(out.signed_mantissa(), math.inf), out.exponent)


@dataclass
class GrowthCheck:
    k: int
    samples: int
    passed: bool
    bound: ExtReal
    max_log_h: ExtReal
    worst_margin: ExtReal
    worst_index: int
    log_h: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "k": self.k,
            "samples": self.samples,
            "passed": self.passed,
            "bound": self.bound,
            "max_log_h": self.max_log_h,
            "worst_margin": self.worst_margin,
            "worst_index": self.worst_index,
        }


def growth_sample_point(seq, k, s, samples):
    """Sample s of ``samples`` on |z| = r_k, offset half a step from angle 0."""
    return Point.polar(seq.r(k), Angle.pi_multiple(Fraction(2 * s + 1, samples)))


def growth_check(seq, k, samples, eps=1e-15, prec=DEFAULT_PREC):
    """Check ``log|h(z)| + tail <= 3 n_{k-1} ln r_k`` at sample points of |z| = r_k."""
    if samples < 1:
        raise InvalidSampleCount(f"samples must be >= 1, got {samples}")
    bound = growth_rhs(seq, k)
    logs = []
    worst_margin, worst_index, max_log = None, -1, None
    for s in range(samples):
        pv = eval_h(seq, growth_sample_point(seq, k, s, samples), eps, prec)
        if pv.is_zero:
            logs.append(None)
            continue
        total = pv.log_abs + pv.tail_log_bound
        if pv.continuation_bound is not None:
            total = total + pv.continuation_bound
        logs.append(pv.log_abs)
        margin = bound - total
        if worst_margin is None or margin < worst_margin:
            worst_margin, worst_index = margin, s
        if max_log is None or pv.log_abs > max_log:
            max_log = pv.log_abs
    passed = worst_margin is None or worst_margin >= 0
    return GrowthCheck(k, samples, passed, bound, max_log, worst_margin, worst_index, logs)


def random_pole_indices(n, count, seed):
    """Deterministic ring indices: both ends of the range plus seeded draws."""
    rng = random.Random(seed)
    target = min(count, n)
    picks = {0, n - 1, n // 2, (n - 1) // 3}
    picks = set(sorted(picks)[:target])
    while len(picks) < target:
        picks.add(rng.randrange(n))
    return sorted(picks)
