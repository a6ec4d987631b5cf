"""Extended-range reals and log-space complex arithmetic.

Values such as ``(z / r)**n`` with ``n = 2**2048`` are far outside the double
range, so they are carried as a pair (log-modulus, argument).  Log-moduli are
:class:`ExtReal` numbers (a 53-bit mantissa with an unbounded binary
exponent); arguments are :class:`Angle` objects that can be re-evaluated at
whatever precision a big-integer multiple of them requires.
"""

import math
from fractions import Fraction
from functools import total_ordering

import mpmath
from mpmath import mpf, mpc

from .errors import DomainError, InsufficientPrecision, RangeOverflow, RangeUnderflow

DEFAULT_PREC = 256

_LN2 = math.log(2.0)
_DOUBLE_LOG_MAX = 709.782712893384
_DOUBLE_LOG_MIN = -745.1332191019411


def _mpf_frac(q):
    """Convert a Fraction (or int) to an mpf at the current working precision."""
    q = Fraction(q)
    if q.denominator == 1:
        return mpf(q.numerator)
    return mpf(q.numerator) / q.denominator


def _mag(x):
    """Upper bound on log2|x|, 0 for zero."""
    return 0 if not x else int(mpmath.mag(x))


# ---------------------------------------------------------------------------
# ExtReal
# ---------------------------------------------------------------------------


@total_ordering
class ExtReal:
    """Real number ``sign * mantissa * 2**exponent`` with ``mantissa`` in [1, 2).

    The exponent is a Python int, so magnitudes like ``2**(2**2048)`` are
    representable.  Zero is stored as mantissa 0, exponent 0, sign +1.
    Products and quotients of powers of two are exact.
    """

    __slots__ = ("sign", "mantissa", "exponent")

    def __init__(self, x=0.0, exponent=0):
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"ExtReal needs a finite value, got {x!r}")
        if x == 0.0:
            sign, m, e = 1, 0.0, 0
        else:
            f, e2 = math.frexp(abs(x))
            sign = -1 if x < 0 else 1
            m = f * 2.0
            e = e2 - 1 + int(exponent)
        object.__setattr__(self, "sign", sign)
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "exponent", e)

    def __setattr__(self, name, value):
        raise AttributeError("ExtReal is immutable")

    # -- construction ------------------------------------------------------

    @classmethod
    def zero(cls):
        return cls(0.0)

    @classmethod
    def one(cls):
        return cls(1.0)

    @classmethod
    def from_int(cls, n):
        n = int(n)
        if abs(n) < (1 << 1000):
            return cls(float(n))
        return cls.from_mpf(mpf(n))

    @classmethod
    def from_fraction(cls, q, rounding="nearest"):
        q = Fraction(q)
        if q.denominator == 1:
            return cls.from_int(q.numerator)
        with mpmath.workprec(80):
            return cls.from_mpf(_mpf_frac(q), rounding=rounding)

    @classmethod
    def from_value(cls, x):
        if isinstance(x, ExtReal):
            return x
        if isinstance(x, int):
            return cls.from_int(x)
        if isinstance(x, Fraction):
            return cls.from_fraction(x)
        if isinstance(x, mpf):
            return cls.from_mpf(x)
        return cls(float(x))

    @classmethod
    def from_mpf(cls, x, rounding="nearest"):
        """Round an mpf to 53 bits; ``rounding`` is "nearest", "ceil" or "floor"."""
        x = mpf(x) if not isinstance(x, mpf) else x
        if not mpmath.isfinite(x):
            raise ValueError(f"ExtReal needs a finite value, got {x}")
        neg, man, exp, bc = x._mpf_
        if man == 0:
            return cls(0.0)
        man = int(man)
        if bc > 53:
            shift = bc - 53
            top = man >> shift
            rest = man & ((1 << shift) - 1)
            if rest:
                if rounding == "nearest":
                    half = 1 << (shift - 1)
                    if rest > half or (rest == half and top & 1):
                        top += 1
                elif (rounding == "ceil") != bool(neg):
                    top += 1
            man, exp = top, exp + shift
        value = float(man)
        return cls(-value if neg else value, exp)

    @classmethod
    def exp(cls, x):
        """``e**x`` for an ExtReal, float, int or mpf argument."""
        if isinstance(x, ExtReal):
            x = x.to_mpf()
        x = mpf(x) if not isinstance(x, mpf) else x
        with mpmath.workprec(max(0, _mag(x)) + 80):
            y = x / mpmath.ln2
            whole = int(mpmath.floor(y))
            frac = float(y - whole)
        return cls(2.0 ** frac, whole)

    @classmethod
    def pow2(cls, k):
        return cls(1.0, int(k))

    @classmethod
    def from_json(cls, obj):
        return cls(obj["m"], int(obj["e2"]))

    # -- conversion --------------------------------------------------------

    def is_zero(self):
        return self.mantissa == 0.0

    def signed_mantissa(self):
        return self.sign * self.mantissa

    def to_mpf(self):
        if self.mantissa == 0.0:
            return mpf(0)
        man = int(self.mantissa * (1 << 52)) * self.sign
        return mpf((man, self.exponent - 52))

    def to_float(self):
        if self.mantissa == 0.0:
            return 0.0
        if self.exponent > 1023:
            raise RangeOverflow(f"2**{self.exponent} exceeds double range", self)
        if self.exponent < -1074:
            raise RangeUnderflow(f"2**{self.exponent} below double range", self)
        return math.ldexp(self.sign * self.mantissa, self.exponent)

    __float__ = to_float

    def log(self):
        """Natural logarithm as an ExtReal; the value must be positive."""
        if self.sign < 0 or self.mantissa == 0.0:
            raise DomainError("log of non-positive ExtReal")
        if abs(self.exponent) < (1 << 40):
            return ExtReal(math.log(self.mantissa) + self.exponent * _LN2)
        with mpmath.workprec(self.exponent.bit_length() + 64):
            return ExtReal.from_mpf(mpmath.log(self.mantissa) + self.exponent * mpmath.ln2)

    def log2(self):
        """Base-2 logarithm as a float (approximate for huge exponents)."""
        if self.sign < 0 or self.mantissa == 0.0:
            raise DomainError("log2 of non-positive ExtReal")
        return math.log2(self.mantissa) + float(self.exponent)

    def approx(self, digits=7):
        """Decimal scientific string, e.g. ``'1.234568e+508'``."""
        if self.mantissa == 0.0:
            return "0"
        if abs(self.exponent) < 1000:
            return f"{self.sign * self.mantissa * 2.0 ** self.exponent:.{digits - 1}e}"
        with mpmath.workprec(self.exponent.bit_length() + 64):
            t = mpmath.log10(self.mantissa) + self.exponent * mpmath.log10(2)
            e10 = int(mpmath.floor(t))
            m10 = float(mpmath.power(10, t - e10))
        if m10 >= 10.0 - 0.5 * 10.0 ** (1 - digits):
            m10, e10 = m10 / 10.0, e10 + 1
        sign = "-" if self.sign < 0 else ""
        return f"{sign}{m10:.{digits - 1}f}e{e10:+d}"

    def to_json(self):
        return {"m": self.signed_mantissa(), "e2": self.exponent, "approx": self.approx()}

    # -- arithmetic --------------------------------------------------------

    def __neg__(self):
        return ExtReal(-self.signed_mantissa(), self.exponent)

    def __abs__(self):
        return ExtReal(self.mantissa, self.exponent)

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.mantissa == 0.0:
            return other
        if other.mantissa == 0.0:
            return self
        a, b = (self, other) if self.exponent >= other.exponent else (other, self)
        d = a.exponent - b.exponent
        if d > 60:
            return a
        s = a.signed_mantissa() + math.ldexp(b.signed_mantissa(), -d)
        return ExtReal(s, a.exponent)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.mantissa == 0.0 or other.mantissa == 0.0:
            return ExtReal(0.0)
        return ExtReal(self.signed_mantissa() * other.signed_mantissa(),
                       self.exponent + other.exponent)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other.mantissa == 0.0:
            raise ZeroDivisionError("ExtReal division by zero")
        if self.mantissa == 0.0:
            return ExtReal(0.0)
        return ExtReal(self.signed_mantissa() / other.signed_mantissa(),
                       self.exponent - other.exponent)

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    # -- comparison --------------------------------------------------------

    def _key(self):
        if self.mantissa == 0.0:
            return (0, 0, 0.0)
        if self.sign > 0:
            return (1, self.exponent, self.mantissa)
        return (-1, -self.exponent, -self.mantissa)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return (self.sign, self.mantissa, self.exponent) == (
            other.sign, other.mantissa, other.exponent)

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._key() < other._key()

    def __hash__(self):
        return hash((self.sign, self.mantissa, self.exponent))

    def __repr__(self):
        return f"ExtReal({self.signed_mantissa()!r}, {self.exponent})"

    def __str__(self):
        return self.approx()


def _coerce(x):
    if isinstance(x, ExtReal):
        return x
    if isinstance(x, (int, float, Fraction, mpf)):
        return ExtReal.from_value(x)
    return NotImplemented


# ---------------------------------------------------------------------------
# Angles
# ---------------------------------------------------------------------------


def _wrap(x, bits):
    """Reduce an mpf into (-pi, pi] keeping ``bits`` absolute bits."""
    wp = max(0, _mag(x)) + bits + 24
    with mpmath.workprec(wp):
        tau = 2 * mpmath.pi
        k = mpmath.nint(x / tau)
        r = x - k * tau
        if r > mpmath.pi:
            r -= tau
        if r <= -mpmath.pi + mpmath.ldexp(1, -(bits - 4)):
            r += tau
        return +r


def _normalize_pi_fraction(q):
    q = Fraction(q)
    q -= 2 * math.floor((q + 1) / 2)
    return Fraction(1) if q == -1 else q


class Angle:
    """High-precision real in (-pi, pi].

    Three kinds share one interface:

    * exact rational multiples of pi (``Angle.pi_multiple``), reduced exactly;
    * lazily computable angles (``Angle.atan2`` of exact coordinates, sums and
      big-integer multiples of those) that can be produced at any precision;
    * fixed values (``Angle.from_mpf``) known to a limited number of bits.

    ``abs_bits`` is the absolute accuracy available (``None``: unlimited).
    """

    __slots__ = ("_pi", "_fn", "_bits", "_cache")

    def __init__(self, pi_fraction=None, fn=None, bits=None):
        if (pi_fraction is None) == (fn is None):
            raise ValueError("Angle needs exactly one of pi_fraction or fn")
        self._pi = None if pi_fraction is None else _normalize_pi_fraction(pi_fraction)
        self._fn = fn
        self._bits = bits
        self._cache = {}

    @classmethod
    def pi_multiple(cls, q):
        return cls(pi_fraction=Fraction(q))

    @classmethod
    def zero(cls):
        return cls(pi_fraction=Fraction(0))

    @classmethod
    def from_mpf(cls, x, prec=DEFAULT_PREC):
        """Fixed angle from an mpf carrying ``prec`` significant bits."""
        x = mpf(x)
        if x == 0:
            return cls.zero()
        bits = prec - _mag(x)
        value = _wrap(x, max(bits, prec))
        return cls(fn=lambda _bits: value, bits=bits)

    @classmethod
    def from_float(cls, x):
        return cls.from_mpf(mpf(float(x)), 53)

    @classmethod
    def lazy(cls, fn, bits=None):
        return cls(fn=fn, bits=bits)

    @classmethod
    def atan2(cls, y, x):
        """Argument of ``x + iy`` for exact rational coordinates."""
        y, x = Fraction(y), Fraction(x)
        if y == 0:
            return cls.pi_multiple(0 if x >= 0 else 1)
        if x == 0:
            return cls.pi_multiple(Fraction(1, 2) if y > 0 else Fraction(-1, 2))

        def fn(bits):
            with mpmath.workprec(bits + 16):
                return mpmath.atan2(_mpf_frac(y), _mpf_frac(x))

        return cls(fn=fn)

    @property
    def exact(self):
        """The rational q with angle = q*pi, or None."""
        return self._pi

    @property
    def abs_bits(self):
        return self._bits

    def approx(self, bits=DEFAULT_PREC):
        """mpf within ``2**-bits`` of the angle (best available for fixed angles)."""
        cached = self._cache.get(bits)
        if cached is not None:
            return cached
        if self._pi is not None:
            with mpmath.workprec(bits + 16):
                value = mpmath.pi * _mpf_frac(self._pi)
        else:
            value = self._fn(bits)
        self._cache[bits] = value
        return value

    @property
    def value(self):
        return self.approx(DEFAULT_PREC)

    def unit(self, prec):
        """``exp(i*angle)`` as an mpc at ``prec`` bits."""
        with mpmath.workprec(prec):
            if self._pi is not None:
                q = _mpf_frac(self._pi)
                return mpc(mpmath.cospi(q), mpmath.sinpi(q))
            return mpmath.expj(self.approx(prec))

    def __add__(self, other):
        if not isinstance(other, Angle):
            return NotImplemented
        if self._pi is not None and other._pi is not None:
            return Angle.pi_multiple(self._pi + other._pi)
        a, b = self, other

        def fn(bits):
            with mpmath.workprec(bits + 16):
                s = a.approx(bits + 4) + b.approx(bits + 4)
            return _wrap(s, bits)

        return Angle(fn=fn, bits=_min_bits(a._bits, b._bits))

    def __neg__(self):
        if self._pi is not None:
            return Angle.pi_multiple(-self._pi)
        a = self

        def fn(bits):
            return _wrap(-a.approx(bits), bits)

        return Angle(fn=fn, bits=self._bits)

    def __sub__(self, other):
        if not isinstance(other, Angle):
            return NotImplemented
        return self + (-other)

    def __float__(self):
        return float(self.approx(64))

    def __repr__(self):
        if self._pi is not None:
            return f"Angle(pi*{self._pi})"
        return f"Angle({mpmath.nstr(self.approx(64), 17)})"


def _min_bits(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def reduce_angle(theta, n, prec=DEFAULT_PREC, theta_prec=None):
    """``n * theta`` reduced to (-pi, pi].

    ``theta`` is an :class:`Angle`, or a number taken as exact with
    ``theta_prec`` significant bits (default ``prec``).  Raises
    InsufficientPrecision when theta's absolute accuracy is below
    ``bit_length(n) + 64`` bits, the amount needed for a 2**-64 result.
    """
    n = int(n)
    if n < 0:
        raise DomainError("reduce_angle expects a non-negative multiplier")
    if not isinstance(theta, Angle):
        theta = Angle.from_mpf(mpf(theta), theta_prec or prec)
    if theta.exact is not None:
        return Angle.pi_multiple(theta.exact * n)
    nb = n.bit_length()
    cap = theta.abs_bits
    if cap is not None and cap < nb + 64:
        raise InsufficientPrecision(
            f"angle carries {cap} bits, reduction by a {nb}-bit multiplier needs {nb + 64}")

    def fn(bits):
        t = theta.approx(bits + nb + 8)
        with mpmath.workprec(int(t._mpf_[3]) + nb + 8):
            x = t * n
        return _wrap(x, bits)

    return Angle(fn=fn, bits=None if cap is None else cap - nb)


# ---------------------------------------------------------------------------
# Exact points
# ---------------------------------------------------------------------------


class Point:
    """Complex point with exact squared modulus and a recomputable argument.

    Points on a circle ``|z| = r`` with rational ``r`` keep their modulus
    exactly, which matters once the point is raised to a power like
    ``2**2048``.  Plain complex doubles convert exactly (they are dyadic).
    """

    __slots__ = ("modulus_sq", "angle")

    def __init__(self, modulus_sq, angle):
        self.modulus_sq = Fraction(modulus_sq)
        if self.modulus_sq < 0:
            raise ValueError("squared modulus must be non-negative")
        self.angle = angle if self.modulus_sq != 0 else Angle.zero()

    @classmethod
    def from_complex(cls, z):
        if isinstance(z, Point):
            return z
        z = complex(z)
        x, y = Fraction(z.real), Fraction(z.imag)
        return cls(x * x + y * y, Angle.atan2(y, x))

    @classmethod
    def polar(cls, modulus, angle):
        modulus = Fraction(modulus)
        if not isinstance(angle, Angle):
            angle = Angle.pi_multiple(angle)
        return cls(modulus * modulus, angle)

    @property
    def is_zero(self):
        return self.modulus_sq == 0

    def __abs__(self):
        return math.sqrt(self.modulus_sq)

    def log_ratio(self, r, prec=DEFAULT_PREC):
        """``ln(|z| / r)`` as an ExtReal with full relative accuracy."""
        q = self.modulus_sq / (Fraction(r) ** 2)
        if q == 1:
            return ExtReal.zero()
        with mpmath.workprec(prec + 32):
            return ExtReal.from_mpf(mpmath.log1p(_mpf_frac(q - 1)) / 2)

    def to_mpc(self, prec=DEFAULT_PREC):
        with mpmath.workprec(prec + 16):
            modulus = mpmath.sqrt(_mpf_frac(self.modulus_sq))
            u = self.angle.unit(prec + 16)
            return modulus * u

    def to_complex(self):
        if self.modulus_sq == 0:
            return 0j
        return complex(self.to_mpc(64))

    __complex__ = to_complex

    def __repr__(self):
        return f"Point(|z|^2={self.modulus_sq}, arg={self.angle!r})"


# ---------------------------------------------------------------------------
# LogComplex
# ---------------------------------------------------------------------------


class LogComplex:
    """``exp(log_modulus) * exp(i*argument)``, or exactly zero."""

    __slots__ = ("log_modulus", "argument", "is_zero")

    def __init__(self, log_modulus, argument, is_zero=False):
        if is_zero:
            log_modulus, argument = ExtReal.zero(), Angle.zero()
        self.log_modulus = ExtReal.from_value(log_modulus)
        self.argument = argument if isinstance(argument, Angle) else Angle.from_mpf(mpf(argument))
        self.is_zero = bool(is_zero)

    @classmethod
    def zero(cls):
        return cls(ExtReal.zero(), Angle.zero(), is_zero=True)

    @classmethod
    def one(cls):
        return cls(ExtReal.zero(), Angle.zero())

    @classmethod
    def from_complex(cls, z):
        z = complex(z)
        if z == 0:
            return cls.zero()
        return cls.from_point(Point.from_complex(z))

    @classmethod
    def from_point(cls, p, prec=DEFAULT_PREC):
        if p.is_zero:
            return cls.zero()
        return cls(p.log_ratio(1, prec), p.angle)

    def __repr__(self):
        if self.is_zero:
            return "LogComplex(0)"
        return f"LogComplex(log|.|={self.log_modulus.approx()}, arg={self.argument!r})"


def lc_mul(a, b):
    """Product in log space; zero absorbs."""
    if a.is_zero or b.is_zero:
        return LogComplex.zero()
    return LogComplex(a.log_modulus + b.log_modulus, a.argument + b.argument)


def lc_inv(a):
    if a.is_zero:
        raise ZeroDivisionError("inverse of zero LogComplex")
    return LogComplex(-a.log_modulus, -a.argument)


def lc_pow(a, n):
    """``a**n`` for a non-negative (big) integer ``n``."""
    n = int(n)
    if n < 0:
        raise DomainError("lc_pow expects a non-negative exponent")
    if a.is_zero:
        if n == 0:
            raise DomainError("0**0 is undefined")
        return LogComplex.zero()
    if n == 0:
        return LogComplex.one()
    return LogComplex(a.log_modulus * ExtReal.from_int(n), reduce_angle(a.argument, n))


def lc_add_one(w, prec=DEFAULT_PREC):
    """``1 + w`` in log space.

    |w| <= 1/2 uses log1p directly, |w| >= 2 factors out w, and the band in
    between adds in complex arithmetic.  A sum below ``2**-(prec-16)`` in
    modulus is returned as exact zero.
    """
    if w.is_zero:
        return LogComplex.one()
    lm = w.log_modulus
    wp = prec + 24
    negligible = (prec + 16) * _LN2
    if lm <= -_LN2:
        if lm < -negligible:
            return LogComplex.one()
        with mpmath.workprec(wp):
            value = mpmath.exp(lm.to_mpf()) * w.argument.unit(wp)
            lg = mpmath.log1p(value)
            return LogComplex(ExtReal.from_mpf(lg.real), Angle.from_mpf(lg.imag, prec))
    if lm >= _LN2:
        if lm > negligible:
            return w
        with mpmath.workprec(wp):
            inv = mpmath.exp(-lm.to_mpf()) * mpmath.conj(w.argument.unit(wp))
            lg = mpmath.log1p(inv)
            return LogComplex(lm + ExtReal.from_mpf(lg.real),
                              w.argument + Angle.from_mpf(lg.imag, prec))
    with mpmath.workprec(wp):
        s = 1 + mpmath.exp(lm.to_mpf()) * w.argument.unit(wp)
        mod = abs(s)
        if mod < mpmath.ldexp(1, -(prec - 16)):
            return LogComplex.zero()
        return LogComplex(ExtReal.from_mpf(mpmath.log(mod)),
                          Angle.from_mpf(mpmath.arg(s), prec))


def lc_to_complex(a):
    """Convert to a Python complex; raises RangeOverflow / RangeUnderflow."""
    if a.is_zero:
        return 0j
    lm = a.log_modulus
    if lm > _DOUBLE_LOG_MAX:
        raise RangeOverflow(f"|value| = exp({lm.approx()}) overflows double", lm)
    if lm < _DOUBLE_LOG_MIN:
        raise RangeUnderflow(f"|value| = exp({lm.approx()}) underflows double", lm)
    with mpmath.workprec(80):
        v = mpmath.exp(lm.to_mpf()) * a.argument.unit(80)
    return complex(v)
