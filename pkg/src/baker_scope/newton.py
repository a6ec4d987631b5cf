"""Newton maps of f = exp(int h) and g = z exp(int (h-1)/t), and their orbits.

Since f'/f = h, the Newton map of f is ``z - 1/h(z)``; for g it is
``z (1 - 1/h(z))``.  Neither needs f or g themselves, which are only
available through :func:`log_f` and :func:`log_g_over_z`.
"""

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernel
from .construction import (
    DIRECT_MAX_EXPONENT,
    ParameterSequence,
    eval_h,
    factor,
    h_complex,
    pole_ring,
)
from .errors import OutsideDomain, PoleHit, RangeOverflow, RangeUnderflow
from .numerics import DEFAULT_PREC, ExtReal, Point, lc_inv, lc_to_complex
from .quadrature import adaptive_simpson


class Classification(str, enum.Enum):
    CONVERGED = "ConvergedToZero"
    ESCAPED = "Escaped"
    POLE_HIT = "PoleHit"
    BUDGET = "BudgetExhausted"


# order matches the integer codes used by the compiled kernel
CLASS_CODES = (Classification.CONVERGED, Classification.ESCAPED,
               Classification.POLE_HIT, Classification.BUDGET)

DEFAULT_CONV_EPS = 1e-12
TRACE_HEAD = 64
TRACE_TAIL = 64


@dataclass(frozen=True)
class NewtonMap:
    """Newton map in ``"f"`` or ``"g"`` mode bound to a parameter sequence.

    Sequences whose exponents are all at most ``DIRECT_MAX_EXPONENT`` iterate
    in compiled double precision; anything larger goes through log-space
    evaluation of h.
    """

    mode: str
    seq: ParameterSequence
    eval_eps: float = 1e-15
    prec: int = DEFAULT_PREC
    require_parity: bool = True

    def __post_init__(self):
        if self.mode not in ("f", "g"):
            raise ValueError(f"mode must be 'f' or 'g', got {self.mode!r}")
        if self.mode == "g" and self.require_parity and not self.seq.parity:
            raise ValueError("g-mode needs a sequence with the even-exponent parity policy")

    @property
    def gmode(self):
        return self.mode == "g"

    @property
    def direct(self):
        return max(self.seq.exponents) <= DIRECT_MAX_EXPONENT

    @cached_property
    def _radii(self):
        return np.array([float(r) for r in self.seq.radii])

    @cached_property
    def _exps(self):
        return np.array(self.seq.exponents if self.direct else [0], dtype=np.int64)

    def default_escape_radius(self):
        return 2.0 * float(self.seq.r(self.seq.K))

    def step(self, z):
        return step(self, z)

    def orbit(self, z0, **kwargs):
        return orbit(self, z0, **kwargs)


def _pole_error(seq, k, z):
    nu = pole_ring(seq, k).nearest_index(z)
    return PoleHit(f"z lies on pole ring P_{k} (nu={nu})", k=k, nu=nu)


def _vanishing_factor(nmap, p):
    for j in range(1, nmap.seq.K + 1):
        if factor(nmap.seq, j, p, nmap.prec).is_zero:
            return j
    return None


def step(nmap, z):
    """``N(z)`` as a complex double; raises PoleHit on a pole of N."""
    if nmap.direct:
        zc = complex(z)
        nr, ni, pk = _kernel.newton_step(zc.real, zc.imag, nmap._radii, nmap._exps, nmap.gmode)
        if pk > 0:
            raise _pole_error(nmap.seq, pk, zc)
        return complex(nr, ni)
    p = Point.from_complex(z)
    pv = eval_h(nmap.seq, p, nmap.eval_eps, nmap.prec)
    if pv.is_zero:
        raise _pole_error(nmap.seq, _vanishing_factor(nmap, p), p)
    zc = p.to_complex()
    try:
        q = lc_to_complex(lc_inv(pv.value))
    except RangeUnderflow:
        return zc
    except RangeOverflow as exc:
        raise RangeOverflow(f"N(z) is not representable: 1/h = exp({exc.log_modulus})",
                            exc.log_modulus) from exc
    return zc * (1 - q) if nmap.gmode else zc - q


def fixed_point_residual(nmap, z):
    """``|N(z) - z|`` as an ExtReal: 1/|h(z)| in f-mode, |z|/|h(z)| in g-mode."""
    p = Point.from_complex(z)
    pv = eval_h(nmap.seq, p, nmap.eval_eps, nmap.prec)
    if pv.is_zero:
        raise _pole_error(nmap.seq, _vanishing_factor(nmap, p), p)
    res = ExtReal.exp(-pv.log_abs)
    if nmap.gmode:
        if p.is_zero:
            return ExtReal.zero()
        res = res * ExtReal.exp(p.log_ratio(1))
    return res


@dataclass
class OrbitRecord:
    seed: complex
    iterates: list
    classification: Classification
    steps: int
    final: complex
    escape_radius: float
    pole: tuple = None
    truncated: bool = False

    def moduli(self):
        return [abs(z) for z in self.iterates]


def _assemble_trace(head, tail, total):
    if total <= len(head) + len(tail):
        n_head = min(total, len(head))
        out = list(head[:n_head])
        start = n_head
        for idx in range(start, total):
            out.append(tail[idx % len(tail)])
        return out, False
    n_tail = len(tail)
    ordered = [tail[idx % n_tail] for idx in range(total - n_tail, total)]
    return list(head) + ordered, True


def orbit(nmap, z0, max_iter=1000, escape_radius=None, conv_eps=DEFAULT_CONV_EPS,
          trace_head=TRACE_HEAD, trace_tail=TRACE_TAIL):
    """Iterate N from ``z0`` until convergence (g-mode), escape, a pole or the budget.

    The trace keeps the first ``trace_head`` and last ``trace_tail`` points.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if escape_radius is None:
        escape_radius = nmap.default_escape_radius()
    seed = complex(z0)
    if nmap.direct:
        head_re, head_im = np.empty(trace_head), np.empty(trace_head)
        tail_re, tail_im = np.empty(trace_tail), np.empty(trace_tail)
        code, n, fr, fi, pk = _kernel.run_orbit(
            seed.real, seed.imag, nmap._radii, nmap._exps, nmap.gmode, int(max_iter),
            float(escape_radius), float(conv_eps), head_re, head_im, tail_re, tail_im)
        head = [complex(a, b) for a, b in zip(head_re, head_im)]
        tail = [complex(a, b) for a, b in zip(tail_re, tail_im)]
        iterates, truncated = _assemble_trace(head, tail, n + 1)
        cls = CLASS_CODES[code]
        final = complex(fr, fi)
        pole = None
        if cls is Classification.POLE_HIT:
            pole = (pk, pole_ring(nmap.seq, pk).nearest_index(final))
        return OrbitRecord(seed, iterates, cls, n, final, escape_radius, pole, truncated)
    return _orbit_logspace(nmap, z0, max_iter, escape_radius, conv_eps, trace_head, trace_tail)


def _orbit_logspace(nmap, z0, max_iter, escape_radius, conv_eps, trace_head, trace_tail):
    head = []
    tail = deque(maxlen=trace_tail)
    z = z0
    n = 0
    pole = None
    while True:
        zc = complex(z)
        if len(head) < trace_head:
            head.append(zc)
        else:
            tail.append(zc)
        m = abs(Point.from_complex(z)) if isinstance(z, Point) else abs(zc)
        if nmap.gmode and m < conv_eps:
            cls = Classification.CONVERGED
            break
        if m > escape_radius:
            cls = Classification.ESCAPED
            break
        if n >= max_iter:
            cls = Classification.BUDGET
            break
        try:
            z = step(nmap, z)
        except PoleHit as exc:
            cls = Classification.POLE_HIT
            pole = (exc.k, exc.nu)
            break
        except RangeOverflow:
            cls = Classification.ESCAPED
            break
        n += 1
    truncated = n + 1 > trace_head + trace_tail
    return OrbitRecord(complex(z0), head + list(tail), cls, n, complex(z), escape_radius,
                       pole, truncated)


# ---------------------------------------------------------------------------
# log f and log(g/z) by quadrature
# ---------------------------------------------------------------------------


def _check_domain(seq, z):
    r_K = float(seq.r(seq.K))
    if abs(z) > r_K:
        raise OutsideDomain(f"|z| = {abs(z):g} exceeds r_K = {r_K:g}")


def log_f(seq, z, tol=1e-10):
    """``int_0^z h(t) dt`` along the segment [0, z]."""
    z = complex(z)
    _check_domain(seq, z)
    if z == 0:
        return 0j
    value, _ = adaptive_simpson(lambda s: z * h_complex(seq, s * z), 0.0, 1.0, tol)
    return value


# the integrand switches to its leading Taylor term inside |t| < SMALL_T * r_1
SMALL_T = 1e-3


def _g_integrand(seq, z):
    n_min = min(seq.exponents)
    lead = [r for r, n in zip(seq.radii, seq.exponents) if n == n_min]
    cut = SMALL_T * float(seq.r(1)) / abs(z)

    def f(s):
        s = np.asarray(s, dtype=float)
        t = s * z
        out = np.empty(s.shape, dtype=complex)
        small = s < cut
        big = ~small
        if big.any():
            out[big] = z * (h_complex(seq, t[big]) - 1) / t[big]
        if small.any():
            ts = t[small]
            acc = np.zeros(ts.shape, dtype=complex)
            for r in lead:
                acc += (ts / float(r)) ** (n_min - 1) / float(r)
            out[small] = z * acc
        return out

    return f


def log_g_over_z(seq, z, tol=1e-10):
    """``int_0^z (h(t) - 1)/t dt``, i.e. log(g(z)/z), along [0, z]."""
    z = complex(z)
    _check_domain(seq, z)
    if z == 0:
        return 0j
    value, _ = adaptive_simpson(_g_integrand(seq, z), 0.0, 1.0, tol)
    return value


# ---------------------------------------------------------------------------
# Real-axis descent in g-mode
# ---------------------------------------------------------------------------


@dataclass
class DescentReport:
    passed: bool
    worst_ratio: float
    worst_x: float
    parity: bool
    ratios: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def to_dict(self):
        return {
            "passed": self.passed,
            "worst_ratio": self.worst_ratio,
            "worst_x": self.worst_x,
            "parity": self.parity,
            "samples": len(self.ratios) + len(self.skipped),
            "skipped": list(self.skipped),
            "failures": list(self.failures),
        }


def _descends_logspace(nmap, x):
    """Decide |N_g(x)| < |x| when 1/h(x) is below double resolution.

    Then N_g(x) rounds to x, yet |1 - 1/h| < 1 exactly when h(x) is a
    positive real above 1/2, which log-space evaluation decides exactly.
    """
    pv = eval_h(nmap.seq, Point.from_complex(x), nmap.eval_eps, nmap.prec)
    if pv.is_zero:
        return False
    arg = pv.value.argument.exact
    return arg is not None and arg % 2 == 0 and pv.log_abs > ExtReal(-math.log(2.0))


def real_descent_check(nmap, samples):
    """Check ``|N_g(x)| < |x|`` for every nonzero real sample."""
    if not nmap.gmode:
        raise ValueError("the descent check applies to g-mode maps")
    parity = all(n % 2 == 0 for n in nmap.seq.exponents)
    ratios, skipped, failures = {}, [], []
    worst, worst_x = -math.inf, math.nan
    for x in samples:
        x = float(x)
        if x == 0.0:
            skipped.append(x)
            continue
        try:
            nx = step(nmap, x)
        except PoleHit:
            failures.append(x)
            continue
        ratio = abs(nx) / abs(x)
        ratios[x] = ratio
        if ratio >= 1.0 and not _descends_logspace(nmap, x):
            failures.append(x)
        if ratio > worst:
            worst, worst_x = ratio, x
    return DescentReport(not failures, worst, worst_x, parity, ratios, skipped, failures)


# ---------------------------------------------------------------------------
# Quadrature consistency: (log f)' = h and (log g/z)' = (h - 1)/z
# ---------------------------------------------------------------------------


def _fd4(F, z, d):
    return (F(z - 2 * d) - 8 * F(z - d) + 8 * F(z + d) - F(z + 2 * d)) / (12 * d)


@dataclass
class QuadratureReport:
    passed: bool
    points: int
    worst_f: float
    worst_g: float
    rel_tol: float
    failures: list = field(default_factory=list)

    def to_dict(self):
        return {
            "passed": self.passed,
            "points": self.points,
            "worst_rel_err_log_f": self.worst_f,
            "worst_rel_err_log_g": self.worst_g,
            "rel_tol": self.rel_tol,
            "failures": [[z.real, z.imag] for z in self.failures],
        }


def consistency_points(seq, count, seed, radius=None):
    """Seeded points in |z| <= radius away from the zeros of h and of (h - 1)/z.

    The default radius is 0.9 r_2, inside the ring where the second factor
    is still of moderate size.
    """
    if radius is None:
        radius = 0.9 * float(seq.r(2)) if seq.K >= 2 else float(seq.r(1))
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        rho, a = radius * math.sqrt(rng.random()), 2 * math.pi * rng.random()
        z = complex(rho * math.cos(a), rho * math.sin(a))
        hz = complex(h_complex(seq, np.array([z]))[0])
        if abs(z) < 0.1 or abs(hz) < 0.1 or abs(hz - 1) / abs(z) < 0.1:
            continue
        out.append(z)
    return out


def quadrature_consistency(seq, points, tol=1e-12, rel_tol=1e-6, step_size=1e-3):
    """Fourth-order central differences of log_f and log_g_over_z against h."""
    worst_f = worst_g = 0.0
    failures = []
    for z in points:
        z = complex(z)
        hz = complex(h_complex(seq, np.array([z]))[0])
        df = _fd4(lambda w: log_f(seq, w, tol), z, step_size)
        dg = _fd4(lambda w: log_g_over_z(seq, w, tol), z, step_size)
        ef = abs(df - hz) / abs(hz)
        eg = abs(dg - (hz - 1) / z) / abs((hz - 1) / z)
        worst_f, worst_g = max(worst_f, ef), max(worst_g, eg)
        if not (ef <= rel_tol and eg <= rel_tol):
            failures.append(z)
    return QuadratureReport(not failures, len(points), worst_f, worst_g, rel_tol, failures)
