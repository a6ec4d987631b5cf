"""Adaptive Simpson quadrature for complex-valued integrands on an interval."""

import numpy as np

from .errors import ToleranceUnachievable

MAX_DEPTH = 40


def adaptive_simpson(f, a, b, tol, max_depth=MAX_DEPTH, max_intervals=1 << 21):
    """Integrate ``f`` over [a, b] to absolute error ``tol``.

    ``f`` takes a float array and returns a complex array.  Subintervals are
    refined level by level; a subinterval is accepted when the two-panel and
    one-panel Simpson estimates differ by at most 15 times its share of the
    tolerance, and the Richardson-corrected value is added.  Returns
    ``(value, error_estimate)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a == b:
        return 0j, 0.0
    m = 0.5 * (a + b)
    fa, fm, fb = np.asarray(f(np.array([a, m, b])), dtype=complex)
    lo = np.array([a])
    hi = np.array([b])
    flo = np.array([fa])
    fmid = np.array([fm])
    fhi = np.array([fb])
    whole = (b - a) / 6.0 * (flo + 4.0 * fmid + fhi)
    local_tol = np.array([tol])
    total = 0j
    err = 0.0
    for depth in range(max_depth + 1):
        mid = 0.5 * (lo + hi)
        vals = np.asarray(f(np.concatenate([0.5 * (lo + mid), 0.5 * (mid + hi)])), dtype=complex)
        flm, frm = vals[: lo.size], vals[lo.size:]
        width = hi - lo
        left = width / 12.0 * (flo + 4.0 * flm + fmid)
        right = width / 12.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - whole
        ok = np.abs(delta) <= 15.0 * local_tol
        if not np.all(np.isfinite(delta)):
            raise ToleranceUnachievable("integrand is not finite on the path")
        total += np.sum(left[ok] + right[ok] + delta[ok] / 15.0)
        err += float(np.sum(np.abs(delta[ok]))) / 15.0
        bad = ~ok
        if not bad.any():
            return complex(total), err
        if depth == max_depth or 2 * int(bad.sum()) > max_intervals:
            raise ToleranceUnachievable(
                f"{int(bad.sum())} subintervals unresolved at depth {depth}, tol={tol:g}")
        lo, mid, hi = lo[bad], mid[bad], hi[bad]
        flo, flm, fmid, frm, fhi = flo[bad], flm[bad], fmid[bad], frm[bad], fhi[bad]
        half_tol = 0.5 * local_tol[bad]
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        flo, fmid, fhi = (np.concatenate([flo, fmid]), np.concatenate([flm, frm]),
                          np.concatenate([fmid, fhi]))
        whole = np.concatenate([left[bad], right[bad]])
        local_tol = np.concatenate([half_tol, half_tol])
    raise ToleranceUnachievable("refinement budget exhausted")  # pragma: no cover
