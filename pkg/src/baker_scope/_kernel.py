"""Compiled double-precision Newton iteration for sequences with small exponents.

One core routine serves both single orbits and the renderer, so a pixel and
a direct orbit from its sample point go through identical arithmetic.
"""

import math

import numpy as np
from numba import njit

CONVERGED = 0
ESCAPED = 1
POLE_HIT = 2
BUDGET = 3

# |1 + w| below 2**-37 (double precision minus 16 bits) counts as a pole
POLE_TOL2 = 2.0 ** -74


@njit(cache=True, nogil=True)
def newton_step(zr, zi, radii, exps, gmode):
    """One Newton step. Returns (re, im, k) with k > 0 the vanishing factor index."""
    hr = 1.0
    hi = 0.0
    for j in range(radii.shape[0]):
        wr = zr / radii[j]
        wi = zi / radii[j]
        pr = 1.0
        pi_ = 0.0
        k = exps[j]
        while k > 0:
            if k & 1:
                t = pr * wr - pi_ * wi
                pi_ = pr * wi + pi_ * wr
                pr = t
            k >>= 1
            if k > 0:
                t = wr * wr - wi * wi
                wi = 2.0 * wr * wi
                wr = t
        fr = 1.0 + pr
        fi = pi_
        if fr * fr + fi * fi < POLE_TOL2:
            return zr, zi, j + 1
        t = hr * fr - hi * fi
        hi = hr * fi + hi * fr
        hr = t
    if not (math.isfinite(hr) and math.isfinite(hi)):
        # 1/h is far below double resolution
        return zr, zi, 0
    if abs(hr) >= abs(hi):
        t = hi / hr
        den = hr + hi * t
        qr = 1.0 / den
        qi = -t / den
    else:
        t = hr / hi
        den = hi + hr * t
        qr = t / den
        qi = -1.0 / den
    if gmode:
        return zr - (zr * qr - zi * qi), zi - (zr * qi + zi * qr), 0
    return zr - qr, zi - qi, 0


@njit(cache=True, nogil=True)
def run_orbit(zr, zi, radii, exps, gmode, max_iter, escape_radius, conv_eps,
              head_re, head_im, tail_re, tail_im):
    """Iterate until a terminal state; optionally record head and ring-buffered tail.

    Returns (classification, steps, final_re, final_im, pole_k).
    """
    n_head = head_re.shape[0]
    n_tail = tail_re.shape[0]
    n = 0
    while True:
        if n < n_head:
            head_re[n] = zr
            head_im[n] = zi
        if n_tail > 0:
            tail_re[n % n_tail] = zr
            tail_im[n % n_tail] = zi
        m = math.hypot(zr, zi)
        if gmode and m < conv_eps:
            return CONVERGED, n, zr, zi, 0
        if m > escape_radius:
            return ESCAPED, n, zr, zi, 0
        if n >= max_iter:
            return BUDGET, n, zr, zi, 0
        nr, ni, pk = newton_step(zr, zi, radii, exps, gmode)
        if pk > 0:
            return POLE_HIT, n, zr, zi, pk
        zr = nr
        zi = ni
        n += 1


@njit(cache=True, nogil=True)
def render_block(xs, ys, radii, exps, gmode, max_iter, escape_radius, conv_eps,
                 classes, steps):
    """Fill ``classes``/``steps`` (rows of ``ys`` by columns of ``xs``)."""
    empty = np.empty(0)
    for i in range(ys.shape[0]):
        for j in range(xs.shape[0]):
            c, n, _, _, _ = run_orbit(xs[j], ys[i], radii, exps, gmode, max_iter,
                                      escape_radius, conv_eps, empty, empty, empty, empty)
            classes[i, j] = c
            steps[i, j] = n
