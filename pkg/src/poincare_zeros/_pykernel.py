"""Pure-Python binary64 kernel for the truncated lattice sum.

This is the fallback for the compiled ``_kernel`` module and follows it
operation for operation, so both give the same floats on the same libm.
"""

from __future__ import annotations

import math

PI = 3.141592653589793
TWO_PI = 6.283185307179586

MODE_FULL = 0
MODE_DERIV = 1
MODE_LRHO = 2
MODE_LI = 3


def _reduce_phase(ph: float) -> float:
    r = math.fmod(ph, TWO_PI)
    if r > PI:
        r -= TWO_PI
    elif r <= -PI:
        r += TWO_PI
    return r


def _tail_at(log_c: float, k: int, r: float, mode: int, m: int, y: float) -> float:
    t = log_c + math.log1p(1.0 / r) + (1 - k) * math.log(r) + math.log(2.0 + r / (k - 2))
    if mode == MODE_DERIV:
        t += math.log((TWO_PI * m) / (r * r) + k / y)
    return t


def _keep(mode: int, c: int, d: int) -> int:
    if mode == MODE_LRHO:
        if c == 0 or 2 * d + c == 0:
            return 1
        return 2 if 2 * d + c > 0 else 0
    if mode == MODE_LI:
        if c == 0 or d == 0:
            return 1
        return 2 if d > 0 else 0
    return 1


def _collect(x: float, y: float, k: int, m: int, mode: int, radius: float) -> list[tuple]:
    r2 = radius * radius
    out = []
    c = 0
    while c * y <= radius:
        if c == 0:
            d_lo = d_hi = 1
        else:
            h2 = r2 - (c * y) * (c * y)
            if h2 < 0:
                c += 1
                continue
            h = math.sqrt(h2)
            cx = c * x
            d_lo = math.ceil(-cx - h) - 1
            d_hi = math.floor(-cx + h) + 1
        for d in range(d_lo, d_hi + 1):
            ur = c * x + d
            ui = c * y
            n2 = ur * ur + ui * ui
            if not (n2 <= r2 and math.gcd(c, d) == 1 and (c > 0 or d == 1)):
                continue
            w = _keep(mode, c, d)
            if not w:
                continue
            lm = (-2.0 * PI * m * y) / n2 - k * math.log(n2) / 2.0
            if c == 0:
                ph = TWO_PI * math.fmod(m * x, 1.0)
                phabs = TWO_PI * m * abs(x) + TWO_PI
            else:
                a = pow(d % c, -1, c) if c > 1 else 0
                ph = TWO_PI * (float((m * a) % c) / c) - (TWO_PI * m * ur) / (c * n2)
                phabs = (TWO_PI * m * abs(ur)) / (c * n2) + TWO_PI
            ph = ph - k * math.atan2(ui, ur)
            phabs += k * abs(math.atan2(ui, ur))
            lr = (TWO_PI * m * 2.0 * ur * ui) / (n2 * n2) - (k * c * ur) / n2
            li = (TWO_PI * m * (ur * ur - ui * ui)) / (n2 * n2) + (k * c * ui) / n2
            lab = math.sqrt(lr * lr + li * li)
            if mode == MODE_DERIV:
                if lab == 0.0:
                    continue
                lm += math.log(lab)
                ph += math.atan2(li, lr)
            out.append((n2, c, d, lm, _reduce_phase(ph), phabs, lab, w))
        c += 1
    return out


def evaluate(
    x: float, y: float, k: int, m: int, mode: int, log_rel_tol: float, r_min: float = 2.0, r_cap: float = 4096.0
) -> tuple:
    """Truncated ordered sum at z = x + iy.

    The radius grows until the tail bound is below ``exp(lmax + log_rel_tol)``.
    Returns ``(status, lmax, s_re, s_im, abs_sum, err_weight, n_terms, rate, radius, tail)``:
    the sum is ``exp(lmax) (s_re + i s_im)``; ``abs_sum`` and ``err_weight`` are the
    normalized sums of |t| and |t| (|log t| + |phase| + 4) used for the roundoff
    floor; ``rate`` is the largest |sigma'/sigma| among terms within e^-7 of the
    largest; status 1 means the radius cap was hit.
    """
    log_c = math.log(8.0 * (1.0 + 1.0 / y) * (1.0 + math.sqrt(x * x + y * y)) / y)
    # start at the c = 1 row so the dominant terms are in lmax
    radius = r_min if r_min > 2.0 else 2.0
    if radius < y + 1.0:
        radius = y + 1.0
    status = 0
    while True:
        terms = _collect(x, y, k, m, mode, radius)
        lmax = terms[0][3]
        for t in terms[1:]:
            if t[3] > lmax:
                lmax = t[3]
        tail = _tail_at(log_c, k, radius, mode, m, y)
        if tail <= lmax + log_rel_tol:
            break
        lo = radius
        hi = radius * 2.0
        while _tail_at(log_c, k, hi, mode, m, y) > lmax + log_rel_tol:
            hi *= 2.0
        while hi - lo > 0.01 * lo:
            mid = 0.5 * (lo + hi)
            if _tail_at(log_c, k, mid, mode, m, y) <= lmax + log_rel_tol:
                hi = mid
            else:
                lo = mid
        if hi > r_cap:
            status = 1
            break
        radius = hi
    terms.sort(key=lambda t: (t[0], t[1], t[2]))
    s_re = 0.0
    s_im = 0.0
    abs_sum = 0.0
    err_w = 0.0
    rate = 0.0
    for n2, c, d, lm, ph, phabs, lab, w in terms:
        e = math.exp(lm - lmax)
        if w == 2:
            s_re += 2.0 * e * math.cos(ph)
            abs_sum += 2.0 * e
            err_w += 2.0 * e * (abs(lm) + phabs + 4.0)
        else:
            s_re += e * math.cos(ph)
            s_im += e * math.sin(ph)
            abs_sum += e
            err_w += e * (abs(lm) + phabs + 4.0)
        if lm >= lmax - 7.0 and lab > rate:
            rate = lab
    return (status, lmax, s_re, s_im, abs_sum, err_w, len(terms), rate, radius, tail)
