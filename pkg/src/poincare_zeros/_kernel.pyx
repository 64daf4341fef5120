# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled binary64 kernel for the truncated lattice sum.

Mirrors ``_pykernel.evaluate`` operation for operation; see that module for the
meaning of the arguments and of the returned tuple.
"""

from libc.math cimport sqrt, log, log1p, exp, cos, sin, atan2, fmod, floor, ceil, fabs
from libc.stdlib cimport malloc, free, qsort

cdef double PI = 3.141592653589793
cdef double TWO_PI = 6.283185307179586

cdef enum:
    MODE_FULL = 0
    MODE_DERIV = 1
    MODE_LRHO = 2
    MODE_LI = 3

cdef struct Term:
    double n2
    long c
    long d
    double lm
    double ph
    double phabs
    double rate
    int weight


cdef int cmp_term(const void *pa, const void *pb) noexcept nogil:
    cdef const Term *a = <const Term *> pa
    cdef const Term *b = <const Term *> pb
    if a.n2 < b.n2:
        return -1
    if a.n2 > b.n2:
        return 1
    if a.c != b.c:
        return -1 if a.c < b.c else 1
    if a.d != b.d:
        return -1 if a.d < b.d else 1
    return 0


cdef long gcd(long a, long b) noexcept nogil:
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        a, b = b, a % b
    return a


cdef long modinv(long d, long c) noexcept nogil:
    cdef long r0 = c, r1, s0 = 0, s1 = 1, q, t
    r1 = d % c
    if r1 < 0:
        r1 += c
    while r1:
        q = r0 // r1
        t = r0 - q * r1
        r0 = r1
        r1 = t
        t = s0 - q * s1
        s0 = s1
        s1 = t
    s0 %= c
    if s0 < 0:
        s0 += c
    return s0


cdef double reduce_phase(double ph) noexcept nogil:
    cdef double r = fmod(ph, TWO_PI)
    if r > PI:
        r -= TWO_PI
    elif r <= -PI:
        r += TWO_PI
    return r


cdef double tail_at(double log_c, int k, double r, int mode, long m, double y) noexcept nogil:
    cdef double t = log_c + log1p(1.0 / r) + (1 - k) * log(r) + log(2.0 + r / (k - 2))
    if mode == MODE_DERIV:
        t += log((TWO_PI * m) / (r * r) + k / y)
    return t


cdef int keep(int mode, long c, long d) noexcept nogil:
    """Weight of the term in the sum: 0 skip, 1 single, 2 paired with its conjugate."""
    if mode == MODE_LRHO:
        if c == 0 or 2 * d + c == 0:
            return 1
        return 2 if 2 * d + c > 0 else 0
    if mode == MODE_LI:
        if c == 0 or d == 0:
            return 1
        return 2 if d > 0 else 0
    return 1


cdef Py_ssize_t collect(double x, double y, int k, long m, int mode, double radius, Term *out) noexcept nogil:
    cdef double r2 = radius * radius
    cdef Py_ssize_t n = 0
    cdef long c, d, d_lo, d_hi, a
    cdef double h2, h, cx, ur, ui, n2, ph, lr, li, lab
    cdef int w
    c = 0
    while c * y <= radius:
        if c == 0:
            d_lo = 1
            d_hi = 1
        else:
            h2 = r2 - (c * y) * (c * y)
            if h2 < 0:
                c += 1
                continue
            h = sqrt(h2)
            cx = c * x
            d_lo = <long> ceil(-cx - h) - 1
            d_hi = <long> floor(-cx + h) + 1
        d = d_lo
        while d <= d_hi:
            ur = c * x + d
            ui = c * y
            n2 = ur * ur + ui * ui
            if n2 <= r2 and gcd(c, d) == 1 and (c > 0 or d == 1):
                w = keep(mode, c, d)
                if w:
                    out[n].n2 = n2
                    out[n].c = c
                    out[n].d = d
                    out[n].weight = w
                    out[n].lm = (-2.0 * PI * m * y) / n2 - k * log(n2) / 2.0
                    if c == 0:
                        ph = TWO_PI * fmod(m * x, 1.0)
                        out[n].phabs = TWO_PI * m * fabs(x) + TWO_PI
                    else:
                        a = modinv(d, c)
                        ph = TWO_PI * (<double> ((m * a) % c) / c) - (TWO_PI * m * ur) / (c * n2)
                        out[n].phabs = (TWO_PI * m * fabs(ur)) / (c * n2) + TWO_PI
                    ph = ph - k * atan2(ui, ur)
                    out[n].phabs += k * fabs(atan2(ui, ur))
                    lr = (TWO_PI * m * 2.0 * ur * ui) / (n2 * n2) - (k * c * ur) / n2
                    li = (TWO_PI * m * (ur * ur - ui * ui)) / (n2 * n2) + (k * c * ui) / n2
                    lab = sqrt(lr * lr + li * li)
                    out[n].rate = lab
                    if mode == MODE_DERIV:
                        if lab == 0.0:
                            d += 1
                            continue
                        out[n].lm += log(lab)
                        ph += atan2(li, lr)
                    out[n].ph = reduce_phase(ph)
                    n += 1
            d += 1
        c += 1
    return n


cdef Py_ssize_t capacity(double y, double radius) noexcept nogil:
    cdef double cmax = floor(radius / y) + 1.0
    return <Py_ssize_t> (cmax * (2.0 * radius + 6.0)) + 8


def evaluate(double x, double y, int k, long m, int mode, double log_rel_tol,
             double r_min=2.0, double r_cap=4096.0):
    """Truncated ordered sum at z = x + iy; returns the tuple documented in _pykernel."""
    cdef double log_c = log(8.0 * (1.0 + 1.0 / y) * (1.0 + sqrt(x * x + y * y)) / y)
    cdef double radius = r_min if r_min > 2.0 else 2.0
    cdef double lmax, tail, lo, hi, mid, e, s_re, s_im, abs_sum, err_w, rate
    cdef Term *terms = NULL
    cdef Py_ssize_t n = 0, i
    cdef int status = 0
    # start at the c = 1 row so the dominant terms are in lmax
    if radius < y + 1.0:
        radius = y + 1.0
    while True:
        terms = <Term *> malloc(capacity(y, radius) * sizeof(Term))
        if terms == NULL:
            raise MemoryError()
        n = collect(x, y, k, m, mode, radius, terms)
        lmax = terms[0].lm
        for i in range(1, n):
            if terms[i].lm > lmax:
                lmax = terms[i].lm
        tail = tail_at(log_c, k, radius, mode, m, y)
        if tail <= lmax + log_rel_tol:
            break
        lo = radius
        hi = radius * 2.0
        while tail_at(log_c, k, hi, mode, m, y) > lmax + log_rel_tol:
            hi *= 2.0
        while hi - lo > 0.01 * lo:
            mid = 0.5 * (lo + hi)
            if tail_at(log_c, k, mid, mode, m, y) <= lmax + log_rel_tol:
                hi = mid
            else:
                lo = mid
        if hi > r_cap:
            status = 1
            break
        free(terms)
        terms = NULL
        radius = hi
    qsort(terms, n, sizeof(Term), cmp_term)
    s_re = 0.0
    s_im = 0.0
    abs_sum = 0.0
    err_w = 0.0
    rate = 0.0
    for i in range(n):
        e = exp(terms[i].lm - lmax)
        if terms[i].weight == 2:
            s_re += 2.0 * e * cos(terms[i].ph)
            abs_sum += 2.0 * e
            err_w += 2.0 * e * (fabs(terms[i].lm) + terms[i].phabs + 4.0)
        else:
            s_re += e * cos(terms[i].ph)
            s_im += e * sin(terms[i].ph)
            abs_sum += e
            err_w += e * (fabs(terms[i].lm) + terms[i].phabs + 4.0)
        if terms[i].lm >= lmax - 7.0 and terms[i].rate > rate:
            rate = terms[i].rate
    free(terms)
    return (status, lmax, s_re, s_im, abs_sum, err_w, n, rate, radius, tail)
