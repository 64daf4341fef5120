"""Coprime index set of the series, per-term values and truncation bounds.

Term ``(c, d)`` of the series is ``sigma_{c,d}(z) = exp(2 pi i m gz) / (cz + d)^k``
where ``g = [[a, b], [c, d]]`` is the canonical completion of the bottom row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

from .logcx import LogComplex, Precision, normalize_phase, precision_of


class NotCoprimeError(ValueError):
    pass


def bezout_complete(c: int, d: int) -> tuple[int, int]:
    """Canonical (a, b) with ad - bc = 1: a = d^-1 mod c in [0, c)."""
    c, d = int(c), int(d)
    if c < 0 or (c == 0 and d != 1):
        raise NotCoprimeError(f"bottom row ({c}, {d}) is not normalized (need c > 0 or (0, 1))")
    if math.gcd(c, d) != 1:
        raise NotCoprimeError(f"gcd({c}, {d}) != 1")
    if c == 0:
        return 1, 0
    if c == 1:
        return 0, -1
    a = pow(d % c, -1, c)
    return a, (a * d - 1) // c


@dataclass(frozen=True)
class TermIndex:
    c: int
    d: int
    a: int
    b: int

    def __post_init__(self) -> None:
        if self.c < 0 or (self.c == 0 and self.d != 1):
            raise NotCoprimeError(f"bottom row ({self.c}, {self.d}) is not normalized")
        if self.a * self.d - self.b * self.c != 1:
            raise NotCoprimeError(f"det of [[{self.a}, {self.b}], [{self.c}, {self.d}]] != 1")

    @classmethod
    def of(cls, c: int, d: int) -> "TermIndex":
        a, b = bezout_complete(c, d)
        return cls(c, d, a, b)

    @property
    def pair(self) -> tuple[int, int]:
        return (self.c, self.d)

    @property
    def is_canonical(self) -> bool:
        return (self.a, self.b) == bezout_complete(self.c, self.d)


def enumerate_pairs(z: Any, radius: float) -> list[TermIndex]:
    """All TermIndex with |cz+d| <= radius, ordered by (|cz+d|, c, d)."""
    x, y = float(z.real), float(z.imag)
    if y <= 0:
        raise ValueError("z must lie in the upper half-plane")
    r2 = float(radius) ** 2
    found = []
    if r2 >= 1.0:
        found.append((1.0, 0, 1))
    c = 1
    while c * y <= radius:
        h2 = r2 - (c * y) ** 2
        if h2 >= 0:
            h = math.sqrt(h2)
            cx = c * x
            for d in range(math.ceil(-cx - h) - 1, math.floor(-cx + h) + 2):
                re = cx + d
                n2 = re * re + (c * y) ** 2
                if n2 <= r2 and math.gcd(c, d) == 1:
                    found.append((n2, c, d))
        c += 1
    found.sort()
    return [TermIndex.of(c, d) for _, c, d in found]


def _gz_real(x: Any, y: Any, idx: TermIndex, n2: Any) -> Any:
    """Re of (az+b)/(cz+d) from the full matrix."""
    a, b, c, d = idx.a, idx.b, idx.c, idx.d
    return ((a * x + b) * (c * x + d) + a * c * y * y) / n2


def term_parts(z: Any, k: int, m: int, idx: TermIndex, prec: Precision) -> tuple[Any, Any, Any]:
    """(logmag, reduced phase, |unreduced phase|) of sigma_{c,d}(z)."""
    lib = prec.lib
    with prec.context():
        x, y = prec.real(z.real), prec.real(z.imag)
        pi = prec.pi()
        ur = idx.c * x + idx.d
        ui = idx.c * y
        n2 = ur * ur + ui * ui
        logmag = -2 * pi * m * y / n2 - k * lib.log(n2) / 2
        gz = _gz_real(x, y, idx, n2)
        mg = m * gz
        frac = lib.fmod(mg, 1)
        arg = lib.atan2(ui, ur)
        phase = normalize_phase(2 * pi * frac - k * arg, prec)
        return logmag, phase, abs(2 * pi * mg) + k * abs(arg)


def term_sigma(z: Any, k: int, m: int, idx: TermIndex, prec: Precision | None = None) -> LogComplex:
    """sigma_{c,d}(z) in log-polar form."""
    if prec is None:
        prec = precision_of(z)
    logmag, phase, _ = term_parts(z, k, m, idx, prec)
    return LogComplex(logmag, phase)


def log_derivative(z: Any, k: int, m: int, idx: TermIndex, prec: Precision) -> Any:
    """sigma'/sigma = 2 pi i m / (cz+d)^2 - k c / (cz+d), as a complex value."""
    with prec.context():
        zz = prec.cplx(z)
        u = idx.c * zz + idx.d
        two_pi_i = 2j * prec.pi() if prec.native else 2 * prec.pi() * 1j
        return two_pi_i * m / (u * u) - k * idx.c / u


def term_sigma_deriv(z: Any, k: int, m: int, idx: TermIndex, prec: Precision | None = None) -> LogComplex:
    """d/dz sigma_{c,d}(z), exact: sigma times its logarithmic derivative."""
    if prec is None:
        prec = precision_of(z)
    logmag, phase, _ = term_parts(z, k, m, idx, prec)
    lib = prec.lib
    with prec.context():
        ld = log_derivative(z, k, m, idx, prec)
        if ld == 0:
            return LogComplex.zero()
        return LogComplex(logmag + lib.log(abs(ld)), phase + lib.atan2(ld.imag, ld.real))


@dataclass(frozen=True)
class TermGeometry:
    w: Any
    I: Any
    log_r: Any
    theta: Any
    theta_tilde: Any


def i_of_w(w: Any, alpha: Any, prec: Precision | None = None) -> Any:
    """I(w) = -2 pi alpha w + log(w)/2."""
    if prec is None:
        prec = precision_of(w, alpha)
    with prec.context():
        return -2 * prec.pi() * alpha * w + prec.lib.log(w) / 2


def term_geometry(
    z: Any, alpha: Any, idx: TermIndex, m_over_k: Any = None, prec: Precision | None = None
) -> TermGeometry:
    """w, I(w), log r, theta and theta_tilde of one term.

    theta = 2 pi alpha Re(gz) - arg(cz+d) so that sigma = (r e^{i theta})^k when m = alpha k;
    theta_tilde uses m/k in place of alpha.
    """
    if prec is None:
        prec = precision_of(z, alpha)
    if m_over_k is None:
        m_over_k = alpha
    lib = prec.lib
    with prec.context():
        x, y = prec.real(z.real), prec.real(z.imag)
        alpha = prec.real(alpha)
        pi = prec.pi()
        ur = idx.c * x + idx.d
        ui = idx.c * y
        n2 = ur * ur + ui * ui
        w = y / n2
        gz = _gz_real(x, y, idx, n2)
        arg = lib.atan2(ui, ur)
        return TermGeometry(
            w=w,
            I=i_of_w(w, alpha, prec),
            log_r=-2 * pi * alpha * w - lib.log(n2) / 2,
            theta=2 * pi * alpha * gz - arg,
            theta_tilde=2 * pi * prec.real(m_over_k) * gz - arg,
        )


def tail_constant_log(z: Any) -> float:
    """log C(z), C(z) = 8 (1 + 1/y)(1 + |z|)/y."""
    x, y = float(z.real), float(z.imag)
    return math.log(8.0 * (1.0 + 1.0 / y) * (1.0 + math.hypot(x, y)) / y)


def tail_bound_from_const(log_c: float, k: int, radius: float) -> float:
    """log of C (1 + 1/R) R^(1-k) (2 + R/(k-2)).

    The partial annulus at R contributes C (R+1) R^-k; the whole annuli n <= |cz+d| < n+1
    beyond it contribute at most C (1 + 1/R) sum n^(1-k), bounded by R^(1-k) plus an integral.
    """
    r = float(radius)
    return log_c + math.log1p(1.0 / r) + (1 - k) * math.log(r) + math.log(2.0 + r / (k - 2))


def tail_bound(z: Any, k: int, radius: float) -> float:
    """Log of a bound on sum_{|cz+d| > radius} |sigma_{c,d}(z)|; needs radius >= 2, k >= 6."""
    if radius < 2:
        raise ValueError("tail_bound needs radius >= 2")
    if k < 6:
        raise ValueError("tail_bound needs k >= 6")
    return tail_bound_from_const(tail_constant_log(z), k, radius)


def radius_for(log_c: float, k: int, target_log: float, r_min: float = 2.0) -> float:
    """Smallest radius (up to 1%) >= r_min whose tail bound is <= target_log."""
    r = max(r_min, 2.0)
    if tail_bound_from_const(log_c, k, r) <= target_log:
        return r
    guess = math.exp((log_c + 1.0 - target_log) / (k - 1))
    lo, hi = r, max(r, guess)
    while tail_bound_from_const(log_c, k, hi) > target_log:
        hi *= 2.0
    while hi - lo > 0.01 * lo:
        mid = 0.5 * (lo + hi)
        if tail_bound_from_const(log_c, k, mid) <= target_log:
            hi = mid
        else:
            lo = mid
    return hi
