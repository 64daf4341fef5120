"""Extended-range complex arithmetic in log-polar form.

A nonzero complex number is stored as ``(logmag, phase)`` with the phase in
``(-pi, pi]``; zero is an explicit marker.  Reals are Python floats at 53 bits
and ``mpmath.mpf`` values at any higher precision, so one set of formulas serves
both backends.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import mpmath

NATIVE_BITS = 53
DEFAULT_BITS = 106

# exp() limits of binary64, in nats
_F64_LOG_MAX = 709.78
_F64_LOG_MIN = -745.13


class RangeError(ArithmeticError):
    """A log-polar value does not fit the plain representation."""


@dataclass(frozen=True)
class Precision:
    """Working mantissa precision of a computation, in bits."""

    bits: int = DEFAULT_BITS

    def __post_init__(self) -> None:
        if isinstance(self.bits, bool) or not isinstance(self.bits, int) or self.bits < NATIVE_BITS:
            raise ValueError(f"precision bits must be an integer >= {NATIVE_BITS}, got {self.bits!r}")

    @property
    def native(self) -> bool:
        """True when plain binary64 floats are used."""
        return self.bits == NATIVE_BITS

    @property
    def eps(self) -> float:
        """Unit roundoff 2^-bits."""
        return math.ldexp(1.0, -self.bits)

    @property
    def lib(self) -> Any:
        """Module providing exp, log, atan2, ... for this precision."""
        return math if self.native else mpmath

    def context(self) -> contextlib.AbstractContextManager:
        """Context that makes mpmath work at this precision (no-op at 53 bits)."""
        return contextlib.nullcontext() if self.native else mpmath.workprec(self.bits)

    def real(self, value: Any) -> Any:
        """Convert to the working real type (str values keep all their digits)."""
        if self.native:
            return float(value)
        with self.context():
            return mpmath.mpf(value)

    def cplx(self, value: Any) -> Any:
        if self.native:
            return complex(value)
        with self.context():
            return mpmath.mpc(value)

    def pi(self) -> Any:
        if self.native:
            return math.pi
        with self.context():
            return +mpmath.pi


def precision_of(*values: Any) -> Precision:
    """Guess the precision from value types: mpmath values use the current mp.prec."""
    for v in values:
        if isinstance(v, (mpmath.mpf, mpmath.mpc)):
            return Precision(max(NATIVE_BITS, mpmath.mp.prec))
    return Precision(NATIVE_BITS)


def normalize_phase(phase: Any, prec: Precision | None = None) -> Any:
    """Reduce an angle to (-pi, pi]."""
    if prec is None:
        prec = precision_of(phase)
    with prec.context():
        pi = prec.pi()
        if -pi < phase <= pi:
            return phase
        r = prec.lib.fmod(phase, 2 * pi)
        if r > pi:
            r -= 2 * pi
        elif r <= -pi:
            r += 2 * pi
        return r


@dataclass(frozen=True)
class LogComplex:
    """exp(logmag + i*phase), or zero when ``is_zero`` is set."""

    logmag: Any = 0.0
    phase: Any = 0.0
    is_zero: bool = False

    def __post_init__(self) -> None:
        if self.is_zero:
            return
        if not _finite(self.logmag):
            raise ValueError(f"logmag must be finite, got {self.logmag!r}")
        if not _finite(self.phase):
            raise ValueError(f"phase must be finite, got {self.phase!r}")
        object.__setattr__(self, "phase", normalize_phase(self.phase))

    @classmethod
    def zero(cls) -> "LogComplex":
        return cls(0.0, 0.0, True)

    def conjugate(self) -> "LogComplex":
        if self.is_zero:
            return self
        return LogComplex(self.logmag, -self.phase)

    def __repr__(self) -> str:
        if self.is_zero:
            return "LogComplex(zero)"
        return f"LogComplex(logmag={self.logmag!s}, phase={self.phase!s})"


def _finite(v: Any) -> bool:
    if isinstance(v, mpmath.mpf):
        return bool(mpmath.isfinite(v))
    return math.isfinite(v)


def lc_from_cartesian(re: Any, im: Any, prec: Precision | None = None) -> LogComplex:
    """Convert re + i*im; (0, 0) gives the zero marker."""
    if prec is None:
        prec = precision_of(re, im)
    with prec.context():
        re, im = prec.real(re), prec.real(im)
        if re == 0 and im == 0:
            return LogComplex.zero()
        lib = prec.lib
        return LogComplex(lib.log(lib.hypot(re, im)), lib.atan2(im, re))


def lc_to_cartesian(x: LogComplex, prec: Precision | None = None) -> tuple[Any, Any]:
    """Plain (re, im).  Raises RangeError if exp(logmag) does not fit binary64 at 53 bits."""
    if x.is_zero:
        return (0.0, 0.0) if prec is None or prec.native else (prec.real(0), prec.real(0))
    if prec is None:
        prec = precision_of(x.logmag, x.phase)
    with prec.context():
        if prec.native and not (_F64_LOG_MIN < x.logmag < _F64_LOG_MAX):
            raise RangeError(f"exp({float(x.logmag)}) is outside the binary64 range")
        lib = prec.lib
        r = lib.exp(prec.real(x.logmag))
        ph = prec.real(x.phase)
        return r * lib.cos(ph), r * lib.sin(ph)


def lc_mul(x: LogComplex, y: LogComplex, prec: Precision | None = None) -> LogComplex:
    if x.is_zero or y.is_zero:
        return LogComplex.zero()
    if prec is None:
        prec = precision_of(x.logmag, y.logmag, x.phase, y.phase)
    with prec.context():
        return LogComplex(x.logmag + y.logmag, normalize_phase(x.phase + y.phase, prec))


def lc_div(x: LogComplex, y: LogComplex, prec: Precision | None = None) -> LogComplex:
    if y.is_zero:
        raise ZeroDivisionError("division by the zero marker")
    if x.is_zero:
        return LogComplex.zero()
    if prec is None:
        prec = precision_of(x.logmag, y.logmag, x.phase, y.phase)
    with prec.context():
        return LogComplex(x.logmag - y.logmag, normalize_phase(x.phase - y.phase, prec))


def lc_powi(x: LogComplex, n: int, prec: Precision | None = None) -> LogComplex:
    """x**n for an integer n."""
    if x.is_zero:
        if n <= 0:
            raise ZeroDivisionError("zero marker raised to a non-positive power")
        return x
    if prec is None:
        prec = precision_of(x.logmag, x.phase)
    with prec.context():
        return LogComplex(n * x.logmag, normalize_phase(n * x.phase, prec))


def log_sum_exp(terms: Sequence[LogComplex], prec: Precision | None = None) -> tuple[Any, Any, Any, Any]:
    """Ordered two-pass sum.

    Returns ``(lmax, s_re, s_im, abs_sum)`` with the sum equal to
    ``exp(lmax) * (s_re + i s_im)`` and ``abs_sum = sum |t_i| / exp(lmax)``.
    ``lmax`` is None when every term is the zero marker.
    """
    live = [t for t in terms if not t.is_zero]
    if not live:
        return None, 0.0, 0.0, 0.0
    if prec is None:
        prec = precision_of(*(t.logmag for t in live))
    lib = prec.lib
    with prec.context():
        lmax = max(prec.real(t.logmag) for t in live)
        s_re = prec.real(0)
        s_im = prec.real(0)
        a = prec.real(0)
        for t in live:
            e = lib.exp(prec.real(t.logmag) - lmax)
            ph = prec.real(t.phase)
            s_re += e * lib.cos(ph)
            s_im += e * lib.sin(ph)
            a += e
        return lmax, s_re, s_im, a


def lc_add(terms: Iterable[LogComplex], prec: Precision | None = None) -> LogComplex:
    """Sum in the given order; returns the zero marker on cancellation below roundoff."""
    terms = list(terms)
    if prec is None:
        prec = precision_of(*(t.logmag for t in terms if not t.is_zero))
    lmax, s_re, s_im, a = log_sum_exp(terms, prec)
    if lmax is None:
        return LogComplex.zero()
    lib = prec.lib
    with prec.context():
        s = lib.hypot(s_re, s_im)
        if s <= 4 * prec.eps * a:
            return LogComplex.zero()
        return LogComplex(lmax + lib.log(s), lib.atan2(s_im, s_re))
