"""The series P_{k,m} and its real restrictions to the boundary of the fundamental domain.

Every evaluation sums the terms with |cz+d| <= R in the fixed order of
``lattice.enumerate_pairs`` and grows R until the tail bound is below
``rel_tol`` times the largest term.  At 53 bits the binary64 kernel is used;
above that the same sum is formed term by term in mpmath.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import mpmath

from . import kernel
from ._pykernel import _keep, _tail_at
from .kernel import MODE_DERIV, MODE_FULL, MODE_LI, MODE_LRHO
from .lattice import enumerate_pairs, tail_constant_log
from .logcx import DEFAULT_BITS, LogComplex, Precision

DEFAULT_REL_TOL = 1e-20
DEFAULT_RADIUS_CAP = 4096.0


class CannotCertifyError(RuntimeError):
    """The truncation radius needed for the requested tolerance exceeds the cap."""


class RealityCertificateError(RuntimeError):
    """A real restriction could not be resolved above its roundoff floor."""

    def __init__(self, message: str, param: Any = None) -> None:
        super().__init__(message)
        self.param = param


def default_precision() -> Precision:
    return Precision(DEFAULT_BITS)


@dataclass(frozen=True)
class RawSum:
    """Normalized sum ``exp(lmax) (s_re + i s_im)`` with its diagnostics."""

    lmax: Any
    s_re: Any
    s_im: Any
    abs_sum: Any
    err_weight: Any
    n_terms: int
    rate: float
    radius: float
    tail_log: float
    precision: Precision

    @property
    def noise_rel(self) -> float:
        """Roundoff floor of |S| relative to the largest term."""
        return self.precision.eps * float(self.err_weight)


def _check_args(z: Any, k: int, rel_tol: float) -> None:
    if not (float(z.imag) > 0):
        raise ValueError(f"z must lie strictly inside the upper half-plane, got {z}")
    if not (0 < rel_tol <= 1e-3):
        raise ValueError(f"rel_tol must lie in (0, 1e-3], got {rel_tol}")
    if k < 6 or k % 2:
        raise ValueError(f"k must be an even integer >= 6, got {k}")


def raw_sum(
    z: Any,
    k: int,
    m: int,
    mode: int = MODE_FULL,
    rel_tol: float = DEFAULT_REL_TOL,
    precision: Precision | None = None,
    radius: float | None = None,
    radius_cap: float = DEFAULT_RADIUS_CAP,
) -> RawSum:
    """Certified truncated sum at z in one of the kernel modes."""
    prec = precision or default_precision()
    _check_args(z, k, rel_tol)
    r_min = 2.0 if radius is None else max(2.0, float(radius))
    log_tol = math.log(rel_tol)
    if prec.native:
        out = kernel.evaluate(float(z.real), float(z.imag), int(k), int(m), mode, log_tol, r_min, radius_cap)
    else:
        out = _mp_evaluate(z, int(k), int(m), mode, log_tol, r_min, radius_cap, prec)
    status, lmax, s_re, s_im, abs_sum, err_w, n, rate, rad, tail = out
    if status:
        raise CannotCertifyError(f"truncation radius exceeds cap {radius_cap} at z={complex(z)}")
    return RawSum(lmax, s_re, s_im, abs_sum, err_w, n, rate, rad, tail, prec)


def _mp_evaluate(
    z: Any, k: int, m: int, mode: int, log_tol: float, r_min: float, r_cap: float, prec: Precision
) -> tuple:
    """Same contract as the binary64 kernel, formed term by term at working precision.

    The truncation radius is chosen from binary64 log-magnitudes; only the final
    set of terms is formed at working precision.
    """
    with prec.context():
        zz = mpmath.mpc(z)
        x, y = zz.real, zz.imag
        xf, yf = float(x), float(y)
        log_c = tail_constant_log(zz)
        # start at the c = 1 row so the dominant terms are in lmax
        radius = max(r_min, yf + 1.0)
        status = 0
        two_pi = 2.0 * math.pi
        while True:
            idxs = []
            lmax_f = -math.inf
            for idx in enumerate_pairs(zz, radius):
                w = _keep(mode, idx.c, idx.d)
                if not w:
                    continue
                ur, ui = idx.c * xf + idx.d, idx.c * yf
                n2 = ur * ur + ui * ui
                lmax_f = max(lmax_f, -two_pi * m * yf / n2 - k * math.log(n2) / 2.0)
                idxs.append((idx, w))
            tail = _tail_at(log_c, k, radius, mode, m, yf)
            # margin absorbs the binary64 error of lmax_f
            target = lmax_f - 1e-9 + log_tol
            if tail <= target:
                break
            lo, hi = radius, radius * 2.0
            while _tail_at(log_c, k, hi, mode, m, yf) > target:
                hi *= 2.0
            while hi - lo > 0.01 * lo:
                mid = 0.5 * (lo + hi)
                if _tail_at(log_c, k, mid, mode, m, yf) <= target:
                    hi = mid
                else:
                    lo = mid
            if hi > r_cap:
                status = 1
                break
            radius = hi
        pi = mpmath.pi
        yy = y * y
        parts = []
        for idx, w in idxs:
            c, d, a, b = idx.c, idx.d, idx.a, idx.b
            ur = c * x + d
            ui = c * y
            n2 = ur * ur + ui * ui
            lm = -2 * pi * m * y / n2 - k * mpmath.log(n2) / 2
            mg = m * (((a * x + b) * ur + a * c * yy) / n2)
            arg = mpmath.atan2(ui, ur)
            ph = 2 * pi * mpmath.fmod(mg, 1) - k * arg
            phabs = abs(two_pi * float(mg)) + k * abs(float(arg))
            if mode == MODE_DERIV:
                n4 = n2 * n2
                lr = 2 * pi * m * 2 * ur * ui / n4 - k * c * ur / n2
                li = 2 * pi * m * (ur * ur - ui * ui) / n4 + k * c * ui / n2
                if lr == 0 and li == 0:
                    continue
                lab = float(mpmath.sqrt(lr * lr + li * li))
                lm += mpmath.log(mpmath.sqrt(lr * lr + li * li))
                ph += mpmath.atan2(li, lr)
            else:
                urf, uif = float(ur), float(ui)
                n2f = urf * urf + uif * uif
                lr = two_pi * m * 2.0 * urf * uif / (n2f * n2f) - k * c * urf / n2f
                li = two_pi * m * (urf * urf - uif * uif) / (n2f * n2f) + k * c * uif / n2f
                lab = math.sqrt(lr * lr + li * li)
            parts.append((lm, ph, phabs, lab, w))
        lmax = max(p[0] for p in parts)
        s_re = mpmath.mpf(0)
        s_im = mpmath.mpf(0)
        abs_sum = mpmath.mpf(0)
        err_w = 0.0
        rate = 0.0
        for lm, ph, phabs, lab, w in parts:
            e = mpmath.exp(lm - lmax)
            cs, sn = mpmath.cos_sin(ph)
            if w == 2:
                s_re += 2 * e * cs
                abs_sum += 2 * e
            else:
                s_re += e * cs
                s_im += e * sn
                abs_sum += e
            err_w += w * float(e) * (abs(float(lm)) + phabs + 4.0)
            if lm >= lmax - 7 and lab > rate:
                rate = lab
        return (status, lmax, s_re, s_im, abs_sum, err_w, len(parts), rate, radius, tail)


@dataclass(frozen=True)
class EvalResult:
    value: LogComplex
    tail_log: float
    radius_used: float
    precision: Precision
    max_log: Any
    noise_log: float
    n_terms: int
    rate: float
    rel_tol: float

    @property
    def status(self) -> str:
        """'certified', 'cancelled' (value far below the largest term) or 'unresolved' (below roundoff)."""
        if self.value.is_zero:
            return "unresolved"
        if self.tail_log <= float(self.value.logmag) + math.log(self.rel_tol):
            return "certified"
        return "cancelled"

    def relative_logmag(self) -> float:
        """log|P| minus log of the largest term (nats); the noise floor when unresolved."""
        if self.value.is_zero:
            return self.noise_log - float(self.max_log)
        return float(self.value.logmag - self.max_log)


def _to_result(raw: RawSum, rel_tol: float) -> EvalResult:
    prec = raw.precision
    lib = prec.lib
    noise = raw.noise_rel
    with prec.context():
        s = lib.sqrt(raw.s_re * raw.s_re + raw.s_im * raw.s_im)
        noise_log = float(raw.lmax) + math.log(noise)
        if s == 0 or s <= noise:
            value = LogComplex.zero()
        else:
            value = LogComplex(raw.lmax + lib.log(s), lib.atan2(raw.s_im, raw.s_re))
    return EvalResult(value, raw.tail_log, raw.radius, prec, raw.lmax, noise_log, raw.n_terms, raw.rate, rel_tol)


def eval_P(
    z: Any,
    k: int,
    m: int,
    rel_tol: float = DEFAULT_REL_TOL,
    precision: Precision | None = None,
    radius: float | None = None,
    radius_cap: float = DEFAULT_RADIUS_CAP,
) -> EvalResult:
    """P_{k,m}(z) with a certified truncation bound.  ``radius`` sets a minimum radius."""
    raw = raw_sum(z, k, m, MODE_FULL, rel_tol, precision, radius, radius_cap)
    return _to_result(raw, rel_tol)


def eval_P_deriv(
    z: Any,
    k: int,
    m: int,
    rel_tol: float = DEFAULT_REL_TOL,
    precision: Precision | None = None,
    radius: float | None = None,
    radius_cap: float = DEFAULT_RADIUS_CAP,
) -> EvalResult:
    """P'_{k,m}(z), summed from the exact term derivatives."""
    raw = raw_sum(z, k, m, MODE_DERIV, rel_tol, precision, radius, radius_cap)
    return _to_result(raw, rel_tol)


@dataclass(frozen=True)
class SignedLogReal:
    """A real value as sign * exp(logabs), with its reality and roundoff diagnostics.

    When ``sign`` is 0 the value is below the roundoff floor and ``logabs`` is that floor.
    """

    sign: int
    logabs: Any
    imag_leak_log: float
    noise_log: float
    max_log: Any
    tail_log: float

    def certified(self, margin: float = 20.0) -> bool:
        """Strict reality certificate: the imaginary leak is ``margin`` nats below the value."""
        return self.sign != 0 and self.imag_leak_log <= float(self.logabs) - margin

    @property
    def resolved(self) -> bool:
        return self.sign != 0

    def relative_logabs(self) -> float:
        return float(self.logabs - self.max_log)


def _signed(lmax: Any, re: Any, im: Any, noise: float, tail: float, prec: Precision) -> SignedLogReal:
    lib = prec.lib
    with prec.context():
        floor_log = float(lmax) + math.log(noise)
        leak_log = float(lmax + lib.log(abs(im))) if im != 0 else -math.inf
        if re == 0 or abs(re) <= noise:
            return SignedLogReal(0, lmax + math.log(noise), leak_log, floor_log, lmax, tail)
        return SignedLogReal(1 if re > 0 else -1, lmax + lib.log(abs(re)), leak_log, floor_log, lmax, tail)


def _point(x: Any, y: Any, prec: Precision) -> Any:
    if prec.native:
        return complex(float(x), float(y))
    with prec.context():
        return mpmath.mpc(prec.real(x), prec.real(y))


def eval_real_Lrho(
    t: Any, k: int, m: int, rel_tol: float = DEFAULT_REL_TOL, precision: Precision | None = None
) -> SignedLogReal:
    """P(1/2 + it) for t >= sqrt(3)/2, summing conjugate pairs (c, d), (c, -c-d) as 2 Re."""
    prec = precision or default_precision()
    z = _point(0.5, t, prec)
    raw = raw_sum(z, k, m, MODE_LRHO, rel_tol, prec)
    return _signed(raw.lmax, raw.s_re, raw.s_im, raw.noise_rel, raw.tail_log, prec)


def eval_real_Li(
    t: Any, k: int, m: int, rel_tol: float = DEFAULT_REL_TOL, precision: Precision | None = None
) -> SignedLogReal:
    """P(it) for t >= 1, summing conjugate pairs (c, d), (c, -d) as 2 Re."""
    prec = precision or default_precision()
    z = _point(0, t, prec)
    raw = raw_sum(z, k, m, MODE_LI, rel_tol, prec)
    return _signed(raw.lmax, raw.s_re, raw.s_im, raw.noise_rel, raw.tail_log, prec)


def eval_real_arc(
    theta: Any, k: int, m: int, rel_tol: float = DEFAULT_REL_TOL, precision: Precision | None = None
) -> SignedLogReal:
    """e^{i theta k/2} P(e^{i theta}) for theta in [pi/3, pi/2]; real by the modular relation."""
    prec = precision or default_precision()
    lib = prec.lib
    with prec.context():
        th = prec.real(theta)
        z = complex(math.cos(th), math.sin(th)) if prec.native else mpmath.mpc(mpmath.cos(th), mpmath.sin(th))
    raw = raw_sum(z, k, m, MODE_FULL, rel_tol, prec)
    with prec.context():
        s = lib.sqrt(raw.s_re * raw.s_re + raw.s_im * raw.s_im)
        phi = lib.atan2(raw.s_im, raw.s_re) + th * k / 2
        re, im = s * lib.cos(phi), s * lib.sin(phi)
        noise = raw.noise_rel + prec.eps * k * float(abs(th))
    return _signed(raw.lmax, re, im, noise, raw.tail_log, prec)


def eval_real(segment: str, param: Any, k: int, m: int, rel_tol: float = DEFAULT_REL_TOL,
              precision: Precision | None = None) -> SignedLogReal:
    """Dispatch on segment name: 'L_rho', 'L_i' or 'arc'."""
    seg = normalize_segment(segment)
    fn = {"L_rho": eval_real_Lrho, "L_i": eval_real_Li, "arc": eval_real_arc}[seg]
    return fn(param, k, m, rel_tol, precision)


_SEGMENT_ALIASES = {
    "l_rho": "L_rho", "lrho": "L_rho", "rho": "L_rho",
    "l_i": "L_i", "li": "L_i", "i": "L_i",
    "arc": "arc", "a": "arc",
}


def normalize_segment(segment: str) -> str:
    try:
        return _SEGMENT_ALIASES[segment.lower()]
    except KeyError:
        raise ValueError(f"unknown segment {segment!r}; expected one of L_rho, L_i, arc") from None


def segment_point(segment: str, param: Any, precision: Precision | None = None) -> tuple[Any, Any]:
    """(re, im) of the point with the given parameter on a segment."""
    seg = normalize_segment(segment)
    prec = precision or Precision(53)
    with prec.context():
        p = prec.real(param)
        if seg == "L_rho":
            return prec.real(0.5), p
        if seg == "L_i":
            return prec.real(0), p
        return prec.lib.cos(p), prec.lib.sin(p)


def approx_M(t: Any, k: int, m: int, segment: str, precision: Precision | None = None) -> tuple[Any, Any]:
    """(log R_M, Theta_M) of the dominant pair, M(t) = 2 R_M cos Theta_M.

    L_rho: the pair (1, 0), (1, -1); L_i: the pair (1, 1), (1, -1).  Theta_M is not reduced.
    """
    seg = normalize_segment(segment)
    prec = precision or Precision(53)
    lib = prec.lib
    with prec.context():
        t = prec.real(t)
        pi = prec.pi()
        if seg == "L_rho":
            s = t * t + prec.real(0.25)
            return -2 * pi * m * t / s - k * lib.log(s) / 2, pi * m / s + k * lib.atan(2 * t)
        if seg == "L_i":
            s = t * t + 1
            return -2 * pi * m * t / s - k * lib.log(s) / 2, 2 * pi * m * t * t / s - k * lib.atan(t)
    raise ValueError("approx_M is defined on L_rho and L_i only")
