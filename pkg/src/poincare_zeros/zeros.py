"""Locating and counting zeros.

Real zeros on L_rho, L_i and the arc come from sign changes of the real
restrictions, refined by bisection.  Non-real zeros are counted with the
argument principle on rectangles (or polygons), tracking arg P along the
contour, and localized by recursive quadrisection.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Optional, Sequence

import mpmath
import numpy as np

from . import predict
from .logcx import Precision
from .series import (
    DEFAULT_REL_TOL,
    MODE_FULL,
    RealityCertificateError,
    default_precision,
    eval_P,
    eval_P_deriv,
    eval_real,
    normalize_segment,
    raw_sum,
    segment_point,
)

SEGMENTS = ("L_rho", "L_i", "arc", "gamma", "interior")


class BoundaryZeroSuspected(RuntimeError):
    """Phase tracking could not pass a point on the contour: a zero is on or very near it."""

    def __init__(self, message: str, point: Any = None, at_floor: bool = False) -> None:
        super().__init__(message)
        self.point = point
        self.at_floor = at_floor


class WindingError(RuntimeError):
    """The unwrapped phase did not close to a multiple of 2 pi, or subdivision was not additive."""


class StaleBracketError(ValueError):
    pass


@dataclass(frozen=True)
class Bracket:
    lo: Any
    hi: Any
    sign_lo: int
    sign_hi: int
    segment: str

    @property
    def at_point(self) -> bool:
        """A sample that is itself a zero (only produced at segment endpoints)."""
        return self.sign_lo == 0 and self.sign_hi == 0


@dataclass(frozen=True)
class ZeroRecord:
    re: Any
    im: Any
    segment: str
    method: str
    residual_log: float
    half_width: Any
    deviation: Any = None
    weight: float = 1.0
    param: Any = None
    precision_limited: bool = False

    def position(self) -> complex:
        return complex(float(self.re), float(self.im))


@dataclass(frozen=True)
class RectSpec:
    x_lo: Any
    x_hi: Any
    y_lo: Any
    y_hi: Any
    max_step: float = 0.05

    def __post_init__(self) -> None:
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise ValueError(f"empty rectangle {self}")
        if not self.y_lo > 0:
            raise ValueError("rectangle must lie strictly inside the upper half-plane")

    @property
    def half_width(self) -> Any:
        return max(self.x_hi - self.x_lo, self.y_hi - self.y_lo) / 2

    def center(self) -> tuple[Any, Any]:
        return (self.x_lo + self.x_hi) / 2, (self.y_lo + self.y_hi) / 2

    def corners(self) -> list[tuple[Any, Any]]:
        """Counterclockwise from the lower left."""
        return [(self.x_lo, self.y_lo), (self.x_hi, self.y_lo), (self.x_hi, self.y_hi), (self.x_lo, self.y_hi)]

    def with_(self, **kw: Any) -> "RectSpec":
        d = dict(x_lo=self.x_lo, x_hi=self.x_hi, y_lo=self.y_lo, y_hi=self.y_hi, max_step=self.max_step)
        d.update(kw)
        return RectSpec(**d)


# --------------------------------------------------------------------------- real segments


def predicted_phase(segment: str, param: float, k: int, m: int) -> float:
    """Leading phase whose multiples of pi mark the expected sign changes."""
    seg = normalize_segment(segment)
    if seg == "arc":
        return k * param / 2.0 + 2.0 * math.pi * m * math.cos(param)
    return k * predict.vartheta(param, m / k, seg)


def _phase_variation(segment: str, a: float, b: float, k: int, m: int) -> float:
    seg = normalize_segment(segment)
    if seg == "arc":
        knots = [a, b]
        if m > 0 and k / (4.0 * math.pi * m) < 1.0:
            c = math.asin(k / (4.0 * math.pi * m))
            knots = [a] + [t for t in (c, math.pi - c) if a < t < b] + [b]
        return sum(abs(predicted_phase(seg, q, k, m) - predicted_phase(seg, p, k, m)) for p, q in zip(knots, knots[1:]))
    return k * predict.total_variation(a, b, m / k, seg)


def segment_domain(segment: str) -> tuple[float, float]:
    seg = normalize_segment(segment)
    if seg == "L_rho":
        return predict.SQRT3_2, math.inf
    if seg == "L_i":
        return 1.0, math.inf
    return math.pi / 3.0, math.pi / 2.0


def _sample_params(segment: str, a: float, b: float, k: int, m: int, n_init: int) -> list[float]:
    base = [a + (b - a) * i / (n_init - 1) for i in range(n_init)]
    out = [base[0]]
    for p, q in zip(base, base[1:]):
        n = max(1, math.ceil(_phase_variation(segment, p, q, k, m) / (math.pi / 4.0)))
        out += [p + (q - p) * j / n for j in range(1, n)]
        out.append(q)
    return out


@dataclass
class ScanReport:
    brackets: list
    resolved_to: float
    complete: bool
    n_samples: int
    failure: Optional[str] = None


def scan_report(
    segment: str,
    rng: tuple[float, float],
    k: int,
    m: int,
    n_init: int = 64,
    precision: Precision | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
    stop_on_unresolved: bool = False,
) -> ScanReport:
    """Sign-change scan; with ``stop_on_unresolved`` the scan ends at the first
    sample below the roundoff floor instead of raising."""
    seg = normalize_segment(segment)
    prec = precision or default_precision()
    a, b = float(rng[0]), float(rng[1])
    lo_dom, hi_dom = segment_domain(seg)
    if not (lo_dom - 1e-15 <= a < b <= hi_dom + 1e-15):
        raise ValueError(f"range [{a}, {b}] is not inside the domain of {seg}")
    if n_init < 2:
        raise ValueError("n_init must be at least 2")
    params = _sample_params(seg, a, b, k, m, n_init)
    brackets: list[Bracket] = []
    prev_p, prev_s = None, None
    for i, p in enumerate(params):
        s = _sign_at(seg, p, k, m, prec, rel_tol)
        if s == 0:
            if i in (0, len(params) - 1):
                brackets.append(Bracket(p, p, 0, 0, seg))
                continue
            nudge = 1e-9 * (b - a)
            s = _sign_at(seg, p + nudge, k, m, prec, rel_tol)
            if s == 0:
                msg = f"{seg}: value at {p} is below the roundoff floor at {prec.bits} bits"
                if stop_on_unresolved:
                    return ScanReport(brackets, prev_p if prev_p is not None else a, False, i, msg)
                raise RealityCertificateError(msg, p)
            p = p + nudge
        if prev_s is not None and prev_s != 0 and s != prev_s:
            brackets.append(Bracket(prev_p, p, prev_s, s, seg))
        prev_p, prev_s = p, s
    return ScanReport(brackets, b, True, len(params))


def scan_segment(
    segment: str,
    rng: tuple[float, float],
    k: int,
    m: int,
    n_init: int = 64,
    precision: Precision | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> list[Bracket]:
    """All sign-change brackets on [a, b] of the segment's real restriction.

    Samples start uniform (n_init points) and every interval over which the
    predicted phase moves more than pi/4 is subdivided.
    """
    return scan_report(segment, rng, k, m, n_init, precision, rel_tol).brackets


def _sign_at(seg: str, p: float, k: int, m: int, prec: Precision, rel_tol: float) -> int:
    return eval_real(seg, p, k, m, rel_tol, prec).sign


def refine_bisect(
    bracket: Bracket,
    segment: str,
    k: int,
    m: int,
    tol: float = 1e-12,
    precision: Precision | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> ZeroRecord:
    """Bisect a sign-change bracket down to width <= tol, or until the midpoint sign is
    below the roundoff floor (then the record is flagged precision_limited)."""
    seg = normalize_segment(segment)
    prec = precision or default_precision()
    if bracket.at_point:
        p = prec.real(bracket.lo)
        v = eval_real(seg, p, k, m, rel_tol, prec)
        re, im = segment_point(seg, p, prec)
        return ZeroRecord(re, im, seg, "bisection", v.relative_logabs(), prec.real(0), param=p)
    if bracket.sign_lo == bracket.sign_hi or 0 in (bracket.sign_lo, bracket.sign_hi):
        raise StaleBracketError(f"bracket [{bracket.lo}, {bracket.hi}] has signs {bracket.sign_lo}, {bracket.sign_hi}")
    with prec.context():
        lo, hi = prec.real(bracket.lo), prec.real(bracket.hi)
        s_lo = bracket.sign_lo
        limited = False
        while hi - lo > tol:
            mid = (lo + hi) / 2
            s = eval_real(seg, mid, k, m, rel_tol, prec).sign
            if s == 0:
                # the roundoff floor is reached: the bracket is as narrow as this precision allows
                limited = True
                break
            if s == s_lo:
                lo = mid
            else:
                hi = mid
        pos = (lo + hi) / 2
        hw = (hi - lo) / 2
    v = eval_real(seg, pos, k, m, rel_tol, prec)
    re, im = segment_point(seg, pos, prec)
    return ZeroRecord(re, im, seg, "bisection", v.relative_logabs(), hw, param=pos, precision_limited=limited)


# --------------------------------------------------------------------------- winding numbers


class PhaseTracker:
    """Unwrapped change of arg P along straight edges, cached per edge.

    Steps start from the rate of the dominant terms (|sigma'/sigma|) and are
    halved until every phase increment is below pi/2.
    """

    def __init__(
        self,
        k: int,
        m: int,
        precision: Precision | None = None,
        rel_tol: float = DEFAULT_REL_TOL,
        max_step: float = 0.05,
        min_frac: float = 1e-7,
    ) -> None:
        self.k, self.m = k, m
        self.prec = precision or default_precision()
        self.rel_tol = rel_tol
        self.max_step = max_step
        self.min_frac = min_frac
        self._points: dict = {}
        self._edges: dict = {}
        self.n_evals = 0

    def point(self, x: Any, y: Any) -> tuple[float, float]:
        """(arg P, rate) at x + iy; raises BoundaryZeroSuspected below the roundoff floor."""
        key = (x, y)
        hit = self._points.get(key)
        if hit is not None:
            return hit
        prec = self.prec
        if prec.native:
            z = complex(float(x), float(y))
        else:
            with prec.context():
                z = mpmath.mpc(x, y)
        raw = raw_sum(z, self.k, self.m, MODE_FULL, self.rel_tol, prec)
        self.n_evals += 1
        with prec.context():
            s = prec.lib.sqrt(raw.s_re * raw.s_re + raw.s_im * raw.s_im)
            if s <= 8 * raw.noise_rel:
                raise BoundaryZeroSuspected(f"|P| at {complex(z)} is at the roundoff floor", (x, y), True)
            out = (float(prec.lib.atan2(raw.s_im, raw.s_re)), float(raw.rate))
        self._points[key] = out
        return out

    def edge(self, p0: tuple[Any, Any], p1: tuple[Any, Any], nodes: Optional[list] = None) -> float:
        """Total change of arg P from p0 to p1 along the straight segment."""
        key = (p0, p1)
        if nodes is None:
            if key in self._edges:
                return self._edges[key]
            if (p1, p0) in self._edges:
                return -self._edges[(p1, p0)]
        prec = self.prec
        with prec.context():
            dx, dy = p1[0] - p0[0], p1[1] - p0[1]
            length = float(prec.lib.sqrt(dx * dx + dy * dy))
            ph, rate = self.point(*p0)
            s = 0.0
            total = 0.0
            h = min(1.0, self.max_step / length, (math.pi / 4.0) / (max(rate, 1e-300) * length))
            if nodes is not None:
                nodes.append(0.0)
            while s < 1.0:
                h = min(h, 1.0 - s)
                t = s + h
                q = p1 if t >= 1.0 else (p0[0] + dx * t, p0[1] + dy * t)
                ph1, rate1 = self.point(*q)
                d = ph1 - ph
                d -= 2.0 * math.pi * round(d / (2.0 * math.pi))
                if abs(d) >= math.pi / 2.0:
                    h /= 2.0
                    if h < self.min_frac:
                        raise BoundaryZeroSuspected(f"step collapsed on edge {p0} -> {p1} near fraction {s}", q)
                    continue
                total += d
                s = t
                ph = ph1
                if nodes is not None:
                    nodes.append(s)
                h = min(2.0 * h, self.max_step / length, (math.pi / 4.0) / (max(rate1, 1e-300) * length))
        self._edges[key] = total
        return total

    def contour(self, vertices: Sequence[tuple[Any, Any]]) -> float:
        """Total phase change around the closed polygon (counterclockwise for positive counts)."""
        return sum(self.edge(vertices[i], vertices[(i + 1) % len(vertices)]) for i in range(len(vertices)))

    def winding(self, vertices: Sequence[tuple[Any, Any]]) -> int:
        total = self.contour(vertices)
        n = total / (2.0 * math.pi)
        if abs(n - round(n)) > 0.25:
            raise WindingError(f"phase change {total} is not a multiple of 2 pi")
        return int(round(n))


def _tracker(k: int, m: int, precision: Precision | None, rel_tol: float, max_step: float,
             tracker: Optional[PhaseTracker]) -> PhaseTracker:
    if tracker is not None:
        return tracker
    return PhaseTracker(k, m, precision, rel_tol, max_step)


def wind_count(
    rect: RectSpec,
    k: int,
    m: int,
    precision: Precision | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
    tracker: Optional[PhaseTracker] = None,
) -> int:
    """Number of zeros of P_{k,m} inside the rectangle (argument principle)."""
    tr = _tracker(k, m, precision, rel_tol, rect.max_step, tracker)
    return tr.winding(_as_prec_vertices(rect.corners(), tr.prec))


def wind_count_polygon(
    vertices: Sequence[tuple[Any, Any]],
    k: int,
    m: int,
    precision: Precision | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
    max_step: float = 0.05,
    tracker: Optional[PhaseTracker] = None,
) -> int:
    """Argument-principle count inside a simple counterclockwise polygon."""
    tr = _tracker(k, m, precision, rel_tol, max_step, tracker)
    return tr.winding(_as_prec_vertices(vertices, tr.prec))


def _as_prec_vertices(vertices: Iterable[tuple[Any, Any]], prec: Precision) -> list[tuple[Any, Any]]:
    return [(prec.real(x), prec.real(y)) for x, y in vertices]


def wind_count_quadrature(
    rect: RectSpec,
    k: int,
    m: int,
    precision: Precision | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
    order: int = 16,
) -> float:
    """(1/2 pi i) of the contour integral of P'/P, by Gauss-Legendre panels.

    The panel breakpoints are the nodes of the phase tracker, so P'/P varies
    moderately on each panel.  Returns the (real part of the) count, unrounded.
    """
    prec = precision or Precision(53)
    tr = PhaseTracker(k, m, prec, rel_tol, rect.max_step)
    gx, gw = np.polynomial.legendre.leggauss(order)
    verts = _as_prec_vertices(rect.corners(), prec)
    total = 0j
    for i in range(4):
        p0, p1 = verts[i], verts[(i + 1) % 4]
        nodes: list = []
        tr.edge(p0, p1, nodes)
        z0 = complex(float(p0[0]), float(p0[1]))
        dz = complex(float(p1[0]), float(p1[1])) - z0
        for a, b in zip(nodes, nodes[1:]):
            half = 0.5 * (b - a)
            for x, w in zip(gx, gw):
                z = z0 + dz * (a + half * (x + 1.0))
                total += w * half * dz * _log_deriv(z, k, m, prec, rel_tol)
    return (total / (2j * math.pi)).real


def _log_deriv(z: complex, k: int, m: int, prec: Precision, rel_tol: float) -> complex:
    with prec.context():
        zz = prec.cplx(z)
        p = eval_P(zz, k, m, rel_tol, prec).value
        dp = eval_P_deriv(zz, k, m, rel_tol, prec).value
        mag = math.exp(float(dp.logmag - p.logmag))
        return mag * complex(math.cos(float(dp.phase - p.phase)), math.sin(float(dp.phase - p.phase)))


# --------------------------------------------------------------------------- localization


def deviation_metric(z: Any, alpha: Any, precision: Precision | None = None) -> Any:
    """2 pi alpha y - log|z| / (1 - |z|^-2): signed distance from Gamma_alpha in equation units."""
    prec = precision or Precision(53)
    lib = prec.lib
    with prec.context():
        x, y = prec.real(z.real), prec.real(z.imag)
        n2 = x * x + y * y
        if not n2 > 1:
            raise ValueError(f"deviation_metric needs |z| > 1, got {z}")
        return 2 * prec.pi() * prec.real(alpha) * y - lib.log(n2) / 2 / (1 - 1 / n2)


def deviation_floor(z: Any, alpha: float, half_width: float, bits: int) -> float:
    """Size below which a computed deviation is not resolved: roundoff plus position uncertainty."""
    x, y = float(z.real), float(z.imag)
    h = 1e-6
    gx = (predict.gamma_residual(x + h, y, alpha) - predict.gamma_residual(x - h, y, alpha)) / (2 * h)
    gy = (predict.gamma_residual(x, y + h, alpha) - predict.gamma_residual(x, y - h, alpha)) / (2 * h)
    return 16.0 * math.ldexp(1.0, -bits) + 2.0 * math.hypot(gx, gy) * float(half_width)


def classify(re: Any, im: Any, half_width: Any, alpha: Optional[float], tube: float = 0.05) -> str:
    x, y, tol = float(re), float(im), 1.01 * float(half_width) + 1e-15
    if abs(abs(x) - 0.5) <= tol:
        return "L_rho"
    if abs(x) <= tol:
        return "L_i"
    if abs(math.hypot(x, y) - 1.0) <= 2 * tol:
        return "arc"
    if alpha is not None and 0 < alpha < predict.ALPHA_GAMMA and abs(x) <= 0.5:
        if abs(y - predict.gamma_curve_y(x, alpha)) <= tube:
            return "gamma"
    return "interior"


_SPLITS = (0.5, 0.6, 0.4, 0.7, 0.3, 0.55)


def _children(cell: RectSpec, fx: float, fy: float) -> list[RectSpec]:
    xm = cell.x_lo + (cell.x_hi - cell.x_lo) * fx
    ym = cell.y_lo + (cell.y_hi - cell.y_lo) * fy
    return [
        cell.with_(x_hi=xm, y_hi=ym),
        cell.with_(x_lo=xm, y_hi=ym),
        cell.with_(x_lo=xm, y_lo=ym),
        cell.with_(x_hi=xm, y_lo=ym),
    ]


def _jitter_inward(rect: RectSpec, point: Any, frac: float) -> RectSpec:
    """Move every edge of rect that contains point inward by frac of the rect size.

    Zeros on the outer boundary are left to the segment scans: the rectangle is
    treated as open.
    """
    x, y = float(point[0]), float(point[1])
    wx = rect.x_hi - rect.x_lo
    wy = rect.y_hi - rect.y_lo
    tol_x, tol_y = 1e-9 * float(wx), 1e-9 * float(wy)
    kw = {}
    if abs(x - float(rect.x_lo)) <= tol_x:
        kw["x_lo"] = rect.x_lo + frac * wx
    if abs(x - float(rect.x_hi)) <= tol_x:
        kw["x_hi"] = rect.x_hi - frac * wx
    if abs(y - float(rect.y_lo)) <= tol_y:
        kw["y_lo"] = rect.y_lo + frac * wy
    if abs(y - float(rect.y_hi)) <= tol_y:
        kw["y_hi"] = rect.y_hi - frac * wy
    if not kw:  # not on an identifiable edge: shrink the whole rectangle
        kw = dict(x_lo=rect.x_lo + frac * wx, x_hi=rect.x_hi - frac * wx,
                  y_lo=rect.y_lo + frac * wy, y_hi=rect.y_hi - frac * wy)
    return rect.with_(**kw)


def count_with_jitter(
    rect: RectSpec,
    k: int,
    m: int,
    tracker: PhaseTracker,
    max_jitter: int = 5,
    frac: float = 0.01,
) -> tuple[RectSpec, int]:
    """Winding count, moving an edge that passes through a zero inward by frac per retry."""
    cur = rect
    for attempt in range(max_jitter + 1):
        try:
            return cur, wind_count(cur, k, m, tracker=tracker)
        except BoundaryZeroSuspected as exc:
            if attempt == max_jitter:
                raise
            cur = _jitter_inward(cur, exc.point, frac)
    raise AssertionError("unreachable")


def localize_in_rect(
    rect: RectSpec,
    k: int,
    m: int,
    target_half_width: float = 1e-6,
    precision: Precision | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
    tracker: Optional[PhaseTracker] = None,
    alpha: Optional[float] = None,
    tube: float = 0.05,
    edge_jitter: float = 0.01,
) -> list[ZeroRecord]:
    """Zeros inside rect by recursive quadrisection down to target_half_width.

    An outer edge passing through a zero is moved inward (``edge_jitter`` of the
    rect size per retry); an interior split line through a zero is moved by 10%
    of the cell (at most 5 times).
    """
    tr = _tracker(k, m, precision, rel_tol, rect.max_step, tracker)
    prec = tr.prec
    alpha = m / k if alpha is None else alpha
    with prec.context():
        rect = rect.with_(x_lo=prec.real(rect.x_lo), x_hi=prec.real(rect.x_hi),
                          y_lo=prec.real(rect.y_lo), y_hi=prec.real(rect.y_hi))
        rect, n = count_with_jitter(rect, k, m, tr, frac=edge_jitter)
        stack = [(rect, n)]
        done: list[tuple[RectSpec, int, bool]] = []
        while stack:
            cell, n = stack.pop()
            if n == 0:
                continue
            if cell.half_width <= target_half_width:
                done.append((cell, n, False))
                continue
            floor_hits = 0
            for fx, fy in zip(_SPLITS, _SPLITS):
                kids = _children(cell, fx, fy)
                try:
                    counts = [wind_count(c, k, m, tracker=tr) for c in kids]
                except BoundaryZeroSuspected as exc:
                    floor_hits += exc.at_floor
                    continue
                if sum(counts) != n:
                    raise WindingError(f"children counts {counts} do not add up to {n} for {cell}")
                break
            else:
                if floor_hits == len(_SPLITS):
                    # every split line crosses the disk where |P| is below roundoff
                    done.append((cell, n, True))
                    continue
                raise BoundaryZeroSuspected(f"no split of {cell} avoids zeros on the split lines")
            stack += [(c, cnt) for c, cnt in zip(kids, counts) if cnt]
        dev_alpha = prec.real(m) / k if alpha == m / k else prec.real(alpha)
        records = []
        for cell, n, limited in done:
            cx, cy = cell.center()
            hw = cell.half_width
            z = _zpoint(cx, cy, prec)
            res = eval_P(z, k, m, rel_tol, prec).relative_logmag()
            seg = classify(cx, cy, hw, alpha, tube)
            dev = deviation_metric(z, dev_alpha, prec) if seg == "gamma" else None
            if dev is not None:
                limited = limited or abs(float(dev)) < deviation_floor(z, alpha, float(hw), prec.bits)
            for _ in range(n):
                records.append(ZeroRecord(cx, cy, seg, "winding", res, hw, dev, 1.0, None, limited))
    records.sort(key=lambda r: (float(r.im), float(r.re)), reverse=True)
    return records


def _zpoint(x: Any, y: Any, prec: Precision) -> Any:
    if prec.native:
        return complex(float(x), float(y))
    with prec.context():
        return mpmath.mpc(x, y)


def refine_record(
    record: ZeroRecord,
    k: int,
    m: int,
    target_half_width: float,
    precision: Precision,
    rel_tol: float = DEFAULT_REL_TOL,
) -> ZeroRecord:
    """Re-localize one winding record in a box of twice its half-width at a new precision."""
    with precision.context():
        x, y = precision.real(record.re), precision.real(record.im)
        h = 2 * max(precision.real(record.half_width), precision.real(1e-30))
        box = RectSpec(x - h, x + h, y - h, y + h, max_step=float(4 * h))
    recs = localize_in_rect(box, k, m, target_half_width, precision, rel_tol, alpha=m / k, edge_jitter=0.1)
    if len(recs) != 1:
        raise WindingError(f"expected one zero near {record.position()}, found {len(recs)}")
    return recs[0]


# --------------------------------------------------------------------------- Gamma tube


def gamma_tube_polygon(alpha: float, half_width: float = 0.05, x_end: float = 0.495, n: int = 32) -> list[tuple[float, float]]:
    """Counterclockwise polygon around Gamma_alpha for |x| <= x_end."""
    xs = [-x_end + 2.0 * x_end * i / n for i in range(n + 1)]
    ys = [predict.gamma_curve_y(x, alpha) for x in xs]
    lower = [(x, y - half_width) for x, y in zip(xs, ys)]
    upper = [(x, y + half_width) for x, y in zip(xs, ys)]
    return lower + upper[::-1]


def count_gamma_tube(
    k: int,
    m: int,
    half_width: float = 0.05,
    x_end: float = 0.495,
    precision: Precision | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
    max_jitter: int = 5,
) -> int:
    """Argument-principle count in the tube |y - gamma(x)| < half_width, |x| <= x_end."""
    alpha = m / k
    hw = half_width
    for attempt in range(max_jitter + 1):
        try:
            return wind_count_polygon(gamma_tube_polygon(alpha, hw, x_end), k, m, precision, rel_tol)
        except BoundaryZeroSuspected:
            if attempt == max_jitter:
                raise
            hw = half_width * (1.0 + 0.02 * (attempt + 1))
    raise AssertionError("unreachable")


def gamma_tube_rect(alpha: float, half_width: float = 0.05, x_end: float = 0.495) -> RectSpec:
    ys = [predict.gamma_curve_y(-x_end + 2 * x_end * i / 64, alpha) for i in range(65)]
    return RectSpec(-x_end, x_end, min(ys) - half_width, max(ys) + half_width)


# --------------------------------------------------------------------------- catalog


@dataclass
class CatalogOptions:
    precision: Precision = field(default_factory=default_precision)
    rel_tol: float = DEFAULT_REL_TOL
    n_init: int = 256
    bisect_tol: float = 1e-12
    lrho_ceiling: float = 150.0
    lrho_split: float = 20.0
    li_ceiling: float = 4.0
    tube_half_width: float = 0.05
    tube_x_end: float = 0.495
    target_half_width: float = 1e-6


@dataclass
class Accounting:
    k: int
    m: int
    counts: dict
    total: float
    expected: float
    residue: float
    notes: list


@dataclass
class Catalog:
    records: list
    accounting: Accounting


def _scan_and_refine(seg: str, rng: tuple[float, float], k: int, m: int, opts: CatalogOptions,
                     notes: list) -> tuple[list[ZeroRecord], float]:
    """Records from one scan and the parameter up to which the scan was resolved."""
    rep = scan_report(seg, rng, k, m, opts.n_init, opts.precision, opts.rel_tol, stop_on_unresolved=True)
    if not rep.complete:
        notes.append(f"{seg}: scan of [{rng[0]:.6g}, {rng[1]:.6g}] stopped at {rep.resolved_to:.6g} ({rep.failure})")
    recs = [refine_bisect(br, seg, k, m, opts.bisect_tol, opts.precision, opts.rel_tol) for br in rep.brackets]
    return recs, rep.resolved_to


def _corner_weight(rec: ZeroRecord) -> ZeroRecord:
    x, y = float(rec.re), float(rec.im)
    tol = max(float(rec.half_width), 1e-9)
    if abs(x) <= tol and abs(y - 1.0) <= tol:
        return ZeroRecord(**{**asdict(rec), "weight": 0.5})
    if abs(abs(x) - 0.5) <= tol and abs(y - predict.SQRT3_2) <= tol:
        return ZeroRecord(**{**asdict(rec), "weight": 1.0 / 3.0})
    return rec


def dedup(records: Sequence[ZeroRecord]) -> list[ZeroRecord]:
    """Keep bisection records over winding records for the same zero."""
    out: list[ZeroRecord] = []
    for r in sorted(records, key=lambda r: r.method != "bisection"):
        z = r.position()
        dup = False
        for s in out:
            if abs(s.position() - z) <= float(r.half_width) + float(s.half_width) + 1e-9:
                dup = True
                break
        if not dup:
            out.append(r)
    return out


def sort_records(records: Iterable[ZeroRecord]) -> list[ZeroRecord]:
    order = {s: i for i, s in enumerate(SEGMENTS)}
    return sorted(records, key=lambda r: (order[r.segment], float(r.im), float(r.re)))


def assemble_catalog(k: int, m: int, options: Optional[CatalogOptions] = None) -> Catalog:
    """Scan arc, L_rho, L_i, localize the Gamma_alpha tube, and close the valence count."""
    if m < 1:
        raise ValueError("assemble_catalog needs m >= 1")
    opts = options or CatalogOptions()
    notes: list[str] = []
    recs: list[ZeroRecord] = []
    recs += _scan_and_refine("arc", (math.pi / 3, math.pi / 2), k, m, opts, notes)[0]
    sp = max(opts.lrho_split, predict.SQRT3_2 + 0.1)
    got, reach = _scan_and_refine("L_rho", (predict.SQRT3_2, min(sp, opts.lrho_ceiling)), k, m, opts, notes)
    recs += got
    if opts.lrho_ceiling > sp and reach >= sp:
        got, reach = _scan_and_refine("L_rho", (sp, opts.lrho_ceiling), k, m, opts, notes)
        recs += got
    notes.append(f"L_rho scanned up to t = {reach:.6g}")
    got, reach = _scan_and_refine("L_i", (1.0, opts.li_ceiling), k, m, opts, notes)
    recs += got
    notes.append(f"L_i scanned up to t = {reach:.6g}")
    alpha = m / k
    if alpha < predict.ALPHA_GAMMA:
        rect = gamma_tube_rect(alpha, opts.tube_half_width, opts.tube_x_end)
        wrecs = localize_in_rect(rect, k, m, opts.target_half_width, opts.precision, opts.rel_tol,
                                 alpha=alpha, tube=opts.tube_half_width)
        recs += wrecs
        notes.append(f"non-real zeros searched in [{float(rect.x_lo):.4g}, {float(rect.x_hi):.4g}] x "
                     f"[{float(rect.y_lo):.4g}, {float(rect.y_hi):.4g}] around Gamma_alpha")
    else:
        notes.append("alpha >= 1/(4 pi): no Gamma_alpha tube; non-real zeros not searched")
    recs = sort_records(_corner_weight(r) for r in dedup(recs))
    counts = {s: 0.0 for s in SEGMENTS}
    for r in recs:
        counts[r.segment] += r.weight
    total = sum(counts.values())
    expected = k / 12.0
    notes.append("cusp order v_inf is not determined here; a cusp form has v_inf >= 1, "
                 "so residue = k/12 - total is expected to be at least 1")
    return Catalog(recs, Accounting(k, m, counts, total, expected, expected - total, notes))
