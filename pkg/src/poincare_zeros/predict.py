"""Closed-form predictions: F, P_rho, the oscillation phases, Gamma_alpha and dominance maps.

All root finding is bracketed bisection on a monotone function.  Plain binary64
floats throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .lattice import TermIndex, enumerate_pairs

SQRT3_2 = math.sqrt(3.0) / 2.0
ALPHA_RHO = 1.0 / (2.0 * math.pi * math.sqrt(3.0))  # F(sqrt(3)/2)
ALPHA_CRIT = math.sqrt(3.0) * math.log(3.0) / (4.0 * math.pi)  # upper end of the P_rho formula
ALPHA_GAMMA = 1.0 / (4.0 * math.pi)  # Gamma_alpha exists below this
ALPHA_LI = math.log(2.0) / (2.0 * math.pi)  # L_i proportion starts above this


class DomainError(ValueError):
    pass


def _bisect(f, lo: float, hi: float, rel: float = 1e-15, max_iter: int = 200) -> float:
    """Root of f on [lo, hi] given f(lo), f(hi) of opposite signs (or zero)."""
    flo = f(lo)
    if flo == 0:
        return lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rel * abs(mid) or mid in (lo, hi):
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def F_of_t(t: float) -> float:
    """F(t) = (1/4 pi)(1/4 + t^2) log(1/4 + t^2) / (t (t^2 - 3/4)), continuous at sqrt(3)/2."""
    if t < SQRT3_2:
        raise DomainError(f"F is defined for t >= sqrt(3)/2, got {t}")
    e = (t - SQRT3_2) * (t + SQRT3_2)  # t^2 - 3/4 = (1/4 + t^2) - 1
    if abs(t - SQRT3_2) < 1e-6:
        q = 1.0 - e / 2.0 + e * e / 3.0 - e ** 3 / 4.0  # log1p(e)/e
    else:
        q = math.log1p(e) / e
    return (1.0 + e) * q / (4.0 * math.pi * t)


def F_inv(alpha: float) -> float:
    """The t >= sqrt(3)/2 with F(t) = alpha."""
    if not (0 < alpha <= ALPHA_RHO * (1 + 1e-14)):
        raise DomainError(f"F_inv needs 0 < alpha <= 1/(2 pi sqrt 3), got {alpha}")
    if alpha >= F_of_t(SQRT3_2):
        return SQRT3_2
    hi = 2.0
    while F_of_t(hi) > alpha:
        hi *= 2.0
    return _bisect(lambda t: F_of_t(t) - alpha, SQRT3_2, hi)


def t_min(alpha: float) -> float:
    """Larger critical point of the L_rho phase, 2 pi alpha + sqrt(4 pi^2 alpha^2 - 1/4)."""
    disc = 4.0 * math.pi ** 2 * alpha ** 2 - 0.25
    if disc < 0:
        raise DomainError(f"t_min needs alpha >= 1/(4 pi), got {alpha}")
    return 2.0 * math.pi * alpha + math.sqrt(disc)


def P_rho_const(alpha: float) -> float:
    """Proportion constant of L_rho zeros, in units of k/12."""
    if not (0 < alpha <= ALPHA_CRIT):
        raise DomainError(f"P_rho is given for 0 < alpha <= sqrt(3) log 3/(4 pi), got {alpha}")
    if alpha < ALPHA_RHO:
        T = F_inv(alpha)
        return 12.0 * (0.5 - alpha / (0.25 + T * T) - math.atan(2.0 * T) / math.pi)
    tm = t_min(alpha)
    return 12.0 * (5.0 / 6.0 + alpha - 2.0 * alpha / (0.25 + tm * tm) - 2.0 * math.atan(2.0 * tm) / math.pi)


def _threshold_fn(t: float, alpha: float) -> float:
    s = 0.25 + t * t
    return 2.0 * math.pi * alpha * 2.0 * t / (s * (s + 2.0)) - 0.5 * math.log1p(2.0 / s)


def T_threshold(alpha: float) -> float:
    """Largest root in t of the threshold equation, for alpha above sqrt(3) log 3/(4 pi)."""
    if not alpha > ALPHA_CRIT:
        raise DomainError(f"T_threshold needs alpha > sqrt(3) log 3/(4 pi), got {alpha}")
    # for t > 4 pi alpha the expression is negative
    hi = 8.0 * math.pi * alpha + 10.0
    t = hi
    while True:
        lo = max(SQRT3_2, t * 0.995)
        if _threshold_fn(lo, alpha) >= 0:
            return _bisect(lambda s: _threshold_fn(s, alpha), lo, t)
        if lo == SQRT3_2:
            return SQRT3_2
        t = lo


def _theta_rho(t: float, alpha: float) -> float:
    return math.pi * alpha / (0.25 + t * t) + math.atan(2.0 * t)


def _theta_i(t: float, alpha: float) -> float:
    return 2.0 * math.pi * alpha * t * t / (t * t + 1.0) - math.atan(t)


def vartheta(t: float, alpha: float, segment: str) -> float:
    """Leading phase of M(t)/k on L_rho or L_i; t may be math.inf."""
    seg = _segment(segment)
    if math.isinf(t):
        return math.pi / 2 if seg == "L_rho" else 2.0 * math.pi * alpha - math.pi / 2
    return _theta_rho(t, alpha) if seg == "L_rho" else _theta_i(t, alpha)


def vartheta_prime(t: float, alpha: float, segment: str) -> float:
    seg = _segment(segment)
    if seg == "L_rho":
        s = 0.25 + t * t
        return (s - 4.0 * math.pi * alpha * t) / (2.0 * s * s)
    s = 1.0 + t * t
    return (4.0 * math.pi * alpha * t - s) / (s * s)


def critical_points(alpha: float, segment: str) -> list[float]:
    """Roots of the phase derivative: t^2 - 4 pi alpha t + q = 0 with q = 1/4 (L_rho) or 1 (L_i)."""
    q = 0.25 if _segment(segment) == "L_rho" else 1.0
    b = 2.0 * math.pi * alpha
    disc = b * b - q
    if disc < 0:
        return []
    r = math.sqrt(disc)
    return sorted({b - r, b + r})


def total_variation(a: float, b: float, alpha: float, segment: str) -> float:
    """Total variation of vartheta over [a, b], split at its critical points."""
    if b < a:
        raise ValueError("need a <= b")
    knots = [a] + [c for c in critical_points(alpha, segment) if a < c < b] + [b]
    return sum(abs(vartheta(q, alpha, segment) - vartheta(p, alpha, segment)) for p, q in zip(knots, knots[1:]))


def gamma_residual(x: float, y: float, alpha: float) -> float:
    """2 pi alpha y - log|z| / (1 - |z|^-2), with the removable singularity at |z| = 1."""
    e = x * x + y * y - 1.0
    q = 1.0 - e / 2.0 + e * e / 3.0 if abs(e) < 1e-8 else math.log1p(e) / e
    return 2.0 * math.pi * alpha * y - 0.5 * (1.0 + e) * q


def gamma_curve_y(x: float, alpha: float) -> float:
    """Height of Gamma_alpha above Re z = x."""
    if abs(x) > 0.5:
        raise DomainError(f"gamma_curve_y needs |x| <= 1/2, got {x}")
    if not (0 < alpha < ALPHA_GAMMA):
        raise DomainError(f"Gamma_alpha is only defined here for 0 < alpha < 1/(4 pi), got {alpha}")
    lo = math.sqrt(1.0 - x * x)
    hi = 2.0 * lo
    while gamma_residual(x, hi, alpha) <= 0:
        hi *= 2.0
    return _bisect(lambda y: gamma_residual(x, y, alpha), lo, hi)


def _log_r(c: int, d: int, x: float, y: float, alpha: float) -> float:
    n2 = (c * x + d) ** 2 + (c * y) ** 2
    return -2.0 * math.pi * alpha * y / n2 - 0.5 * math.log(n2)


def li_margin(t: float, alpha: float, cutoff: float = 6.0) -> float:
    """log r_{1,1}(it) minus the best competitor with |c it + d| <= cutoff."""
    own = _log_r(1, 1, 0.0, t, alpha)
    best = -math.inf
    for idx in enumerate_pairs(complex(0.0, t), cutoff):
        if idx.c == 1 and abs(idx.d) == 1:
            continue
        best = max(best, _log_r(idx.c, idx.d, 0.0, t, alpha))
    return own - best


@dataclass(frozen=True)
class LiWindow:
    A: float
    B: float
    t0: Optional[float]
    margin: float


def li_window(alpha: float, margin: float = 1e-3, step: float = 1e-4, cutoff: float = 6.0) -> LiWindow:
    """Certified interval on L_i where the pair (1, +-1) strictly dominates every competitor."""
    if not alpha > ALPHA_LI:
        raise DomainError(f"li_window needs alpha > log 2/(2 pi) ~ {ALPHA_LI:.4f}, got {alpha}")

    def ok(t: float) -> bool:
        return t > 1.0 and li_margin(t, alpha, cutoff) > margin

    if alpha > 1.0 / (2.0 * math.pi):
        t0 = 2.0 * math.pi * alpha + math.sqrt(4.0 * math.pi ** 2 * alpha ** 2 - 1.0)
        if not ok(t0):
            raise DomainError(f"no dominance window around t0 = {t0} for alpha = {alpha}")
        n = 0
        while ok(t0 - (n + 1) * step):
            n += 1
        A = t0 - n * step
    else:
        t0 = None
        A = 1.0 + step
        if not ok(A):
            raise DomainError(f"dominance fails just above t = 1 for alpha = {alpha}")
    start = A if t0 is None else t0
    n = 0
    while ok(start + (n + 1) * step):
        n += 1
        if n > 10 ** 7:
            raise DomainError("dominance window does not close")
    return LiWindow(A, start + n * step, t0, margin)


@dataclass(frozen=True)
class DominanceCell:
    center: complex
    best: TermIndex
    margin: float
    tie: bool
    runner_up: TermIndex


def dominance_map(grid, alpha: float, nx: int, ny: int, tie_tol: float = 1e-9, cutoff: float = 6.0) -> list[DominanceCell]:
    """Dominant |sigma_{c,d}| per cell of an nx-by-ny grid over ``grid`` (a RectSpec), row-major.

    A cell is a tie when its margin is below ``tie_tol`` or when the winner at one of
    its corners differs from the winner at its center (the tie locus crosses the cell).
    """
    x_lo, x_hi, y_lo, y_hi = float(grid.x_lo), float(grid.x_hi), float(grid.y_lo), float(grid.y_hi)
    if y_lo <= 0:
        raise ValueError("grid must lie in the upper half-plane")
    cmax = int(math.floor(cutoff / y_lo))
    xmax = max(abs(x_lo), abs(x_hi))
    cands = [(0, 1)]
    for c in range(1, cmax + 1):
        span = int(math.ceil(c * xmax + cutoff)) + 1
        cands += [(c, d) for d in range(-span, span + 1) if math.gcd(c, d) == 1]
    cc = np.array([p[0] for p in cands], dtype=float)[:, None, None]
    dd = np.array([p[1] for p in cands], dtype=float)[:, None, None]

    def winners(xs: np.ndarray, ys: np.ndarray):
        X, Y = np.meshgrid(xs, ys)  # rows follow y
        n2 = (cc * X + dd) ** 2 + (cc * Y) ** 2
        lr = -2.0 * math.pi * alpha * Y / n2 - 0.5 * np.log(n2)
        lr = np.where(n2 <= cutoff * cutoff, lr, -np.inf)
        order = np.argsort(-lr, axis=0, kind="stable")
        return order[0], order[1], lr

    dx = (x_hi - x_lo) / nx
    dy = (y_hi - y_lo) / ny
    xs = x_lo + dx * (np.arange(nx) + 0.5)
    ys = y_lo + dy * (np.arange(ny) + 0.5)
    best, second, lr = winners(xs, ys)
    rows = np.arange(ny)[:, None]
    cols = np.arange(nx)[None, :]
    margin = lr[best, rows, cols] - lr[second, rows, cols]
    cbest, _, _ = winners(x_lo + dx * np.arange(nx + 1), y_lo + dy * np.arange(ny + 1))
    straddle = np.zeros((ny, nx), dtype=bool)
    for oy in (0, 1):
        for ox in (0, 1):
            straddle |= cbest[oy:oy + ny, ox:ox + nx] != best
    index = [TermIndex.of(*p) for p in cands]
    cells = []
    for iy in range(ny):
        for ix in range(nx):
            mg = float(margin[iy, ix])
            cells.append(DominanceCell(
                complex(float(xs[ix]), float(ys[iy])),
                index[best[iy, ix]],
                mg,
                bool(mg < tie_tol or straddle[iy, ix]),
                index[second[iy, ix]],
            ))
    return cells


@dataclass(frozen=True)
class PredictionReport:
    alpha: float
    F_inv_alpha: Optional[float]
    P_rho: Optional[float]
    arc_lower: float
    gamma_count: Optional[float]
    li_window: Optional[LiWindow]
    closure_defect: Optional[float]
    t_min: Optional[float] = None
    T_threshold: Optional[float] = None
    k: Optional[int] = None
    notes: tuple = field(default_factory=tuple)

    def counts(self) -> dict:
        """Expected numbers of zeros for the report's k."""
        k = self.k
        if k is None:
            raise ValueError("report has no k")
        out = {"arc": self.arc_lower * k}
        if self.P_rho is not None:
            out["L_rho"] = self.P_rho * k / 12.0
        if self.gamma_count is not None:
            out["gamma"] = self.gamma_count * k
        out["total"] = k / 12.0
        return out


def gamma_count_of(alpha: float) -> float:
    T = F_inv(alpha)
    return alpha + alpha / (0.25 + T * T) + math.atan(2.0 * T) / math.pi - 0.5


def expected_counts(k: Optional[int], m: Optional[int], alpha: Optional[float] = None) -> PredictionReport:
    """Closed-form report for (k, m), or for ``alpha`` alone when given."""
    if alpha is None:
        if k is None or m is None or m < 1 or k < 12 or k % 2:
            raise ValueError("expected_counts needs m >= 1 and even k >= 12")
        alpha = m / k
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    notes = []
    f_inv = F_inv(alpha) if alpha <= ALPHA_RHO else None
    p_rho = P_rho_const(alpha) if alpha <= ALPHA_CRIT else None
    if p_rho is None:
        notes.append("P_rho not given above sqrt(3) log 3/(4 pi)")
    gamma = closure = None
    if alpha < ALPHA_GAMMA:
        gamma = gamma_count_of(alpha)
        closure = p_rho / 12.0 + (1.0 / 12.0 - alpha) + gamma - 1.0 / 12.0
    else:
        notes.append("no closure: alpha >= 1/(4 pi)")
    window = None
    if alpha > ALPHA_LI:
        try:
            window = li_window(alpha)
        except DomainError as exc:
            notes.append(str(exc))
    return PredictionReport(
        alpha=alpha,
        F_inv_alpha=f_inv,
        P_rho=p_rho,
        arc_lower=max(0.0, 1.0 / 12.0 - alpha),
        gamma_count=gamma,
        li_window=window,
        closure_defect=closure,
        t_min=t_min(alpha) if alpha >= ALPHA_GAMMA else None,
        T_threshold=T_threshold(alpha) if alpha > ALPHA_CRIT else None,
        k=k,
        notes=tuple(notes),
    )


def _segment(segment: str) -> str:
    s = segment.lower()
    if s in ("l_rho", "lrho", "rho"):
        return "L_rho"
    if s in ("l_i", "li", "i"):
        return "L_i"
    raise ValueError(f"segment must be L_rho or L_i, got {segment!r}")
