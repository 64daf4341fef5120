"""Command-line front end.

    poincare-zeros reproduce-table [--k 1200 --m 90]
    poincare-zeros predict --k 1200 --m 90
    poincare-zeros scan --segment arc --k 1200 --m 90
    poincare-zeros count --rect 0 0.5 1.7 2.1
    poincare-zeros dominance --alpha 0.075 --grid 200 200
    poincare-zeros catalog --k 1200 --m 90

Every artifact is {"meta": {...}, "records": [...]} (JSON) or a header plus rows
(CSV).  Reals are written as decimal strings carrying the working precision.
Exit codes: 0 ok, 1 mismatch, 2 configuration error, 3 certification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import mpmath

from . import __version__, predict, zeros
from .lattice import TermIndex
from .logcx import DEFAULT_BITS, NATIVE_BITS, Precision
from .series import DEFAULT_REL_TOL, CannotCertifyError, RealityCertificateError

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_CERT = 0, 1, 2, 3

# (re, im, log10 deviation) as printed, two decimals
PAPER_TABLE = (
    (0.48, 2.01, -4.66),
    (0.44, 1.99, -7.58),
    (0.40, 1.96, -12.00),
    (0.35, 1.94, -13.88),
    (0.30, 1.91, -15.80),
    (0.25, 1.88, -16.24),
    (0.19, 1.86, -16.81),
    (0.12, 1.84, -16.22),
    (0.04, 1.82, -16.52),
)
TABLE_POS_TOL = 0.005
TABLE_RECT = (0.0, 0.5, 1.0, 3.0)
# binary64 roundoff of 2 pi alpha y near y = 2: 8 ulp(0.95) ~ 10^-15.05
REFERENCE_FLOOR_LOG10 = math.log10(8.0 * math.ulp(0.95))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    k: int
    m: int
    precision_bits: int
    rel_tol: float
    output_format: str
    output_path: Optional[str]
    alpha: Optional[float] = None

    def __post_init__(self) -> None:
        if self.k < 12 or self.k % 2:
            raise ConfigError(f"--k: expected an even integer >= 12, got {self.k}")
        if self.m < 0:
            raise ConfigError(f"--m: expected an integer >= 0, got {self.m}")
        if self.precision_bits < NATIVE_BITS:
            raise ConfigError(f"--precision-bits: expected >= {NATIVE_BITS}, got {self.precision_bits}")
        if not (0 < self.rel_tol <= 1e-3):
            raise ConfigError(f"--rel-tol: expected a value in (0, 1e-3], got {self.rel_tol}")
        if self.output_format not in ("json", "csv"):
            raise ConfigError(f"--format: expected json or csv, got {self.output_format}")
        if self.alpha is not None and not self.alpha > 0:
            raise ConfigError(f"--alpha: expected a positive value, got {self.alpha}")

    @property
    def precision(self) -> Precision:
        return Precision(self.precision_bits)

    @property
    def effective_alpha(self) -> float:
        return self.alpha if self.alpha is not None else self.m / self.k


# --------------------------------------------------------------------------- serialization


def fmt_real(v: Any, bits: int) -> Optional[str]:
    """Decimal string: shortest round-trip for binary64, enough digits for bits otherwise."""
    if v is None:
        return None
    if isinstance(v, mpmath.mpf):
        return mpmath.libmp.to_str(v._mpf_, math.ceil(bits * math.log10(2.0)) + 1)
    return repr(float(v))


def _cell(v: Any, bits: int) -> Any:
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, int):
        return v
    return fmt_real(v, bits)


def normalize_record(rec: dict, bits: int) -> dict:
    return {key: _cell(val, bits) for key, val in rec.items()}


def meta_of(cfg: RunConfig) -> dict:
    bits = cfg.precision_bits
    if cfg.alpha is not None:
        alpha = repr(float(cfg.alpha))
    elif bits > NATIVE_BITS:
        with cfg.precision.context():
            alpha = fmt_real(mpmath.mpf(cfg.m) / cfg.k, bits)
    else:
        alpha = repr(cfg.m / cfg.k)
    return {"k": cfg.k, "m": cfg.m, "alpha": alpha, "precision_bits": bits, "version": __version__}


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, ensure_ascii=True) + "\n"


def dump_csv(records: Sequence[dict]) -> str:
    buf = io.StringIO()
    if not records:
        return ""
    fields = list(records[0].keys())
    for r in records[1:]:
        fields += [f for f in r if f not in fields]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({f: ("" if r.get(f) is None else _csv_value(r.get(f))) for f in fields})
    return buf.getvalue()


def _csv_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def load(text: str, fmt: str) -> Any:
    """Parse an artifact written by this tool (reals stay decimal strings)."""
    if fmt == "json":
        return json.loads(text)
    return list(csv.DictReader(io.StringIO(text)))


def dump(doc: Any, fmt: str) -> str:
    """Inverse of load: load(dump(x)) re-emits identically."""
    if fmt == "json":
        return dump_json(doc)
    return dump_csv(doc)


def render(cfg: RunConfig, records: list[dict], extra: Optional[dict] = None) -> str:
    bits = cfg.precision_bits
    recs = [normalize_record(r, bits) for r in records]
    if cfg.output_format == "csv":
        return dump_csv(recs)
    doc = {"meta": meta_of(cfg), "records": recs}
    if extra:
        doc.update(extra)
    return dump_json(doc)


# --------------------------------------------------------------------------- records


def zero_to_dict(r: zeros.ZeroRecord) -> dict:
    return {
        "re": r.re,
        "im": r.im,
        "segment": r.segment,
        "method": r.method,
        "residual_log": r.residual_log,
        "half_width": r.half_width,
        "deviation": r.deviation,
        "weight": r.weight,
        "param": r.param,
        "precision_limited": r.precision_limited,
    }


def _log10_abs(v: Any) -> Optional[float]:
    if v is None or v == 0:
        return None
    return float(mpmath.log10(abs(v))) if isinstance(v, mpmath.mpf) else math.log10(abs(float(v)))


def table_target_half_width(bits: int) -> float:
    return max(math.ldexp(1.0, -(bits - 7)), 1e-18)


def reproduce_table(
    k: int,
    m: int,
    precision: Precision,
    rel_tol: float = DEFAULT_REL_TOL,
    rect: Sequence[float] = TABLE_RECT,
    target_half_width: Optional[float] = None,
) -> tuple[list[dict], list[str]]:
    """Non-real zeros in the rect, with deviations and the comparison to the printed table.

    Returns (rows, mismatches); mismatches is empty when the rows match.
    """
    hw = table_target_half_width(precision.bits) if target_half_width is None else target_half_width
    spec = zeros.RectSpec(*rect)
    recs = zeros.localize_in_rect(spec, k, m, hw, precision, rel_tol, alpha=m / k)
    recs = [r for r in recs if r.segment not in ("L_rho", "L_i", "arc")]
    alpha = m / k
    rows = []
    for i, r in enumerate(recs):
        dev = r.deviation
        if dev is None:
            dev = zeros.deviation_metric(zeros._zpoint(r.re, r.im, precision), alpha, precision)
        row = {
            "index": i + 1,
            "re": r.re,
            "im": r.im,
            "deviation": dev,
            "log10_deviation": _log10_abs(dev),
            "half_width": r.half_width,
            "residual_log": r.residual_log,
            "precision_limited": r.precision_limited,
        }
        rows.append(row)
    mismatches: list[str] = []
    if (k, m) == (1200, 90):
        if len(rows) != len(PAPER_TABLE):
            mismatches.append(f"found {len(rows)} non-real zeros, the table has {len(PAPER_TABLE)}")
        for row, (pre, pim, plog) in zip(rows, PAPER_TABLE):
            dre, dim = abs(float(row["re"]) - pre), abs(float(row["im"]) - pim)
            row["paper_re"], row["paper_im"], row["paper_log10_deviation"] = pre, pim, plog
            row["position_match"] = dre <= TABLE_POS_TOL and dim <= TABLE_POS_TOL
            row["reference_precision_limited"] = plog <= REFERENCE_FLOOR_LOG10
            if not row["position_match"]:
                mismatches.append(f"row {row['index']}: {float(row['re']):.4f}+{float(row['im']):.4f}i "
                                  f"vs {pre}+{pim}i")
    return rows, mismatches


def predict_record(rep: predict.PredictionReport) -> dict:
    w = rep.li_window
    out = {
        "alpha": rep.alpha,
        "F_inv_alpha": rep.F_inv_alpha,
        "P_rho": rep.P_rho,
        "arc_lower": rep.arc_lower,
        "gamma_count": rep.gamma_count,
        "closure_defect": rep.closure_defect,
        "t_min": rep.t_min,
        "T_threshold": rep.T_threshold,
        "li_window_A": w.A if w else None,
        "li_window_B": w.B if w else None,
    }
    if rep.k is not None:
        for key, val in rep.counts().items():
            out[f"expected_{key}"] = val
    out["notes"] = "; ".join(rep.notes)
    return out


def _idx(t: TermIndex) -> str:
    return f"({t.c},{t.d})"


def dominance_records(cells: Sequence[predict.DominanceCell], nx: int) -> list[dict]:
    out = []
    for n, cell in enumerate(cells):
        out.append({
            "ix": n % nx,
            "iy": n // nx,
            "x": cell.center.real,
            "y": cell.center.imag,
            "best": _idx(cell.best),
            "runner_up": _idx(cell.runner_up),
            "margin": cell.margin,
            "tie": cell.tie,
        })
    return out


# --------------------------------------------------------------------------- commands


def default_range(segment: str) -> tuple[float, float]:
    seg = zeros.normalize_segment(segment)
    if seg == "arc":
        return math.pi / 3, math.pi / 2
    if seg == "L_rho":
        return predict.SQRT3_2, 20.0
    return 1.0, 4.0


def cmd_reproduce_table(cfg: RunConfig, args: argparse.Namespace) -> tuple[list[dict], dict, int]:
    rect = tuple(args.rect) if args.rect else TABLE_RECT
    rows, mismatches = reproduce_table(cfg.k, cfg.m, cfg.precision, cfg.rel_tol, rect, args.target_half_width)
    for line in mismatches:
        print(f"mismatch: {line}", file=sys.stderr)
    return rows, {}, EXIT_MISMATCH if mismatches else EXIT_OK


def cmd_predict(cfg: RunConfig, args: argparse.Namespace) -> tuple[list[dict], dict, int]:
    rep = predict.expected_counts(cfg.k, cfg.m, cfg.alpha)
    return [predict_record(rep)], {}, EXIT_OK


def cmd_scan(cfg: RunConfig, args: argparse.Namespace) -> tuple[list[dict], dict, int]:
    seg = zeros.normalize_segment(args.segment)
    rng = tuple(args.range) if args.range else default_range(seg)
    prec = cfg.precision
    brackets = zeros.scan_segment(seg, rng, cfg.k, cfg.m, args.n_init, prec, cfg.rel_tol)
    recs = [zeros.refine_bisect(b, seg, cfg.k, cfg.m, args.tol, prec, cfg.rel_tol) for b in brackets]
    return [zero_to_dict(r) for r in recs], {}, EXIT_OK


def cmd_count(cfg: RunConfig, args: argparse.Namespace) -> tuple[list[dict], dict, int]:
    if not args.rect:
        raise ConfigError("--rect: required for count")
    rect = zeros.RectSpec(*args.rect)
    n = zeros.wind_count(rect, cfg.k, cfg.m, cfg.precision, cfg.rel_tol)
    rec = {"x_lo": rect.x_lo, "x_hi": rect.x_hi, "y_lo": rect.y_lo, "y_hi": rect.y_hi, "count": n}
    if args.quadrature:
        rec["quadrature"] = zeros.wind_count_quadrature(rect, cfg.k, cfg.m, Precision(NATIVE_BITS), cfg.rel_tol)
    return [rec], {}, EXIT_OK


def cmd_dominance(cfg: RunConfig, args: argparse.Namespace) -> tuple[list[dict], dict, int]:
    r = args.rect or (-0.5, 0.5, 1.0, 3.0)
    nx, ny = args.grid or (200, 200)
    if nx < 1 or ny < 1:
        raise ConfigError("--grid: expected positive sizes")
    cells = predict.dominance_map(zeros.RectSpec(*r), cfg.effective_alpha, nx, ny)
    return dominance_records(cells, nx), {}, EXIT_OK


def cmd_catalog(cfg: RunConfig, args: argparse.Namespace) -> tuple[list[dict], dict, int]:
    opts = zeros.CatalogOptions(precision=cfg.precision, rel_tol=cfg.rel_tol, lrho_ceiling=args.lrho_ceiling)
    cat = zeros.assemble_catalog(cfg.k, cfg.m, opts)
    acc = cat.accounting
    bits = cfg.precision_bits
    accounting = {
        "counts": {key: fmt_real(val, bits) for key, val in acc.counts.items()},
        "total": fmt_real(acc.total, bits),
        "expected": fmt_real(acc.expected, bits),
        "residue": fmt_real(acc.residue, bits),
        "notes": list(acc.notes),
    }
    return [zero_to_dict(r) for r in cat.records], {"accounting": accounting}, EXIT_OK


COMMANDS = {
    "reproduce-table": cmd_reproduce_table,
    "predict": cmd_predict,
    "scan": cmd_scan,
    "count": cmd_count,
    "dominance": cmd_dominance,
    "catalog": cmd_catalog,
}


def _default_bits() -> int:
    env = os.environ.get("POINCARE_PRECISION_BITS")
    if env is None:
        return DEFAULT_BITS
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"POINCARE_PRECISION_BITS: expected an integer, got {env!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", type=int, default=1200)
    common.add_argument("--m", type=int, default=90)
    common.add_argument("--alpha", type=float, default=None, help="overrides m/k for predict and dominance")
    common.add_argument("--precision-bits", type=int, default=None)
    common.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="output path (default stdout)")

    p = argparse.ArgumentParser(prog="poincare-zeros", description="Zeros of Poincare series P_{k,m}.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    t = sub.add_parser("reproduce-table", parents=[common])
    t.add_argument("--rect", type=float, nargs=4, metavar=("X0", "X1", "Y0", "Y1"))
    t.add_argument("--target-half-width", type=float, default=None)
    sub.add_parser("predict", parents=[common])
    s = sub.add_parser("scan", parents=[common])
    s.add_argument("--segment", required=True, choices=("lrho", "li", "arc"))
    s.add_argument("--range", type=float, nargs=2, metavar=("A", "B"))
    s.add_argument("--n-init", type=int, default=64)
    s.add_argument("--tol", type=float, default=1e-12)
    c = sub.add_parser("count", parents=[common])
    c.add_argument("--rect", type=float, nargs=4, metavar=("X0", "X1", "Y0", "Y1"))
    c.add_argument("--quadrature", action="store_true", help="also report the P'/P quadrature value")
    d = sub.add_parser("dominance", parents=[common])
    d.add_argument("--rect", type=float, nargs=4, metavar=("X0", "X1", "Y0", "Y1"))
    d.add_argument("--grid", type=int, nargs=2, metavar=("NX", "NY"))
    g = sub.add_parser("catalog", parents=[common])
    g.add_argument("--lrho-ceiling", type=float, default=150.0)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        bits = args.precision_bits if args.precision_bits is not None else _default_bits()
        cfg = RunConfig(args.k, args.m, bits, args.rel_tol, args.format, args.out, args.alpha)
        records, extra, code = COMMANDS[args.command](cfg, args)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CannotCertifyError, RealityCertificateError, zeros.BoundaryZeroSuspected, zeros.WindingError) as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return EXIT_CERT
    text = render(cfg, records, extra)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
