"""Command-line interface.

Subcommands: gen, scan, identify, boundary, calibrate, power, profile and
scanset.  All randomness enters through the explicit --seed flag, outputs
carry a schema_version field, and configuration or input errors exit
nonzero with a JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .core import ONE_SIDED, TWO_SIDED, DataMatrix
from .scanset import build_scan_set
from .boundary import b_aligned_branch, b_hetero
from .gof import (
    ALR,
    PBJ,
    PHC,
    default_scan_threshold,
    penalized_scan,
    report_from_dict,
    report_to_dict,
)
from .alr import (
    AlrConfig,
    alr_statistic,
    default_alr_threshold,
    likelihood_profile_over_beta,
    likelihood_profile_over_j,
)
from .identify import IdentificationConfig, identify
from .sim import (
    SignalModel,
    calibrate,
    estimate_errors,
    generate,
    model_from_dict,
    model_to_dict,
)

SCHEMA_VERSION = 1


class CliError(Exception):
    """Configuration or input problem reported as JSON on stderr."""


class _JsonArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        _fail("usage", message, code=2)


def _fail(kind: str, message: str, code: int = 1):
    json.dump({"error": kind, "message": message}, sys.stderr)
    sys.stderr.write("\n")
    raise SystemExit(code)


def _load_matrix(path: str) -> DataMatrix:
    p = Path(path)
    if not p.exists():
        raise CliError(f"input file not found: {path}")
    try:
        if p.suffix == ".bin":
            return DataMatrix.from_binary(p)
        return DataMatrix.from_csv(p)
    except ValueError as exc:
        raise CliError(f"malformed input {path}: {exc}") from exc


def _save_matrix(data: DataMatrix, path: str) -> None:
    if Path(path).suffix == ".bin":
        data.to_binary(path)
    else:
        data.to_csv(path)


def _load_model(path: str) -> SignalModel:
    try:
        doc = json.loads(Path(path).read_text())
        return model_from_dict(doc)
    except FileNotFoundError as exc:
        raise CliError(f"model file not found: {path}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CliError(f"malformed model {path}: {exc}") from exc


def _parse_grid(text: str) -> list[float]:
    """Comma list 'a,b,c' or range 'start:stop:count' (inclusive endpoints)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise CliError(f"grid ranges take the form start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise CliError(f"grid count must be >= 1, got {count}")
        return list(np.linspace(start, stop, count))
    try:
        return [float(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise CliError(f"malformed grid {text!r}: {exc}") from exc


def _resolve_threshold(spec: str, kind: str, n_rows: int, quantile: float) -> float:
    if spec == "lemma":
        return (
            default_alr_threshold(n_rows) if kind == ALR else default_scan_threshold(n_rows)
        )
    if spec.startswith("value:"):
        try:
            return float(spec.split(":", 1)[1])
        except ValueError as exc:
            raise CliError(f"malformed threshold {spec!r}") from exc
    if spec.startswith("file:"):
        path = spec.split(":", 1)[1]
        try:
            doc = json.loads(Path(path).read_text())
        except (FileNotFoundError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read calibration table {path}: {exc}") from exc
        table = {float(q): float(v) for q, v in doc.get("quantiles", [])}
        if quantile not in table:
            raise CliError(
                f"calibration table {path} has no quantile {quantile}; "
                f"available: {sorted(table)}"
            )
        return table[quantile]
    raise CliError(
        f"threshold must be 'lemma', 'value:X' or 'file:PATH', got {spec!r}"
    )


def _sided(flag: str) -> str:
    return ONE_SIDED if flag == "one" else TWO_SIDED


def _write_json(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


# -- subcommand handlers -------------------------------------------------------


def _cmd_gen(args) -> int:
    model = _load_model(args.model)
    data, truth = generate(model, args.seed)
    _save_matrix(data, args.output)
    if args.truth:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "seed": args.seed,
            "segments": [
                {
                    "start": seg.interval.start,
                    "length": seg.interval.length,
                    "carriers": carriers.tolist(),
                }
                for seg, carriers in zip(model.segments, truth)
            ],
        }
        _write_json(doc, args.truth)
    return 0


def _cmd_scan(args) -> int:
    data = _load_matrix(args.input)
    scan_set = build_scan_set(data.n_cols)
    threshold = _resolve_threshold(args.threshold, args.stat, data.n_rows, args.quantile)
    if args.stat == ALR:
        report = alr_statistic(
            data,
            scan_set,
            AlrConfig(quadrature_nodes=args.quadrature_nodes),
            threshold=threshold,
        )
    else:
        report = penalized_scan(
            data, scan_set, kind=args.stat, sided=_sided(args.sided), threshold=threshold
        )
    doc = report_to_dict(report)
    if not args.records:
        doc["records"] = []
    _write_json(doc, args.output)
    if args.intervals_csv:
        with open(args.intervals_csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "j", "l", "raw", "penalty", "penalized", "arg_n"])
            for rec in report.records:
                writer.writerow(
                    [
                        rec.level,
                        rec.interval.start,
                        rec.interval.length,
                        repr(rec.raw),
                        repr(rec.penalty),
                        repr(rec.penalized),
                        rec.arg_n,
                    ]
                )
    return 0


def _cmd_identify(args) -> int:
    try:
        doc = json.loads(Path(args.input).read_text())
        report = report_from_dict(doc)
    except FileNotFoundError as exc:
        raise CliError(f"report not found: {args.input}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CliError(f"malformed report {args.input}: {exc}") from exc
    if not report.records:
        raise CliError(
            "report carries no per-interval records; rerun scan with --records"
        )
    segments = identify(report, IdentificationConfig(args.c, args.f))
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "j", "l", "score"])
        for rank, (iv, score) in enumerate(segments.segments, start=1):
            writer.writerow([rank, iv.start, iv.length, repr(score)])
    return 0


def _cmd_boundary(args) -> int:
    betas = _parse_grid(args.beta_grid)
    zetas = _parse_grid(args.zeta_grid)
    taus = _parse_grid(args.tau_grid)
    rows = []
    for beta in betas:
        for zeta in zetas:
            for tau in taus:
                try:
                    if tau == 0.0:
                        value, branch = b_aligned_branch(args.n, beta, zeta)
                    else:
                        value = b_hetero(args.n, beta, zeta, tau)
                        branch = "hetero"
                except ValueError as exc:
                    raise CliError(str(exc)) from exc
                row = [beta, zeta, tau, value, branch]
                if args.ell is not None:
                    row.append(value / math.sqrt(args.ell))
                rows.append(row)
    header = ["beta", "zeta", "tau", "b", "branch"]
    if args.ell is not None:
        header.append("b_per_probe")
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.6g}" if isinstance(v, float) else v for v in row])
    return 0


def _cmd_calibrate(args) -> int:
    table = calibrate(
        n_rows=args.n,
        n_cols=args.t,
        kind=args.stat,
        reps=args.reps,
        quantiles=_parse_grid(args.quantiles),
        seed=args.seed,
        sided=_sided(args.sided),
        workers=args.workers,
        quadrature_nodes=args.quadrature_nodes,
    )
    doc = {
        "schema_version": SCHEMA_VERSION,
        "statistic": table.statistic,
        "n_rows": table.n_rows,
        "n_cols": table.n_cols,
        "replicates": table.replicates,
        "seed": table.seed,
        "quantiles": [[q, v] for q, v in table.quantiles],
    }
    _write_json(doc, args.output)
    return 0


def _cmd_power(args) -> int:
    base = _load_model(args.model)
    if not base.segments:
        raise CliError("power studies need a model with at least one segment")
    multiples = _parse_grid(args.mu_multiples)
    n_grid = [int(n) for n in _parse_grid(args.n_grid)] if args.n_grid else [base.n_rows]
    rows = []
    for n_rows in n_grid:
        for kappa in multiples:
            doc = model_to_dict(base)
            doc["n_rows"] = n_rows
            for seg in doc["segments"]:
                seg["mu"] = None
                seg["mu_multiple"] = kappa
            model = model_from_dict(doc)
            threshold = None
            if args.threshold != "lemma":
                threshold = _resolve_threshold(
                    args.threshold, args.stat, n_rows, args.quantile
                )
            summary = estimate_errors(
                model,
                kind=args.stat,
                threshold=threshold,
                reps=args.reps,
                seed=args.seed,
                sided=_sided(args.sided),
                workers=args.workers,
                quadrature_nodes=args.quadrature_nodes,
            )
            rows.append(
                {
                    "n_rows": n_rows,
                    "mu_multiple": kappa,
                    "statistic": summary.statistic,
                    "threshold": summary.threshold,
                    "replicates": summary.replicates,
                    "type_i_rate": summary.type_i_rate,
                    "type_ii_rate": summary.type_ii_rate,
                    "type_i_se": summary.type_i_se,
                    "type_ii_se": summary.type_ii_se,
                }
            )
    _write_json({"schema_version": SCHEMA_VERSION, "seed": args.seed, "grid": rows},
                args.output)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    return 0


def _cmd_profile(args) -> int:
    data = _load_matrix(args.input)
    if not 1 <= args.ell <= data.n_cols:
        raise CliError(
            f"--ell must lie in [1, {data.n_cols}] for this input, got {args.ell}"
        )
    cfg = AlrConfig(quadrature_nodes=args.quadrature_nodes)
    starts, log_profile, linear = likelihood_profile_over_j(data, args.ell, cfg)
    with open(args.output_j, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j", "logL", "L"])
        for j, lv, v in zip(starts, log_profile, linear):
            writer.writerow([int(j), repr(float(lv)), repr(float(v))])
    j_hat = int(starts[int(np.argmax(log_profile))]) if args.j is None else args.j
    betas = np.array(_parse_grid(args.beta_grid))
    log_beta = likelihood_profile_over_beta(data, args.ell, j_hat, betas)
    with open(args.output_beta, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["beta", "logL"])
        for b, lv in zip(betas, log_beta):
            writer.writerow([f"{b:.10g}", repr(float(lv))])
    best = int(np.argmax(log_beta))
    _write_json(
        {
            "schema_version": SCHEMA_VERSION,
            "ell": args.ell,
            "j_hat": j_hat,
            "beta_hat": float(betas[best]),
            "carrier_fraction_hat": float(data.n_rows ** -betas[best]),
        },
        args.summary,
    )
    return 0


def _cmd_scanset(args) -> int:
    scan_set = build_scan_set(args.t)
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "d", "j", "l"])
        for level in scan_set.levels:
            for iv in level.intervals:
                writer.writerow([level.index, level.spacing, iv.start, iv.length])
    return 0


# -- parser ---------------------------------------------------------------------


def _add_common_scan_flags(p) -> None:
    p.add_argument("--stat", choices=[PHC, PBJ, ALR], default=PBJ)
    p.add_argument("--sided", choices=["one", "two"], default="one")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--quadrature-nodes", type=int, default=64,
                   help="Gauss-Legendre nodes per piece of the ALR beta integral")


def build_parser() -> argparse.ArgumentParser:
    parser = _JsonArgumentParser(prog="alignedscan")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="draw a data matrix from a signal model")
    p.add_argument("--model", required=True, help="SignalModel JSON")
    p.add_argument("--output", required=True, help=".csv or .bin matrix path")
    p.add_argument("--truth", help="write carrier rows per segment as JSON")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_gen)

    p = sub.add_parser("scan", help="run one penalized or ALR scan")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="report JSON (stdout when omitted)")
    p.add_argument("--threshold", default="lemma",
                   help="'lemma', 'value:X' or 'file:PATH' (calibration table)")
    p.add_argument("--quantile", type=float, default=0.95,
                   help="quantile looked up in a calibration table threshold")
    p.add_argument("--intervals-csv", help="per-interval CSV dump")
    p.add_argument("--records", action="store_true",
                   help="embed per-interval records in the report JSON")
    _add_common_scan_flags(p)
    p.set_defaults(handler=_cmd_scan)

    p = sub.add_parser("identify", help="threshold + prune a scan report")
    p.add_argument("--input", required=True, help="report JSON with records")
    p.add_argument("--output", required=True, help="segments CSV")
    p.add_argument("--c", type=float, required=True, help="score threshold")
    p.add_argument("--f", type=float, default=0.0, help="overlap fraction")
    p.set_defaults(handler=_cmd_identify)

    p = sub.add_parser("boundary", help="tabulate detection boundaries")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta-grid", required=True, help="'a,b,c' or start:stop:count")
    p.add_argument("--zeta-grid", default="0")
    p.add_argument("--tau-grid", default="0")
    p.add_argument("--ell", type=int, help="adds a boundary/sqrt(ell) column")
    p.add_argument("--output", required=True)
    p.set_defaults(handler=_cmd_boundary)

    p = sub.add_parser("calibrate", help="empirical null quantiles")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--quantiles", default="0.9,0.95,0.99")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="table JSON (stdout when omitted)")
    _add_common_scan_flags(p)
    p.set_defaults(handler=_cmd_calibrate)

    p = sub.add_parser("power", help="error rates over a (mu multiple x N) grid")
    p.add_argument("--model", required=True)
    p.add_argument("--mu-multiples", default="0.5,1,1.5,2")
    p.add_argument("--n-grid", help="overrides the model's N")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", default="lemma")
    p.add_argument("--quantile", type=float, default=0.95)
    p.add_argument("--output", help="summary JSON (stdout when omitted)")
    p.add_argument("--csv", help="summary CSV")
    _add_common_scan_flags(p)
    p.set_defaults(handler=_cmd_power)

    p = sub.add_parser("profile", help="window and sparsity likelihood profiles")
    p.add_argument("--input", required=True)
    p.add_argument("--ell", type=int, required=True, help="profile window length")
    p.add_argument("--j", type=int, help="fix the window start for the beta profile")
    p.add_argument("--beta-grid", default="0.01:0.99:197")
    p.add_argument("--output-j", required=True)
    p.add_argument("--output-beta", required=True)
    p.add_argument("--summary", help="summary JSON (stdout when omitted)")
    p.add_argument("--quadrature-nodes", type=int, default=64)
    p.set_defaults(handler=_cmd_profile)

    p = sub.add_parser("scanset", help="dump the scanning family as CSV")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(handler=_cmd_scanset)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except CliError as exc:
        _fail("config", str(exc))
    except ValueError as exc:
        _fail("config", str(exc))
    except FloatingPointError as exc:
        _fail("numeric", str(exc))
    except OSError as exc:
        _fail("io", str(exc))
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
