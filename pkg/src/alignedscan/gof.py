"""Goodness-of-fit kernels and the penalized scans.

Per window, the pooled scores are converted to p-values whose order
statistics feed either the higher-criticism standardization or the
binomial Kullback-Leibler divergence K.  Each window statistic is then
handicapped by a penalty growing with T/length, and the scan takes the
maximum over the multiscale family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .core import (
    ONE_SIDED,
    DataMatrix,
    Interval,
    build_prefix_sums,
    p_values,
)
from .scanset import ScanSet

__all__ = [
    "PHC",
    "PBJ",
    "ALR",
    "IntervalStatistic",
    "ScanReport",
    "penalty_base",
    "hc_penalty",
    "bj_penalty",
    "default_scan_threshold",
    "kl_berk_jones",
    "quadratic_q",
    "hc_interval",
    "bj_interval",
    "penalized_scan",
    "scan_records",
    "report_to_dict",
    "report_from_dict",
]

PHC = "phc"
PBJ = "pbj"
ALR = "alr"

NEG_INF = float("-inf")


@dataclass(frozen=True)
class IntervalStatistic:
    """Per-window scan record.

    ``raw`` is the window's statistic (higher criticism or N*K for the
    goodness-of-fit scans, the log beta-integral for the average likelihood
    ratio).  ``penalized = raw - penalty`` always; when no order statistic
    satisfies the statistic's constraints, ``raw`` is -inf and ``arg_n`` 0.
    """

    level: int
    interval: Interval
    raw: float
    penalty: float
    penalized: float
    arg_n: int


@dataclass(frozen=True)
class ScanReport:
    """Outcome of a full scan: per-window records plus the global decision."""

    kind: str
    n_rows: int
    n_cols: int
    sided: str
    threshold: float
    records: Tuple[IntervalStatistic, ...]
    global_value: float
    reject: bool
    log_global_value: Optional[float] = None  # ALR only


def penalty_base(length: int, n_cols: int) -> float:
    """The per-scale factor s = log(e T / l) = 1 + log(T / l)."""
    if not 1 <= length <= n_cols:
        raise ValueError(f"window length must lie in [1, {n_cols}], got {length}")
    return 1.0 + math.log(n_cols / length)


def hc_penalty(length: int, n_cols: int) -> float:
    """Higher-criticism scan handicap sqrt(s log s)."""
    s = penalty_base(length, n_cols)
    return math.sqrt(s * math.log(s))


def bj_penalty(length: int, n_cols: int) -> float:
    """Berk-Jones scan handicap s log s."""
    s = penalty_base(length, n_cols)
    return s * math.log(s)


def default_scan_threshold(n_rows: int) -> float:
    """Default rejection threshold 2 log N for both penalized scans."""
    return 2.0 * math.log(n_rows)


def kl_berk_jones(x: float, t: float) -> float:
    """Binomial Kullback-Leibler divergence K(x, t), zero for x < t.

    For x >= t:  x log(x/t) + (1-x) log((1-x)/(1-t)), with 0 log 0 = 0 at
    the endpoints x in {0, 1}.
    """
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie in (0, 1), got {t}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x < t:
        return 0.0
    if x == 1.0:
        return math.log(1.0 / t)
    first = 0.0 if x == 0.0 else x * math.log(x / t)
    return first + (1.0 - x) * math.log((1.0 - x) / (1.0 - t))


def quadratic_q(x: float, t: float) -> float:
    """Quadratic envelope Q(x, t) = (x - t)^2 / (2 t (1 - t))."""
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie in (0, 1), got {t}")
    return (x - t) ** 2 / (2.0 * t * (1.0 - t))


def _kl_columns(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Vectorized K on the x > t branch; caller guarantees 0 < t < x < 1."""
    return x * np.log(x / t) + (1.0 - x) * np.log((1.0 - x) / (1.0 - t))


def _column_stats(
    p_sorted: np.ndarray, n_rows: int, s: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """HC and BJ raw values for each column of sorted p-values.

    ``p_sorted`` holds the ascending order statistics; only ranks
    1 .. floor(N/2) enter either maximization.  Returns
    (hc_raw, hc_arg, bj_raw, bj_arg) with -inf / 0 for empty feasible sets.
    """
    half = n_rows // 2
    n_windows = p_sorted.shape[1]
    if half == 0:
        empty = np.full(n_windows, NEG_INF)
        zeros = np.zeros(n_windows, dtype=int)
        return empty, zeros, empty.copy(), zeros.copy()
    head = p_sorted[:half]
    ranks = np.arange(1, half + 1, dtype=float)[:, None] / n_rows

    with np.errstate(divide="ignore", invalid="ignore"):
        hc_terms = (ranks - head) / np.sqrt(head * (1.0 - head) / n_rows)
        hc_terms = np.where(head >= s / n_rows, hc_terms, NEG_INF)
        hc_raw = hc_terms.max(axis=0)
        hc_arg = np.where(np.isneginf(hc_raw), 0, hc_terms.argmax(axis=0) + 1)

        bj_feasible = head < ranks
        bj_terms = np.where(bj_feasible, n_rows * _kl_columns(ranks, head), NEG_INF)
        bj_raw = bj_terms.max(axis=0)
        bj_arg = np.where(np.isneginf(bj_raw), 0, bj_terms.argmax(axis=0) + 1)
    return hc_raw, hc_arg, bj_raw, bj_arg


def _stat_from_pvals(
    pvals: np.ndarray, length: int, n_cols: int, kind: str, interval: Interval, level: int
) -> IntervalStatistic:
    p_sorted = np.sort(np.asarray(pvals, dtype=float), kind="stable")[:, None]
    n_rows = p_sorted.shape[0]
    s = penalty_base(length, n_cols)
    hc_raw, hc_arg, bj_raw, bj_arg = _column_stats(p_sorted, n_rows, s)
    if kind == PHC:
        raw, arg, penalty = float(hc_raw[0]), int(hc_arg[0]), hc_penalty(length, n_cols)
    else:
        raw, arg, penalty = float(bj_raw[0]), int(bj_arg[0]), bj_penalty(length, n_cols)
    return IntervalStatistic(level, interval, raw, penalty, raw - penalty, arg)


def hc_interval(
    pvals,
    length: int,
    n_cols: int,
    interval: Optional[Interval] = None,
    level: int = 0,
) -> IntervalStatistic:
    """Higher-criticism statistic of one window from its p-values.

    Maximizes (n/N - p_(n)) / sqrt(p_(n) (1 - p_(n)) / N) over ranks
    n <= floor(N/2) with p_(n) >= s/N, where s = log(e T / l).
    """
    iv = interval if interval is not None else Interval(0, length)
    return _stat_from_pvals(np.asarray(pvals, dtype=float), length, n_cols, PHC, iv, level)


def bj_interval(
    pvals,
    length: int,
    n_cols: int,
    interval: Optional[Interval] = None,
    level: int = 0,
) -> IntervalStatistic:
    """Berk-Jones statistic N max K(n/N, p_(n)) of one window.

    The maximum runs over ranks n <= floor(N/2) with p_(n) < n/N.
    """
    iv = interval if interval is not None else Interval(0, length)
    return _stat_from_pvals(np.asarray(pvals, dtype=float), length, n_cols, PBJ, iv, level)


def _grouped_by_length(
    intervals: Iterable[Interval],
) -> Iterable[Tuple[int, List[Interval]]]:
    group: List[Interval] = []
    current = None
    for iv in intervals:
        if current is None or iv.length == current:
            group.append(iv)
            current = iv.length
        else:
            yield current, group
            group, current = [iv], iv.length
    if group:
        yield current, group


def scan_records(
    data: DataMatrix, scan_set: ScanSet, sided: str = ONE_SIDED
) -> Dict[str, List[IntervalStatistic]]:
    """Per-window HC and BJ records for the whole family, in one pass.

    Both statistics share the pooled scores and the sorted p-values of each
    window, so computing them together costs little more than one alone.
    Records are emitted in (level, length, start) order.
    """
    if data.n_cols != scan_set.n_cols:
        raise ValueError(
            f"data has {data.n_cols} columns but the scan set was built for "
            f"{scan_set.n_cols}"
        )
    n_rows, n_cols = data.n_rows, data.n_cols
    prefix = build_prefix_sums(data)
    table = prefix.table
    out: Dict[str, List[IntervalStatistic]] = {PHC: [], PBJ: []}
    for level in scan_set.levels:
        for length, group in _grouped_by_length(level.intervals):
            starts = np.array([iv.start for iv in group])
            sums = table[:, starts + length] - table[:, starts]
            scores = sums / math.sqrt(length)
            p_sorted = np.sort(p_values(scores, sided), axis=0, kind="stable")
            s = penalty_base(length, n_cols)
            hc_raw, hc_arg, bj_raw, bj_arg = _column_stats(p_sorted, n_rows, s)
            pen_hc = hc_penalty(length, n_cols)
            pen_bj = bj_penalty(length, n_cols)
            for k, iv in enumerate(group):
                out[PHC].append(
                    IntervalStatistic(
                        level.index, iv, float(hc_raw[k]), pen_hc,
                        float(hc_raw[k]) - pen_hc, int(hc_arg[k]),
                    )
                )
                out[PBJ].append(
                    IntervalStatistic(
                        level.index, iv, float(bj_raw[k]), pen_bj,
                        float(bj_raw[k]) - pen_bj, int(bj_arg[k]),
                    )
                )
    return out


def _report_from_records(
    kind: str,
    records: List[IntervalStatistic],
    data: DataMatrix,
    sided: str,
    threshold: Optional[float],
) -> ScanReport:
    thr = default_scan_threshold(data.n_rows) if threshold is None else float(threshold)
    global_value = max((rec.penalized for rec in records), default=NEG_INF)
    return ScanReport(
        kind=kind,
        n_rows=data.n_rows,
        n_cols=data.n_cols,
        sided=sided,
        threshold=thr,
        records=tuple(records),
        global_value=global_value,
        reject=bool(global_value >= thr),
    )


def penalized_scan(
    data: DataMatrix,
    scan_set: ScanSet,
    kind: str = PBJ,
    sided: str = ONE_SIDED,
    threshold: Optional[float] = None,
) -> ScanReport:
    """Penalized scan of the whole family with the chosen statistic.

    The global value is the maximum over windows of the raw statistic minus
    its handicap (sqrt(s log s) for HC, s log s for BJ).  The default
    decision threshold is 2 log N.
    """
    if kind not in (PHC, PBJ):
        raise ValueError(f"kind must be {PHC!r} or {PBJ!r}, got {kind!r}")
    records = scan_records(data, scan_set, sided)[kind]
    return _report_from_records(kind, records, data, sided, threshold)


# -- report serialization ----------------------------------------------------


def _num_to_json(x: Optional[float]):
    if x is None:
        return None
    if math.isfinite(x):
        return x
    return {math.inf: "inf", -math.inf: "-inf"}.get(x, "nan")


def _num_from_json(x):
    if x is None:
        return None
    if isinstance(x, str):
        return float(x)
    return float(x)


def report_to_dict(report: ScanReport) -> dict:
    return {
        "schema_version": 1,
        "kind": report.kind,
        "n_rows": report.n_rows,
        "n_cols": report.n_cols,
        "sided": report.sided,
        "threshold": _num_to_json(report.threshold),
        "global_value": _num_to_json(report.global_value),
        "log_global_value": _num_to_json(report.log_global_value),
        "reject": report.reject,
        "records": [
            {
                "r": rec.level,
                "j": rec.interval.start,
                "l": rec.interval.length,
                "raw": _num_to_json(rec.raw),
                "penalty": _num_to_json(rec.penalty),
                "penalized": _num_to_json(rec.penalized),
                "arg_n": rec.arg_n,
            }
            for rec in report.records
        ],
    }


def report_from_dict(doc: dict) -> ScanReport:
    records = tuple(
        IntervalStatistic(
            level=int(rec["r"]),
            interval=Interval(int(rec["j"]), int(rec["l"])),
            raw=_num_from_json(rec["raw"]),
            penalty=_num_from_json(rec["penalty"]),
            penalized=_num_from_json(rec["penalized"]),
            arg_n=int(rec["arg_n"]),
        )
        for rec in doc["records"]
    )
    return ScanReport(
        kind=doc["kind"],
        n_rows=int(doc["n_rows"]),
        n_cols=int(doc["n_cols"]),
        sided=doc["sided"],
        threshold=_num_from_json(doc["threshold"]),
        records=records,
        global_value=_num_from_json(doc["global_value"]),
        reject=bool(doc["reject"]),
        log_global_value=_num_from_json(doc.get("log_global_value")),
    )
