"""Generative models and the Monte Carlo harness.

Data are standard normal noise; under the alternative each of a set of
disjoint windows recruits every row independently with its carrier
probability, and carriers gain a per-probe mean shift mu / sqrt(length),
plus fresh per-probe variance tau when the signal is heteroscedastic.
Replicates run on counter-based streams derived from one master seed, so
results are independent of execution order and worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import ONE_SIDED, DataMatrix, Interval
from .boundary import b_hetero, zeta_of_scale
from .gof import ALR, PBJ, PHC, default_scan_threshold, scan_records
from .alr import AlrConfig, alr_statistic, default_alr_threshold
from .scanset import ScanSet, build_scan_set

__all__ = [
    "SegmentSpec",
    "SignalModel",
    "MonteCarloSummary",
    "CalibrationTable",
    "generate",
    "estimate_errors",
    "calibrate",
    "model_to_dict",
    "model_from_dict",
]


@dataclass(frozen=True)
class SegmentSpec:
    """One signal segment of the alternative hypothesis.

    The carrier probability is N^(-beta + epsilon) with signed epsilon:
    positive epsilon puts the model on the detectable side of the boundary,
    negative on the undetectable side.  ``zeta`` defaults to the exponent
    derived from the window scale; ``mu`` defaults to ``mu_multiple`` times
    the detection boundary at (beta, zeta, tau).
    """

    interval: Interval
    beta: float
    epsilon: float = 0.0
    zeta: Optional[float] = None
    mu: Optional[float] = None
    mu_multiple: float = 1.0
    tau: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.tau < 0.0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if self.mu is not None and self.mu < 0.0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        if self.mu_multiple < 0.0:
            raise ValueError(f"mu_multiple must be >= 0, got {self.mu_multiple}")


@dataclass(frozen=True)
class SignalModel:
    """Dimensions plus pairwise-disjoint signal segments."""

    n_rows: int
    n_cols: int
    segments: Tuple[SegmentSpec, ...] = ()

    def __post_init__(self) -> None:
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError(
                f"model dimensions must be >= 1, got {self.n_rows}x{self.n_cols}"
            )
        spans = []
        for seg in self.segments:
            if not seg.interval.fits(self.n_cols):
                raise ValueError(
                    f"segment {seg.interval} does not fit in {self.n_cols} columns"
                )
            prob = self.carrier_prob(seg)
            if not 0.0 <= prob <= 1.0:
                raise ValueError(
                    f"carrier probability {prob} outside [0, 1] for beta={seg.beta}, "
                    f"epsilon={seg.epsilon}"
                )
            self.segment_mu(seg)  # fail fast on unresolvable amplitudes
            spans.append((seg.interval.start, seg.interval.end))
        spans.sort()
        for (_, end), (start, _) in zip(spans[:-1], spans[1:]):
            if start < end:
                raise ValueError("signal segments must be pairwise disjoint")

    def carrier_prob(self, seg: SegmentSpec) -> float:
        return self.n_rows ** (-seg.beta + seg.epsilon)

    def segment_zeta(self, seg: SegmentSpec) -> float:
        if seg.zeta is not None:
            return seg.zeta
        return zeta_of_scale(self.n_rows, self.n_cols, seg.interval.length)

    def segment_mu(self, seg: SegmentSpec) -> float:
        if seg.mu is not None:
            return seg.mu
        return seg.mu_multiple * b_hetero(
            self.n_rows, seg.beta, self.segment_zeta(seg), seg.tau
        )

    def null(self) -> "SignalModel":
        return SignalModel(self.n_rows, self.n_cols, ())


@dataclass(frozen=True)
class MonteCarloSummary:
    """Empirical Type I / Type II rates with binomial standard errors."""

    statistic: str
    threshold: float
    replicates: int
    type_i_rate: float
    type_ii_rate: float
    type_i_se: float
    type_ii_se: float
    seed: int
    replicate_keys: Tuple[Tuple[int, int], ...] = field(repr=False, default=())


@dataclass(frozen=True)
class CalibrationTable:
    """Empirical null quantiles usable as scan threshold overrides."""

    statistic: str
    n_rows: int
    n_cols: int
    replicates: int
    seed: int
    quantiles: Tuple[Tuple[float, float], ...]  # (level, value), sorted by level

    def value_at(self, level: float) -> float:
        for q, v in self.quantiles:
            if math.isclose(q, level, rel_tol=0.0, abs_tol=1e-12):
                return v
        raise KeyError(f"quantile {level} not present in the table")


def replicate_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based stream for one replicate of one experiment arm."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))
    )


def generate(
    model: SignalModel, seed: int, rep: int = 0
) -> Tuple[DataMatrix, List[np.ndarray]]:
    """Draw one data matrix and the per-segment carrier rows.

    Noise is drawn first, so a model with zero carrier probability (or zero
    mu and tau) reproduces the pure-noise matrix of the same stream
    entry for entry.
    """
    return _generate_with_rng(model, replicate_rng(seed, rep))


def _generate_with_rng(
    model: SignalModel, rng: np.random.Generator
) -> Tuple[DataMatrix, List[np.ndarray]]:
    x = rng.standard_normal((model.n_rows, model.n_cols))
    truth: List[np.ndarray] = []
    for seg in model.segments:
        prob = model.carrier_prob(seg)
        carriers = np.flatnonzero(rng.random(model.n_rows) < prob)
        truth.append(carriers)
        if carriers.size:
            iv = seg.interval
            shift = model.segment_mu(seg) / math.sqrt(iv.length)
            if seg.tau == 0.0:
                x[carriers, iv.start : iv.end] += shift
            else:
                x[carriers, iv.start : iv.end] += rng.normal(
                    loc=shift,
                    scale=math.sqrt(seg.tau),
                    size=(carriers.size, iv.length),
                )
    return DataMatrix(x), truth


def _log_threshold(threshold: float) -> float:
    return math.log(threshold) if threshold > 0 else float("-inf")


def _statistic_value(
    kind: str,
    data: DataMatrix,
    scan_set: ScanSet,
    sided: str,
    alr_cfg: Optional[AlrConfig],
) -> float:
    """Global scan value; for the ALR this is the log of the statistic."""
    if kind in (PHC, PBJ):
        records = scan_records(data, scan_set, sided)[kind]
        return max((rec.penalized for rec in records), default=float("-inf"))
    if kind == ALR:
        report = alr_statistic(data, scan_set, alr_cfg)
        return float(report.log_global_value)
    raise ValueError(f"unknown statistic kind {kind!r}")


def _default_threshold(kind: str, n_rows: int) -> float:
    return default_alr_threshold(n_rows) if kind == ALR else default_scan_threshold(n_rows)


def _mc_chunk(args) -> List[Tuple[int, int, float]]:
    """Worker: statistic values for (arm, rep) pairs; arm 0 is H0, 1 is H1."""
    model_doc, kind, sided, seed, tasks, nodes = args
    model = model_from_dict(model_doc)
    scan_set = build_scan_set(model.n_cols)
    alr_cfg = AlrConfig(quadrature_nodes=nodes) if kind == ALR else None
    out = []
    for arm, rep in tasks:
        arm_model = model.null() if arm == 0 else model
        data, _ = _generate_with_rng(arm_model, replicate_rng(seed, arm, rep))
        out.append((arm, rep, _statistic_value(kind, data, scan_set, sided, alr_cfg)))
    return out


def _run_tasks(
    model: SignalModel,
    kind: str,
    sided: str,
    seed: int,
    tasks: List[Tuple[int, int]],
    workers: int,
    nodes: int,
) -> Dict[Tuple[int, int], float]:
    if workers <= 1:
        chunks = [tasks]
    else:
        step = max(1, math.ceil(len(tasks) / workers))
        chunks = [tasks[i : i + step] for i in range(0, len(tasks), step)]
    args = [(model_to_dict(model), kind, sided, seed, chunk, nodes) for chunk in chunks]
    results: Dict[Tuple[int, int], float] = {}
    if workers <= 1:
        outputs = [_mc_chunk(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_mc_chunk, args))
    for chunk_out in outputs:
        for arm, rep, value in chunk_out:
            results[(arm, rep)] = value
    return results


def estimate_errors(
    model: SignalModel,
    kind: str,
    threshold: Optional[float] = None,
    reps: int = 200,
    seed: int = 0,
    sided: str = ONE_SIDED,
    workers: int = 1,
    quadrature_nodes: int = 64,
) -> MonteCarloSummary:
    """Empirical Type I and Type II rates of one statistic at one threshold.

    Runs ``reps`` null replicates and ``reps`` replicates of ``model``, each
    on its own stream.  The ALR comparison happens in the log domain, so
    thresholds of 0, -inf (always reject) and +inf (never reject) behave as
    expected for every statistic.
    """
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    thr = _default_threshold(kind, model.n_rows) if threshold is None else float(threshold)
    cut = _log_threshold(thr) if kind == ALR else thr
    tasks = [(arm, rep) for arm in (0, 1) for rep in range(reps)]
    values = _run_tasks(model, kind, sided, seed, tasks, workers, quadrature_nodes)
    h0_reject = sum(values[(0, rep)] >= cut for rep in range(reps))
    h1_reject = sum(values[(1, rep)] >= cut for rep in range(reps))
    type_i = h0_reject / reps
    type_ii = 1.0 - h1_reject / reps
    return MonteCarloSummary(
        statistic=kind,
        threshold=thr,
        replicates=reps,
        type_i_rate=type_i,
        type_ii_rate=type_ii,
        type_i_se=math.sqrt(type_i * (1.0 - type_i) / reps),
        type_ii_se=math.sqrt(type_ii * (1.0 - type_ii) / reps),
        seed=seed,
        replicate_keys=tuple((arm, rep) for arm, rep in tasks),
    )


def calibrate(
    n_rows: int,
    n_cols: int,
    kind: str,
    reps: int = 500,
    quantiles: Sequence[float] = (0.9, 0.95, 0.99),
    seed: int = 0,
    sided: str = ONE_SIDED,
    workers: int = 1,
    quadrature_nodes: int = 64,
) -> CalibrationTable:
    """Empirical null quantiles of a statistic at the given dimensions.

    Quantile q maps to the order statistic of rank ceil(q * reps) of the
    sorted null values (ranks clamp to [1, reps], so q = 1 is the maximum).
    ALR quantiles are reported on the linear scale of the statistic.
    """
    if reps < 100:
        raise ValueError(f"calibration needs reps >= 100, got {reps}")
    levels = sorted(set(float(q) for q in quantiles))
    if not levels or levels[0] < 0.0 or levels[-1] > 1.0:
        raise ValueError(f"quantile levels must lie in [0, 1], got {quantiles}")
    model = SignalModel(n_rows, n_cols)
    tasks = [(0, rep) for rep in range(reps)]
    values = _run_tasks(model, kind, sided, seed, tasks, workers, quadrature_nodes)
    stats = np.sort(np.array([values[(0, rep)] for rep in range(reps)]))
    if kind == ALR:
        with np.errstate(over="ignore"):
            stats = np.exp(stats)
    entries = []
    for q in levels:
        rank = min(max(math.ceil(q * reps), 1), reps)
        entries.append((q, float(stats[rank - 1])))
    return CalibrationTable(
        statistic=kind,
        n_rows=n_rows,
        n_cols=n_cols,
        replicates=reps,
        seed=seed,
        quantiles=tuple(entries),
    )


# -- model (de)serialization --------------------------------------------------


def model_to_dict(model: SignalModel) -> dict:
    return {
        "schema_version": 1,
        "n_rows": model.n_rows,
        "n_cols": model.n_cols,
        "segments": [
            {
                "start": seg.interval.start,
                "length": seg.interval.length,
                "beta": seg.beta,
                "epsilon": seg.epsilon,
                "zeta": seg.zeta,
                "mu": seg.mu,
                "mu_multiple": seg.mu_multiple,
                "tau": seg.tau,
            }
            for seg in model.segments
        ],
    }


def model_from_dict(doc: dict) -> SignalModel:
    segments = tuple(
        SegmentSpec(
            interval=Interval(int(seg["start"]), int(seg["length"])),
            beta=float(seg["beta"]),
            epsilon=float(seg.get("epsilon", 0.0)),
            zeta=None if seg.get("zeta") is None else float(seg["zeta"]),
            mu=None if seg.get("mu") is None else float(seg["mu"]),
            mu_multiple=float(seg.get("mu_multiple", 1.0)),
            tau=float(seg.get("tau", 0.0)),
        )
        for seg in doc.get("segments", [])
    )
    return SignalModel(int(doc["n_rows"]), int(doc["n_cols"]), segments)
