"""Average-likelihood-ratio statistics.

For each window the simple likelihood ratio of a sparse mean shift is
evaluated with the carrier fraction pinned to N^-beta and the amplitude
pinned to the detection boundary at that beta, then averaged over beta by
Gauss-Legendre quadrature and over windows with weights that make the
whole statistic have null expectation at most one.  Everything is
accumulated in the log domain: products over hundreds of rows overflow
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .core import ONE_SIDED, DataMatrix, PooledScores, build_prefix_sums
from .boundary import b_aligned, b_single_sequence, zeta_of_scale
from .gof import ALR, IntervalStatistic, ScanReport, _grouped_by_length
from .scanset import ScanSet

__all__ = [
    "AlrConfig",
    "default_alr_threshold",
    "likelihood_ratio_term",
    "log_interval_likelihood",
    "alr_statistic",
    "alr_single_sequence",
    "alr_sparse_mixture",
    "likelihood_profile_over_j",
    "likelihood_profile_over_beta",
]

LOG_WEIGHT_NORM = math.log(6.0 / math.pi**2)
NEG_INF = float("-inf")


@dataclass(frozen=True)
class AlrConfig:
    """Quadrature settings for the beta integral.

    ``quadrature_nodes`` is the Gauss-Legendre node count per continuity
    piece of the boundary curve (the curve has kinks where its branch
    changes, so the integral is split there).  ``log_domain`` documents
    that products over rows and sums over windows are always accumulated
    as logarithms; it cannot be switched off.
    """

    quadrature_nodes: int = 64
    beta_range: Tuple[float, float] = (0.0, 1.0)
    log_domain: bool = True

    def __post_init__(self) -> None:
        if self.quadrature_nodes < 8:
            raise ValueError(
                f"quadrature_nodes must be >= 8, got {self.quadrature_nodes}"
            )
        if self.beta_range != (0.0, 1.0):
            raise ValueError("the beta integral runs over (0, 1); beta_range is fixed")
        if not self.log_domain:
            raise ValueError("log_domain accumulation is always on")


def default_alr_threshold(n_rows: int) -> float:
    """Default rejection threshold max(20, log N).

    The statistic has null mean at most one, so Markov's inequality caps the
    Type I error at 1/threshold; empirical null quantiles from the simulation
    module can override this.
    """
    return max(20.0, math.log(n_rows))


def likelihood_ratio_term(y: float, pi_star: float, mu: float) -> float:
    """Single-row likelihood ratio 1 - pi + pi exp(mu y - mu^2 / 2).

    Uses expm1 so tiny mixing fractions do not lose precision.
    """
    if not 0.0 <= pi_star <= 1.0:
        raise ValueError(f"pi_star must lie in [0, 1], got {pi_star}")
    if pi_star == 0.0 or mu == 0.0:
        return 1.0
    g = mu * y - 0.5 * mu * mu
    if g > 700.0:
        return math.inf
    return 1.0 + pi_star * math.expm1(g)


@lru_cache(maxsize=256)
def _beta_quadrature(
    n_seq: int, zeta: float, nodes_per_piece: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes over (0,1) split at the boundary's branch knots.

    Returns (betas, log_weights, mus) with mus[i] = b_aligned(N, betas[i], zeta).
    """
    knots = sorted({3.0 * (1.0 - zeta) / 4.0, 1.0 - zeta})
    edges = [0.0] + [k for k in knots if 0.0 < k < 1.0] + [1.0]
    x, w = np.polynomial.legendre.leggauss(nodes_per_piece)
    betas, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        betas.append(mid + half * x)
        weights.append(half * w)
    beta_arr = np.concatenate(betas)
    weight_arr = np.concatenate(weights)
    mu_arr = np.array([b_aligned(n_seq, float(b), zeta) for b in beta_arr])
    beta_arr.flags.writeable = False
    mu_arr.flags.writeable = False
    log_w = np.log(weight_arr)
    log_w.flags.writeable = False
    return beta_arr, log_w, mu_arr


def _log_mixture_terms(
    scores: np.ndarray, betas: np.ndarray, mus: np.ndarray, n_seq: int
) -> np.ndarray:
    """log prod_n L for every beta node: shape (nodes, n_windows).

    ``scores`` has shape (N, n_windows).  Each entry is
    sum_n log(1 - pi + pi e^(mu y - mu^2/2)) with pi = N^-beta, evaluated as
    logaddexp(log(1-pi), log pi + mu y - mu^2/2).  One (N, n_windows) buffer
    is reused across nodes; this loop is the hot path of every Monte Carlo
    run, so it avoids large broadcast temporaries.
    """
    log_n = math.log(n_seq)
    log_pi = -betas * log_n
    log_1m_pi = np.log1p(-np.exp(log_pi))
    out = np.empty((betas.size, scores.shape[1]))
    buf = np.empty_like(scores)
    for k in range(betas.size):
        np.multiply(scores, mus[k], out=buf)
        buf += log_pi[k] - 0.5 * mus[k] * mus[k]
        np.logaddexp(log_1m_pi[k], buf, out=buf)
        out[k] = buf.sum(axis=0)
    return out


def log_interval_likelihood(
    scores: PooledScores | np.ndarray,
    beta: float,
    n_seq: int,
    n_cols: int,
    length: int,
) -> float:
    """log prod_n L_n at one beta, with the amplitude pinned to the boundary.

    The carrier fraction is N^-beta and the amplitude is the aligned boundary
    at (beta, zeta) where zeta is derived from the window scale.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    y = scores.scores if isinstance(scores, PooledScores) else np.asarray(scores, float)
    zeta = zeta_of_scale(n_seq, n_cols, length)
    mu = b_aligned(n_seq, beta, zeta)
    log_pi = -beta * math.log(n_seq)
    g = log_pi + mu * y - 0.5 * mu * mu
    return float(np.logaddexp(math.log1p(-math.exp(log_pi)), g).sum())


def _check_finite(block: np.ndarray, level: int, length: int, starts, betas) -> None:
    if np.isnan(block).any():
        node, col = np.argwhere(np.isnan(block))[0]
        raise FloatingPointError(
            f"non-finite beta integrand at level r={level}, "
            f"j={int(starts[col])}, length={length}, beta={betas[node]:.6f}"
        )


def _weighted_window_terms(
    data: DataMatrix, scan_set: ScanSet, cfg: AlrConfig
) -> Tuple[list, list]:
    """Per-window log beta-integrals plus their level log-weights."""
    if data.n_cols != scan_set.n_cols:
        raise ValueError(
            f"data has {data.n_cols} columns but the scan set was built for "
            f"{scan_set.n_cols}"
        )
    n_seq, n_cols = data.n_rows, data.n_cols
    if n_seq < 2:
        raise ValueError(
            "the averaged likelihood ratio needs at least two rows; "
            "use alr_single_sequence for one sequence"
        )
    table = build_prefix_sums(data).table
    records: list = []
    log_terms: list = []
    for level in scan_set.levels:
        log_level_weight = -3.0 * math.log(level.index) - (level.index + 1)
        for length, group in _grouped_by_length(level.intervals):
            starts = np.array([iv.start for iv in group])
            scores = (table[:, starts + length] - table[:, starts]) / math.sqrt(length)
            zeta = zeta_of_scale(n_seq, n_cols, length)
            betas, log_w, mus = _beta_quadrature(n_seq, zeta, cfg.quadrature_nodes)
            log_lik = _log_mixture_terms(scores, betas, mus, n_seq)
            _check_finite(log_lik, level.index, length, starts, betas)
            log_integrals = logsumexp(log_lik + log_w[:, None], axis=0)
            for k, iv in enumerate(group):
                value = float(log_integrals[k])
                records.append(
                    IntervalStatistic(level.index, iv, value, 0.0, value, 0)
                )
                log_terms.append(log_level_weight + value)
    return records, log_terms


def alr_statistic(
    data: DataMatrix,
    scan_set: ScanSet,
    cfg: Optional[AlrConfig] = None,
    threshold: Optional[float] = None,
) -> ScanReport:
    """Global average likelihood ratio over the scanning family.

    Window (r, j, l) contributes exp(raw record value) with weight
    (6/pi^2) r^-3 e^-(r+1); the weighted sum is the statistic.  The report
    stores the log of the global value alongside its (possibly overflowing)
    linear value, and rejects when the statistic reaches the threshold.
    """
    cfg = cfg or AlrConfig()
    records, log_terms = _weighted_window_terms(data, scan_set, cfg)
    log_global = (
        LOG_WEIGHT_NORM + logsumexp(np.array(log_terms)) if log_terms else NEG_INF
    )
    thr = default_alr_threshold(data.n_rows) if threshold is None else float(threshold)
    log_thr = math.log(thr) if thr > 0 else NEG_INF
    with np.errstate(over="ignore"):
        global_value = float(np.exp(log_global))
    return ScanReport(
        kind=ALR,
        n_rows=data.n_rows,
        n_cols=data.n_cols,
        sided=ONE_SIDED,
        threshold=thr,
        records=tuple(records),
        global_value=global_value,
        reject=bool(log_global >= log_thr),
        log_global_value=float(log_global),
    )


def alr_single_sequence(row: Sequence[float] | np.ndarray, scan_set: ScanSet) -> float:
    """Average likelihood ratio for one sequence, sparsity pinned to zero.

    With a single sequence the carrier fraction is known to be one, so the
    beta integral collapses and each window contributes
    exp(b_T(l) Y - b_T(l)^2 / 2) at the single-sequence boundary b_T.
    """
    data = DataMatrix(np.asarray(row, dtype=float).reshape(1, -1))
    if data.n_cols != scan_set.n_cols:
        raise ValueError(
            f"row has {data.n_cols} entries but the scan set was built for "
            f"{scan_set.n_cols}"
        )
    table = build_prefix_sums(data).table[0]
    log_terms = []
    for level in scan_set.levels:
        log_level_weight = -3.0 * math.log(level.index) - (level.index + 1)
        for length, group in _grouped_by_length(level.intervals):
            starts = np.array([iv.start for iv in group])
            scores = (table[starts + length] - table[starts]) / math.sqrt(length)
            b = b_single_sequence(data.n_cols, length)
            log_terms.append(log_level_weight + b * scores - 0.5 * b * b)
    log_global = LOG_WEIGHT_NORM + logsumexp(np.concatenate(log_terms))
    with np.errstate(over="ignore"):
        return float(np.exp(log_global))


def alr_sparse_mixture(
    values: Sequence[float] | np.ndarray, cfg: Optional[AlrConfig] = None
) -> float:
    """Average likelihood ratio for N observations of a single time point.

    Equals (6 / (pi^2 e^2)) times the beta integral of the mixture
    likelihood at scale exponent zero; the general statistic on a one-column
    matrix reduces to exactly this value.
    """
    cfg = cfg or AlrConfig()
    x = np.asarray(values, dtype=float).reshape(-1, 1)
    n_seq = x.shape[0]
    betas, log_w, mus = _beta_quadrature(n_seq, 0.0, cfg.quadrature_nodes)
    log_lik = _log_mixture_terms(x, betas, mus, n_seq)
    log_integral = float(logsumexp(log_lik[:, 0] + log_w))
    return float(math.exp(LOG_WEIGHT_NORM - 2.0 + log_integral))


def likelihood_profile_over_j(
    data: DataMatrix, length: int, cfg: Optional[AlrConfig] = None
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Beta-integrated window likelihood at every start position.

    Returns (starts, log values, linear values) for j = 0 .. T - length;
    the linear column overflows to inf for very strong signals, the log
    column never does.
    """
    cfg = cfg or AlrConfig()
    if not 1 <= length <= data.n_cols:
        raise ValueError(
            f"window length must lie in [1, {data.n_cols}], got {length}"
        )
    n_seq, n_cols = data.n_rows, data.n_cols
    table = build_prefix_sums(data).table
    starts = np.arange(0, n_cols - length + 1)
    scores = (table[:, starts + length] - table[:, starts]) / math.sqrt(length)
    zeta = zeta_of_scale(n_seq, n_cols, length)
    betas, log_w, mus = _beta_quadrature(n_seq, zeta, cfg.quadrature_nodes)
    log_lik = _log_mixture_terms(scores, betas, mus, n_seq)
    log_profile = logsumexp(log_lik + log_w[:, None], axis=0)
    with np.errstate(over="ignore"):
        linear = np.exp(log_profile)
    return starts, log_profile, linear


def likelihood_profile_over_beta(
    data: DataMatrix, length: int, start: int, beta_grid: Sequence[float] | np.ndarray
) -> np.ndarray:
    """log window likelihood on a user-supplied beta grid at one window."""
    betas = np.asarray(beta_grid, dtype=float)
    if betas.size == 0 or not ((betas > 0.0) & (betas < 1.0)).all():
        raise ValueError("beta grid entries must lie strictly inside (0, 1)")
    n_seq, n_cols = data.n_rows, data.n_cols
    iv_end = start + length
    if start < 0 or iv_end > n_cols:
        raise ValueError(f"window (start={start}, length={length}) out of range")
    table = build_prefix_sums(data).table
    scores = ((table[:, iv_end] - table[:, start]) / math.sqrt(length)).reshape(-1, 1)
    zeta = zeta_of_scale(n_seq, n_cols, length)
    mus = np.array([b_aligned(n_seq, float(b), zeta) for b in betas])
    return _log_mixture_terms(scores, betas, mus, n_seq)[:, 0]
