"""Closed-form detection-boundary calculators.

The boundary value is the critical pooled-score amplitude separating
alternatives some test can detect from those where every test fails
asymptotically.  All functions evaluate the limiting formulas pointwise at
finite (N, T), which is how the worked numbers in the library's tests and
CLI are produced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "BoundaryQuery",
    "rho_star",
    "b_aligned",
    "b_aligned_branch",
    "b_hetero",
    "b_single_sequence",
    "b_nonaligned",
    "zeta_of_scale",
    "zeta_of_penalty_base",
]

# b_aligned branch labels, in order of increasing zeta.
BRANCH_LOG_MIXTURE = "log_mixture"
BRANCH_SQRT_LOG = "sqrt_log"
BRANCH_POLYNOMIAL = "polynomial"

_MAX_EXP = 700.0  # exp() overflow guard


@dataclass(frozen=True)
class BoundaryQuery:
    """Validated parameter bundle for boundary evaluation.

    ``beta`` is the sparsity exponent (carrier fraction N^-beta), ``zeta``
    the scale exponent tying T/length to N, and ``tau`` the extra variance
    carried by signal observations.
    """

    n_seq: int
    beta: float
    zeta: float = 0.0
    tau: float = 0.0

    def __post_init__(self) -> None:
        if self.n_seq < 2:
            raise ValueError(f"n_seq must be >= 2, got {self.n_seq}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.zeta < 0.0:
            raise ValueError(f"zeta must be >= 0, got {self.zeta}")
        if self.tau < 0.0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")

    def value(self) -> float:
        return b_hetero(self.n_seq, self.beta, self.zeta, self.tau)


def rho_star(beta: float) -> float:
    """Sparse-mixture detection exponent on (1/2, 1).

    beta - 1/2 up to beta = 3/4, then (1 - sqrt(1 - beta))^2.
    """
    if not 0.5 < beta < 1.0:
        raise ValueError(f"rho_star requires beta in (1/2, 1), got {beta}")
    if beta <= 0.75:
        return beta - 0.5
    return (1.0 - math.sqrt(1.0 - beta)) ** 2


def _validate_common(n_seq: int, beta: float, zeta: float) -> None:
    if n_seq < 2:
        raise ValueError(f"n_seq must be >= 2, got {n_seq}")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    if zeta < 0.0:
        raise ValueError(f"zeta must be >= 0, got {zeta}")


def b_aligned_branch(n_seq: int, beta: float, zeta: float) -> tuple[float, str]:
    """Aligned-signal boundary together with its branch label.

    Branches, with closed-left conventions taken literally:
      zeta <= 1 - 4 beta / 3 : sqrt(log(1 + N^(2 beta - 1 + zeta)))
      zeta <= 1 - beta       : (sqrt(1-zeta) - sqrt(1-zeta-beta)) sqrt(2 log N)
      zeta >  1 - beta       : sqrt(N^(beta + zeta - 1))
    """
    _validate_common(n_seq, beta, zeta)
    log_n = math.log(n_seq)
    if zeta <= 1.0 - 4.0 * beta / 3.0:
        e = (2.0 * beta - 1.0 + zeta) * log_n
        if e > _MAX_EXP:
            return math.sqrt(e), BRANCH_LOG_MIXTURE
        return math.sqrt(math.log1p(math.exp(e))), BRANCH_LOG_MIXTURE
    if zeta <= 1.0 - beta:
        value = (math.sqrt(1.0 - zeta) - math.sqrt(1.0 - zeta - beta)) * math.sqrt(
            2.0 * log_n
        )
        return value, BRANCH_SQRT_LOG
    e = 0.5 * (beta + zeta - 1.0) * log_n
    return (math.inf if e > _MAX_EXP else math.exp(e)), BRANCH_POLYNOMIAL


def b_aligned(n_seq: int, beta: float, zeta: float) -> float:
    """Critical amplitude for aligned signals at sparsity beta and scale zeta."""
    return b_aligned_branch(n_seq, beta, zeta)[0]


def b_hetero(n_seq: int, beta: float, zeta: float, tau: float) -> float:
    """Boundary when carriers also gain variance tau; tau = 0 reduces exactly
    to ``b_aligned``.

    For tau > 0 (requires zeta < 1 - beta) the value, divided by
    sqrt(log N), is
      0                                    if zeta <= 1 - 2 beta
                                              or tau >= beta / (1 - zeta - beta)
      sqrt((1 - tau)(2 beta + zeta - 1))   if zeta <= 1 - 4 beta / (3 - tau)
      sqrt(2(1-zeta)) - sqrt(2(1+tau)(1-zeta-beta))   otherwise.
    """
    if tau < 0.0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    if tau == 0.0:
        return b_aligned(n_seq, beta, zeta)
    _validate_common(n_seq, beta, zeta)
    if not zeta < 1.0 - beta:
        raise ValueError(
            f"b_hetero with tau > 0 requires zeta < 1 - beta, got zeta={zeta}, beta={beta}"
        )
    if zeta <= 1.0 - 2.0 * beta or tau >= beta / (1.0 - zeta - beta):
        return 0.0
    sqrt_log_n = math.sqrt(math.log(n_seq))
    # The middle branch's zeta interval is non-empty only for tau < 1.
    if tau < 1.0 and zeta <= 1.0 - 4.0 * beta / (3.0 - tau):
        return math.sqrt((1.0 - tau) * (2.0 * beta + zeta - 1.0)) * sqrt_log_n
    value = math.sqrt(2.0 * (1.0 - zeta)) - math.sqrt(
        2.0 * (1.0 + tau) * (1.0 - zeta - beta)
    )
    return value * sqrt_log_n


def b_single_sequence(n_cols: int, length: int) -> float:
    """Critical amplitude sqrt(2 log(e T / l)) for one sequence."""
    _validate_scale(n_cols, length)
    return math.sqrt(2.0 * (1.0 + math.log(n_cols / length)))


def b_nonaligned(n_seq: int, beta: float, zeta: float) -> float:
    """Reference boundary when each sequence carries its own window position.

    Defined for zeta > max(0, 1 - 2 beta), where the effective sparsity
    exponent (zeta + beta) / (zeta + 1) exceeds 1/2.
    """
    if n_seq < 2:
        raise ValueError(f"n_seq must be >= 2, got {n_seq}")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    if zeta <= max(0.0, 1.0 - 2.0 * beta):
        raise ValueError(
            f"b_nonaligned requires zeta > max(0, 1 - 2 beta); got zeta={zeta}, beta={beta}"
        )
    effective = (zeta + beta) / (zeta + 1.0)
    return math.sqrt(2.0 * math.log(n_seq) * (zeta + 1.0) * rho_star(effective))


def _validate_scale(n_cols: int, length: int) -> None:
    if n_cols < 1:
        raise ValueError(f"sequence length must be >= 1, got {n_cols}")
    if not 1 <= length <= n_cols:
        raise ValueError(f"window length must lie in [1, {n_cols}], got {length}")


def zeta_of_scale(n_seq: int, n_cols: int, length: int) -> float:
    """Scale exponent log_N(log(T/l) + 1) of a window of the given length."""
    if n_seq < 2:
        raise ValueError(f"n_seq must be >= 2, got {n_seq}")
    _validate_scale(n_cols, length)
    return math.log(math.log(n_cols / length) + 1.0) / math.log(n_seq)


def zeta_of_penalty_base(n_seq: int, n_cols: int, length: int) -> float:
    """Scale exponent written as log_N(log(e T / l)).

    Algebraically identical to ``zeta_of_scale`` since
    log(e T / l) = log(T / l) + 1; kept as a separate entry point because the
    two forms arise in different places and the identity is asserted in tests.
    """
    if n_seq < 2:
        raise ValueError(f"n_seq must be >= 2, got {n_seq}")
    _validate_scale(n_cols, length)
    return math.log(math.log(math.e * n_cols / length)) / math.log(n_seq)
