"""Independent brute-force reference implementations.

Everything here is deliberately naive: plain Python loops, math.* scalar
functions, no prefix sums, no vectorization, no log-domain tricks beyond
what correctness forces.  These are the oracles the optimized package is
checked against, so they must not share code with it.
"""

import math


def window_sum(row, start, length):
    total = 0.0
    for t in range(start, start + length):
        total += row[t]
    return total


def pooled_score(row, start, length):
    return window_sum(row, start, length) / math.sqrt(length)


def normal_upper_tail(y):
    return 0.5 * math.erfc(y / math.sqrt(2.0))


def p_value(y, sided="one_sided"):
    if sided == "one_sided":
        p = normal_upper_tail(y)
    else:
        p = 2.0 * normal_upper_tail(abs(y))
    return min(max(p, 1e-16), 1.0 - 1e-16)


def kl(x, t):
    if x < t:
        return 0.0
    total = 0.0
    if x > 0.0:
        total += x * math.log(x / t)
    if x < 1.0:
        total += (1.0 - x) * math.log((1.0 - x) / (1.0 - t))
    return total


def penalty_base(length, n_cols):
    return math.log(math.e * n_cols / length)


def hc_stat(pvals, length, n_cols):
    """(raw, arg_n) by exhaustive search over feasible ranks."""
    n = len(pvals)
    s = penalty_base(length, n_cols)
    ps = sorted(pvals)
    best, arg = float("-inf"), 0
    for rank in range(1, n // 2 + 1):
        p = ps[rank - 1]
        if p < s / n:
            continue
        value = (rank / n - p) / math.sqrt(p * (1.0 - p) / n)
        if value > best:
            best, arg = value, rank
    return best, arg


def bj_stat(pvals, length, n_cols):
    n = len(pvals)
    ps = sorted(pvals)
    best, arg = float("-inf"), 0
    for rank in range(1, n // 2 + 1):
        p = ps[rank - 1]
        if not p < rank / n:
            continue
        value = n * kl(rank / n, p)
        if value > best:
            best, arg = value, rank
    return best, arg


def boundary_aligned(n_seq, beta, zeta):
    log_n = math.log(n_seq)
    if zeta <= 1.0 - 4.0 * beta / 3.0:
        return math.sqrt(math.log(1.0 + n_seq ** (2.0 * beta - 1.0 + zeta)))
    if zeta <= 1.0 - beta:
        return (math.sqrt(1.0 - zeta) - math.sqrt(1.0 - zeta - beta)) * math.sqrt(
            2.0 * log_n
        )
    return math.sqrt(n_seq ** (beta + zeta - 1.0))


def zeta_of_scale(n_seq, n_cols, length):
    return math.log(math.log(n_cols / length) + 1.0) / math.log(n_seq)


def mixture_likelihood(scores, beta, n_seq, n_cols, length):
    """Direct linear-domain product of the per-row likelihood ratios."""
    pi = n_seq**-beta
    mu = boundary_aligned(n_seq, beta, zeta_of_scale(n_seq, n_cols, length))
    product = 1.0
    for y in scores:
        product *= 1.0 - pi + pi * math.exp(mu * y - mu * mu / 2.0)
    return product


def beta_quadrature(n_seq, zeta, nodes_per_piece):
    """Same piecewise Gauss-Legendre rule, built from numpy's node table."""
    import numpy as np

    knots = sorted({3.0 * (1.0 - zeta) / 4.0, 1.0 - zeta})
    edges = [0.0] + [k for k in knots if 0.0 < k < 1.0] + [1.0]
    x, w = np.polynomial.legendre.leggauss(nodes_per_piece)
    betas, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        for xi, wi in zip(x, w):
            betas.append(0.5 * (a + b) + 0.5 * (b - a) * xi)
            weights.append(0.5 * (b - a) * wi)
    return betas, weights


def alr_window_integral(scores, n_seq, n_cols, length, nodes_per_piece):
    """Quadrature beta-integral of the window likelihood, linear domain."""
    zeta = zeta_of_scale(n_seq, n_cols, length)
    betas, weights = beta_quadrature(n_seq, zeta, nodes_per_piece)
    total = 0.0
    for beta, weight in zip(betas, weights):
        total += weight * mixture_likelihood(scores, beta, n_seq, n_cols, length)
    return total


def alr_global(matrix, levels, nodes_per_piece):
    """Weighted sum over a scanning family given as (r, j, length) triples."""
    n_seq = len(matrix)
    n_cols = len(matrix[0])
    total = 0.0
    for r, start, length in levels:
        scores = [pooled_score(row, start, length) for row in matrix]
        weight = (6.0 / math.pi**2) / (r**3 * math.exp(r + 1))
        total += weight * alr_window_integral(
            scores, n_seq, n_cols, length, nodes_per_piece
        )
    return total
