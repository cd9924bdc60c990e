"""Multiscale scanning family of candidate intervals.

Scanning every window of every length costs O(N T^2).  The family built
here keeps, at level r, only windows whose endpoints sit on a grid of
spacing d(r, T) and whose lengths lie in (T/e^r, T/e^(r-1)], which brings
the total interval count down to O(T log T) while guaranteeing that any
window has a nested approximant with small relative length loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

from .core import Interval

__all__ = [
    "ScanLevel",
    "ScanSet",
    "grid_spacing",
    "level_count",
    "build_scan_set",
    "best_inner_approximation",
]


@dataclass(frozen=True)
class ScanLevel:
    """One geometric length band of the scanning family."""

    index: int  # level r >= 1
    spacing: int  # endpoint grid step d(r, T)
    lengths: Tuple[int, ...]  # distinct window lengths, ascending
    intervals: Tuple[Interval, ...]  # sorted by (length, start)

    @property
    def size(self) -> int:
        return len(self.intervals)

    def cardinality_bound(self) -> float:
        """Upper bound r * e^(r+1) on the level's interval count."""
        return self.index * math.exp(self.index + 1)


@dataclass(frozen=True)
class ScanSet:
    """The full leveled family for sequences of length ``n_cols``."""

    n_cols: int
    levels: Tuple[ScanLevel, ...]

    @property
    def size(self) -> int:
        return sum(level.size for level in self.levels)

    def iter_intervals(self) -> Iterator[Tuple[int, Interval]]:
        """Yield (level index, interval) in deterministic (r, length, start) order."""
        for level in self.levels:
            for interval in level.intervals:
                yield level.index, interval


def grid_spacing(r: int, n_cols: int) -> int:
    """Endpoint grid step floor(T / (sqrt(r) e^r)) + 1 at level r."""
    if r < 1:
        raise ValueError(f"level index must be >= 1, got {r}")
    if n_cols < 1:
        raise ValueError(f"sequence length must be >= 1, got {n_cols}")
    return int(n_cols / (math.sqrt(r) * math.exp(r))) + 1


def level_count(n_cols: int) -> int:
    """Number of levels: floor(log T), but never fewer than one."""
    if n_cols < 1:
        raise ValueError(f"sequence length must be >= 1, got {n_cols}")
    return max(int(math.floor(math.log(n_cols))), 1)


def build_scan_set(n_cols: int) -> ScanSet:
    """Enumerate the family for sequences of length ``n_cols``.

    Level r holds every window (j, j + l] with j and j + l both multiples
    of the level's grid step, 0 <= j <= T - l and T/e^r < l <= T/e^(r-1).
    Levels whose length band contains no multiple of the step are kept as
    empty levels so level indices always equal r.
    """
    levels = []
    for r in range(1, level_count(n_cols) + 1):
        d = grid_spacing(r, n_cols)
        lo = n_cols / math.exp(r)
        hi = n_cols / math.exp(r - 1)
        intervals = []
        lengths = []
        m = int(math.floor(lo / d)) + 1  # smallest multiple of d strictly above lo
        while m * d <= hi:
            length = m * d
            if length <= n_cols:
                lengths.append(length)
            for j in range(0, n_cols - length + 1, d):
                intervals.append(Interval(j, length))
            m += 1
        levels.append(ScanLevel(r, d, tuple(lengths), tuple(intervals)))
    return ScanSet(n_cols, tuple(levels))


def best_inner_approximation(
    scan_set: ScanSet, target: Interval
) -> Optional[Tuple[Interval, int]]:
    """Longest family member nested inside ``target``.

    Returns ``(member, level index)`` maximizing the member's length among
    all intervals of the family contained in ``target``; ties prefer the
    smallest start, then the smallest level.  Returns ``None`` when no
    member nests inside the target.
    """
    if not target.fits(scan_set.n_cols):
        raise ValueError(
            f"target (start={target.start}, length={target.length}) "
            f"does not fit in {scan_set.n_cols} columns"
        )
    best: Optional[Tuple[Interval, int]] = None
    for level in scan_set.levels:
        if not level.intervals:
            continue
        d = level.spacing
        j_star = -(-target.start // d) * d  # smallest multiple of d >= start
        span = target.end - j_star
        if span < d:
            continue
        # Longest level length fitting in the remaining span.
        for length in reversed(level.lengths):
            if length <= span:
                candidate = (Interval(j_star, length), level.index)
                if (
                    best is None
                    or candidate[0].length > best[0].length
                    or (
                        candidate[0].length == best[0].length
                        and candidate[0].start < best[0].start
                    )
                ):
                    best = candidate
                break
    return best
