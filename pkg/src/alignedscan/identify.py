"""Post-scan signal identification.

Windows whose penalized score clears a threshold are ranked by score and
pruned greedily: walking downward, a window is dropped when it overlaps a
higher-ranked survivor by more than a fraction f of its own length.  With
f = 0 the retained windows are pairwise disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Tuple, Union

from .core import Interval
from .gof import ScanReport

__all__ = ["IdentificationConfig", "IdentifiedSegments", "identify"]


@dataclass(frozen=True)
class IdentificationConfig:
    """Score threshold c and overlap fraction f >= 0 (f >= 1 disables pruning)."""

    threshold: float
    overlap_fraction: float = 0.0

    def __post_init__(self) -> None:
        if self.overlap_fraction < 0.0:
            raise ValueError(
                f"overlap_fraction must be >= 0, got {self.overlap_fraction}"
            )


@dataclass(frozen=True)
class IdentifiedSegments:
    """Retained (window, score) pairs in descending score order."""

    segments: Tuple[Tuple[Interval, float], ...]

    def __len__(self) -> int:
        return len(self.segments)

    def intervals(self) -> Tuple[Interval, ...]:
        return tuple(iv for iv, _ in self.segments)


Candidates = Union[ScanReport, Iterable[Tuple[Interval, float]]]


def identify(candidates: Candidates, cfg: IdentificationConfig) -> IdentifiedSegments:
    """Threshold filter plus greedy overlap pruning.

    Accepts a scan report (per-window penalized scores) or raw
    (interval, score) pairs.  Scores below the threshold are dropped; then,
    from the highest score down, a candidate is removed when its overlap
    with some retained higher-ranked window strictly exceeds f times the
    candidate's own length.  Ties in score break lexicographically on
    (start, length), so the result does not depend on input order.
    """
    if isinstance(candidates, ScanReport):
        pairs = [(rec.interval, rec.penalized) for rec in candidates.records]
    else:
        pairs = [(iv, float(score)) for iv, score in candidates]
    survivors = [(iv, score) for iv, score in pairs if score >= cfg.threshold]
    survivors.sort(key=lambda p: (-p[1], p[0].start, p[0].length))
    kept: list[Tuple[Interval, float]] = []
    f = cfg.overlap_fraction
    for iv, score in survivors:
        limit = f * iv.length
        if all(iv.overlap(other) <= limit for other, _ in kept):
            kept.append((iv, score))
    return IdentifiedSegments(tuple(kept))
