"""Shared data containers and window numerics.

Observation matrices, per-row prefix sums, pooled window scores and the
p-value transform used by every scan statistic in the package.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr

__all__ = [
    "P_FLOOR",
    "ONE_SIDED",
    "TWO_SIDED",
    "Interval",
    "DataMatrix",
    "PrefixSums",
    "PooledScores",
    "build_prefix_sums",
    "pooled_scores",
    "p_values",
]

# Clamp p-values away from {0, 1} so downstream logarithms and the
# higher-criticism standardization stay finite.
P_FLOOR = 1e-16

ONE_SIDED = "one_sided"
TWO_SIDED = "two_sided"

_MAGIC = b"ALSC"
_BIN_HEADER = struct.Struct("<QQ")


@dataclass(frozen=True, order=True)
class Interval:
    """Candidate signal window covering probes start+1 .. start+length.

    In 0-based array terms the window is the column slice
    ``[start, start + length)``.  Ordering is lexicographic in
    ``(start, length)``, which is the tie-break order used throughout.
    """

    start: int
    length: int

    def __post_init__(self) -> None:
        if self.start < 0:
            raise ValueError(f"interval start must be >= 0, got {self.start}")
        if self.length < 1:
            raise ValueError(f"interval length must be >= 1, got {self.length}")

    @property
    def end(self) -> int:
        return self.start + self.length

    def fits(self, n_cols: int) -> bool:
        return self.end <= n_cols

    def overlap(self, other: "Interval") -> int:
        """Number of probes shared with ``other``."""
        return max(0, min(self.end, other.end) - max(self.start, other.start))

    def contains(self, other: "Interval") -> bool:
        return self.start <= other.start and other.end <= self.end


class DataMatrix:
    """N x T grid of real-valued observations, one sequence per row.

    Values are stored as an immutable float64 array; every entry must be
    finite.  Instances are safe to share read-only across workers.
    """

    __slots__ = ("values",)

    def __init__(self, values) -> None:
        arr = np.array(values, dtype=np.float64, copy=True, order="C")
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-d array, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"matrix must be at least 1x1, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("matrix contains non-finite values")
        arr.flags.writeable = False
        self.values = arr

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def row(self, n: int) -> np.ndarray:
        return self.values[n]

    def __eq__(self, other) -> bool:
        return isinstance(other, DataMatrix) and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"DataMatrix(n_rows={self.n_rows}, n_cols={self.n_cols})"

    # -- CSV: one sequence per row, optional header line --------------------

    @classmethod
    def from_csv(cls, path) -> "DataMatrix":
        path = Path(path)
        skip = 0
        with path.open() as fh:
            first = fh.readline()
        tokens = [t for t in first.replace(",", " ").split() if t]
        if tokens:
            try:
                [float(t) for t in tokens]
            except ValueError:
                skip = 1
        arr = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
        return cls(arr)

    def to_csv(self, path) -> None:
        np.savetxt(path, self.values, delimiter=",", fmt="%.17g")

    # -- raw binary: magic "ALSC", u64 N, u64 T, little-endian f64 row-major

    @classmethod
    def from_binary(cls, path) -> "DataMatrix":
        raw = Path(path).read_bytes()
        if raw[: len(_MAGIC)] != _MAGIC:
            raise ValueError(f"{path}: bad magic bytes, not an ALSC matrix file")
        n_rows, n_cols = _BIN_HEADER.unpack_from(raw, len(_MAGIC))
        offset = len(_MAGIC) + _BIN_HEADER.size
        expected = offset + 8 * n_rows * n_cols
        if len(raw) != expected:
            raise ValueError(
                f"{path}: expected {expected} bytes for a {n_rows}x{n_cols} matrix, got {len(raw)}"
            )
        vals = np.frombuffer(raw, dtype="<f8", offset=offset).reshape(n_rows, n_cols)
        return cls(vals)

    def to_binary(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(_BIN_HEADER.pack(self.n_rows, self.n_cols))
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())


class PrefixSums:
    """Per-row cumulative sums with a leading zero column.

    ``table[n, b] - table[n, a]`` equals the sum of row ``n`` over probes
    ``a+1 .. b`` exactly, which makes every window sum an O(1) lookup.
    """

    __slots__ = ("table",)

    def __init__(self, table: np.ndarray) -> None:
        self.table = table

    @property
    def n_rows(self) -> int:
        return self.table.shape[0]

    @property
    def n_cols(self) -> int:
        return self.table.shape[1] - 1

    def window_sums(self, interval: Interval) -> np.ndarray:
        if not interval.fits(self.n_cols):
            raise ValueError(
                f"interval (start={interval.start}, length={interval.length}) "
                f"does not fit in {self.n_cols} columns"
            )
        return self.table[:, interval.end] - self.table[:, interval.start]


@dataclass(frozen=True)
class PooledScores:
    """Per-row window sums scaled by 1/sqrt(length)."""

    interval: Interval
    scores: np.ndarray


def build_prefix_sums(data: DataMatrix) -> PrefixSums:
    table = np.zeros((data.n_rows, data.n_cols + 1))
    np.cumsum(data.values, axis=1, out=table[:, 1:])
    table.flags.writeable = False
    return PrefixSums(table)


def pooled_scores(prefix: PrefixSums, interval: Interval) -> PooledScores:
    sums = prefix.window_sums(interval)
    return PooledScores(interval, sums / math.sqrt(interval.length))


def p_values(scores, sided: str = ONE_SIDED) -> np.ndarray:
    """Standard-normal p-values of pooled scores, clamped to (0, 1).

    ``one_sided`` gives the upper-tail probability 1 - Phi(y); ``two_sided``
    gives 2 (1 - Phi(|y|)).  The complementary-error-function implementation
    keeps relative accuracy deep into the tail; the [P_FLOOR, 1 - P_FLOOR]
    clamp keeps downstream logarithms finite.
    """
    y = scores.scores if isinstance(scores, PooledScores) else np.asarray(scores, dtype=float)
    if sided == ONE_SIDED:
        p = ndtr(-y)
    elif sided == TWO_SIDED:
        p = 2.0 * ndtr(-np.abs(y))
    else:
        raise ValueError(f"sided must be {ONE_SIDED!r} or {TWO_SIDED!r}, got {sided!r}")
    return np.clip(p, P_FLOOR, 1.0 - P_FLOOR)
