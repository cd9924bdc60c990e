"""Scanning-family construction and the nested-approximant guarantee."""

import math

import numpy as np
import pytest

from alignedscan import (
    Interval,
    best_inner_approximation,
    build_scan_set,
    grid_spacing,
    level_count,
)


class TestGridSpacing:
    def test_small_cases(self):
        assert grid_spacing(1, 8) == 3  # floor(8/e) + 1
        assert grid_spacing(2, 8) == 1  # floor(8 / (sqrt(2) e^2)) + 1

    def test_degenerates_to_unit_grid(self):
        # Once sqrt(r) e^r exceeds T the grid is every integer.
        assert grid_spacing(5, 10) == 1
        assert grid_spacing(12, 10**5) == 1

    def test_validation(self):
        with pytest.raises(ValueError):
            grid_spacing(0, 8)
        with pytest.raises(ValueError):
            grid_spacing(1, 0)


class TestBuildScanSet:
    def test_length_one_family_is_the_singleton(self):
        scan_set = build_scan_set(1)
        assert len(scan_set.levels) == 1
        assert scan_set.levels[0].intervals == (Interval(0, 1),)

    def test_length_two_has_a_level(self):
        # floor(log 2) = 0, so the level count clamps to one.
        scan_set = build_scan_set(2)
        assert level_count(2) == 1
        assert scan_set.size >= 1

    def test_t8_hand_enumeration(self):
        scan_set = build_scan_set(8)
        assert len(scan_set.levels) == 2
        level1, level2 = scan_set.levels
        assert level1.spacing == 3
        assert level1.intervals == (Interval(0, 3), Interval(3, 3), Interval(0, 6))
        assert level2.spacing == 1
        assert level2.intervals == tuple(Interval(j, 2) for j in range(7))

    @pytest.mark.parametrize("n_cols", [10, 100, 1000, 10_000, 100_000])
    def test_per_level_cardinality_bound(self, n_cols):
        scan_set = build_scan_set(n_cols)
        assert len(scan_set.levels) == level_count(n_cols)
        for level in scan_set.levels:
            assert level.size <= level.cardinality_bound(), (
                f"T={n_cols} level {level.index}: {level.size} intervals "
                f"exceed the bound {level.cardinality_bound():.1f}"
            )

    @pytest.mark.parametrize("n_cols", [10, 100, 1000, 10_000])
    def test_levels_respect_grid_and_length_band(self, n_cols):
        scan_set = build_scan_set(n_cols)
        for level in scan_set.levels:
            d = level.spacing
            lo = n_cols / math.exp(level.index)
            hi = n_cols / math.exp(level.index - 1)
            for iv in level.intervals:
                assert iv.start % d == 0 and iv.end % d == 0
                assert 0 <= iv.start <= n_cols - iv.length
                assert lo < iv.length <= hi

    def test_deterministic_ordering(self):
        a = build_scan_set(300)
        b = build_scan_set(300)
        assert a == b
        for level in a.levels:
            assert list(level.intervals) == sorted(
                level.intervals, key=lambda iv: (iv.length, iv.start)
            )

    def test_total_size_is_near_linear(self):
        # The family is O(T log T): tiny next to the T^2/2 full enumeration.
        for n_cols in (1000, 10_000):
            scan_set = build_scan_set(n_cols)
            assert scan_set.size < 20 * n_cols


class TestBestInnerApproximation:
    def test_member_returns_itself(self):
        scan_set = build_scan_set(8)
        member = Interval(3, 3)
        found = best_inner_approximation(scan_set, member)
        assert found == (member, 1)

    def test_t8_hand_case(self):
        scan_set = build_scan_set(8)
        found = best_inner_approximation(scan_set, Interval(1, 7))
        assert found == (Interval(3, 3), 1)

    def test_no_member_nests(self):
        scan_set = build_scan_set(8)
        assert best_inner_approximation(scan_set, Interval(1, 1)) is None

    def test_out_of_range_target(self):
        with pytest.raises(ValueError):
            best_inner_approximation(build_scan_set(8), Interval(5, 7))

    def test_result_is_a_member_and_nested(self):
        scan_set = build_scan_set(500)
        members = {
            (level.index, iv) for level in scan_set.levels for iv in level.intervals
        }
        rng = np.random.default_rng(23)
        for _ in range(300):
            length = int(rng.integers(1, 501))
            start = int(rng.integers(0, 501 - length))
            target = Interval(start, length)
            found = best_inner_approximation(scan_set, target)
            if found is None:
                continue
            iv, r = found
            assert (r, iv) in members
            assert target.contains(iv)

    @pytest.mark.parametrize("n_cols", [100, 1000, 10_000])
    def test_feasible_targets_lose_at_most_two_grid_steps(self, n_cols):
        # Targets whose length is at least four grid steps of their matching
        # level always admit a nested member within 2 d of their length.
        scan_set = build_scan_set(n_cols)
        rng = np.random.default_rng(29)
        checked = 0
        while checked < 1000:
            level = scan_set.levels[int(rng.integers(0, len(scan_set.levels)))]
            d = level.spacing
            lo = n_cols / math.exp(level.index)
            hi = n_cols / math.exp(level.index - 1)
            length = int(rng.integers(int(lo) + 1, int(hi) + 1))
            if not (lo < length <= hi) or length < 4 * d:
                continue
            start = int(rng.integers(0, n_cols - length + 1))
            found = best_inner_approximation(scan_set, Interval(start, length))
            assert found is not None
            iv, _ = found
            assert iv.length >= length - 2 * d, (
                f"T={n_cols} target (j={start}, l={length}) at level "
                f"{level.index} (d={d}): best nested length {iv.length}"
            )
            checked += 1
