"""Containers, prefix sums, pooled scores and p-values."""

import math

import numpy as np
import pytest

from alignedscan import (
    ONE_SIDED,
    TWO_SIDED,
    DataMatrix,
    Interval,
    build_prefix_sums,
    p_values,
    pooled_scores,
)

import oracles


class TestInterval:
    def test_validation(self):
        with pytest.raises(ValueError):
            Interval(-1, 3)
        with pytest.raises(ValueError):
            Interval(0, 0)

    def test_overlap_and_containment(self):
        a, b = Interval(0, 10), Interval(8, 10)
        assert a.overlap(b) == 2
        assert b.overlap(a) == 2
        assert a.overlap(Interval(30, 10)) == 0
        assert Interval(0, 10).contains(Interval(3, 3))
        assert not Interval(0, 10).contains(Interval(8, 10))

    def test_ordering_is_start_then_length(self):
        assert sorted([Interval(2, 1), Interval(0, 9), Interval(0, 2)]) == [
            Interval(0, 2),
            Interval(0, 9),
            Interval(2, 1),
        ]


class TestDataMatrix:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            DataMatrix([[1.0, np.nan]])
        with pytest.raises(ValueError):
            DataMatrix([[np.inf]])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            DataMatrix(np.empty((0, 3)))

    def test_values_are_immutable(self):
        m = DataMatrix([[1.0, 2.0]])
        with pytest.raises(ValueError):
            m.values[0, 0] = 5.0

    def test_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        m = DataMatrix(rng.standard_normal((4, 7)))
        path = tmp_path / "m.csv"
        m.to_csv(path)
        assert DataMatrix.from_csv(path) == m

    def test_csv_optional_header(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("c0,c1,c2\n1,2,3\n4,5,6\n")
        m = DataMatrix.from_csv(path)
        assert m.n_rows == 2 and m.n_cols == 3
        assert m.values[1, 2] == 6.0

    def test_binary_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        m = DataMatrix(rng.standard_normal((3, 5)))
        path = tmp_path / "m.bin"
        m.to_binary(path)
        again = DataMatrix.from_binary(path)
        assert np.array_equal(again.values, m.values)

    def test_binary_layout(self, tmp_path):
        m = DataMatrix([[1.5, -2.0]])
        path = tmp_path / "m.bin"
        m.to_binary(path)
        raw = path.read_bytes()
        assert raw[:4] == b"ALSC"
        assert int.from_bytes(raw[4:12], "little") == 1
        assert int.from_bytes(raw[12:20], "little") == 2
        assert len(raw) == 20 + 16

    def test_binary_bad_magic(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"XXXX" + bytes(16))
        with pytest.raises(ValueError, match="magic"):
            DataMatrix.from_binary(path)


class TestPrefixSums:
    def test_cumulative_definition(self):
        prefix = build_prefix_sums(DataMatrix([[1.0, 2.0, 3.0]]))
        assert prefix.table.tolist() == [[0.0, 1.0, 3.0, 6.0]]

    def test_zero_rows(self):
        prefix = build_prefix_sums(DataMatrix(np.zeros((2, 6))))
        assert not prefix.table.any()

    def test_matches_loop_oracle_on_all_windows(self):
        rng = np.random.default_rng(7)
        data = DataMatrix(rng.standard_normal((3, 8)))
        prefix = build_prefix_sums(data)
        count = 0
        for start in range(8):
            for length in range(1, 8 - start + 1):
                iv = Interval(start, length)
                fast = prefix.window_sums(iv)
                for n in range(3):
                    slow = oracles.window_sum(data.row(n), start, length)
                    assert abs(fast[n] - slow) <= 1e-12
                count += 1
        assert count == 36

    def test_out_of_range_interval(self):
        prefix = build_prefix_sums(DataMatrix(np.zeros((1, 4))))
        with pytest.raises(ValueError):
            prefix.window_sums(Interval(2, 3))


class TestPooledScores:
    def test_constant_row(self):
        prefix = build_prefix_sums(DataMatrix([[2.0, 2.0, 2.0, 2.0]]))
        assert pooled_scores(prefix, Interval(0, 4)).scores[0] == pytest.approx(4.0)

    def test_single_point_window_returns_the_entry(self):
        data = DataMatrix([[0.3, -1.2, 2.5]])
        prefix = build_prefix_sums(data)
        for t in range(3):
            assert pooled_scores(prefix, Interval(t, 1)).scores[0] == pytest.approx(
                data.values[0, t], abs=1e-15
            )

    def test_hand_value(self):
        prefix = build_prefix_sums(DataMatrix([[1.0, -1.0, 3.0]]))
        got = pooled_scores(prefix, Interval(1, 2)).scores[0]
        assert got == pytest.approx(1.4142135623730951, abs=1e-12)

    def test_prefix_route_matches_naive_on_large_entries(self):
        # |X| up to 1e3 over all windows of a T=512 matrix.
        rng = np.random.default_rng(11)
        values = rng.uniform(-1e3, 1e3, size=(3, 512))
        data = DataMatrix(values)
        prefix = build_prefix_sums(data)
        for length in range(1, 513):
            windows = np.lib.stride_tricks.sliding_window_view(values, length, axis=1)
            naive = windows.sum(axis=-1) / math.sqrt(length)
            starts = np.arange(513 - length)
            fast = (
                prefix.table[:, starts + length] - prefix.table[:, starts]
            ) / math.sqrt(length)
            assert np.max(np.abs(fast - naive)) <= 1e-10


class TestPValues:
    def test_zero_score_is_half(self):
        assert p_values(np.array([0.0]))[0] == pytest.approx(0.5, abs=1e-15)

    def test_large_score_clamps_to_floor(self):
        p = p_values(np.array([40.0]))[0]
        assert p == 1e-16

    def test_negative_large_clamps_high(self):
        assert p_values(np.array([-40.0]))[0] == 1.0 - 1e-16

    def test_quantile_value(self):
        # Phi(-1.959964), frozen from a 40-digit erfc evaluation.
        p = p_values(np.array([1.959964]))[0]
        assert p == pytest.approx(0.024999999096442404, abs=1e-12)

    def test_two_sided(self):
        y = np.array([-1.3, 0.0, 2.4])
        expected = [oracles.p_value(v, "two_sided") for v in y]
        assert np.allclose(p_values(y, TWO_SIDED), expected, atol=1e-15)

    def test_matches_erfc_oracle(self):
        rng = np.random.default_rng(3)
        y = rng.uniform(-9, 9, size=200)
        expected = [oracles.p_value(v) for v in y]
        got = p_values(y, ONE_SIDED)
        assert np.allclose(got, expected, rtol=1e-13, atol=0)

    def test_monotone_decreasing_in_score(self):
        y = np.linspace(-10, 10, 2001)
        p = p_values(y)
        assert (np.diff(p) <= 0).all()

    def test_permutation_invariance_of_sorted_pvalues(self):
        rng = np.random.default_rng(5)
        y = rng.standard_normal(64)
        base = np.sort(p_values(y))
        perm = np.sort(p_values(rng.permutation(y)))
        assert np.array_equal(base, perm)

    def test_unknown_sidedness(self):
        with pytest.raises(ValueError):
            p_values(np.array([0.0]), "both")

    def test_null_pvalues_are_uniform(self):
        # Pooled scores over a fixed window of i.i.d. standard normals are
        # standard normal, so one-sided p-values must look Uniform(0,1).
        rng = np.random.default_rng(17)
        n_rows, reps = 50, 400  # N * reps = 2e4 samples
        iv = Interval(3, 9)
        samples = []
        for _ in range(reps):
            data = DataMatrix(rng.standard_normal((n_rows, 16)))
            samples.append(p_values(pooled_scores(build_prefix_sums(data), iv)))
        pooled = np.sort(np.concatenate(samples))
        grid = np.arange(1, pooled.size + 1) / pooled.size
        ks = max(
            np.max(np.abs(grid - pooled)),
            np.max(np.abs(pooled - (grid - 1.0 / pooled.size))),
        )
        assert ks <= 0.05, f"KS distance {ks:.4f} exceeds 0.05"
