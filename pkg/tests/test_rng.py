import math

import numpy as np
import pytest
from scipy import stats

from infodyn import rng


class TestStreams:
    def test_same_key_same_sequence(self):
        a = rng.stream(42, 3).integers(0, 2**63, size=16)
        b = rng.stream(42, 3).integers(0, 2**63, size=16)
        assert np.array_equal(a, b)

    def test_distinct_indices_decorrelated(self):
        a = rng.stream(42, 0).integers(0, 2**63, size=64)
        b = rng.stream(42, 1).integers(0, 2**63, size=64)
        assert not np.array_equal(a, b)

    def test_multi_index_paths_distinct(self):
        assert rng.derive_key(7, 1, 2) != rng.derive_key(7, 2, 1)
        assert rng.derive_key(7, 1) != rng.derive_key(7, 1, 0)

    def test_key_is_64_bit(self):
        for seed in (0, 1, 2**64 - 1):
            assert 0 <= rng.derive_key(seed, 123456789) < 2**64


class TestSampleCounts:
    def test_counts_sum_to_n(self):
        gen = rng.stream(0)
        p = np.array([0.2, 0.3, 0.5])
        for n in (1, 7, 1000):
            counts = rng.sample_counts(p, n, gen)
            assert counts.sum() == n
            assert np.all(counts >= 0)

    def test_degenerate_distribution(self):
        p = np.array([1.0, 0.0, 0.0])
        for r in range(20):
            counts = rng.sample_counts(p, 50, rng.stream(1, r))
            assert counts.tolist() == [50, 0, 0]

    def test_rejects_zero_draws(self):
        with pytest.raises(ValueError):
            rng.sample_counts(np.array([0.5, 0.5]), 0, rng.stream(0))

    def test_empirical_mean_unbiased(self):
        p = np.array([0.3, 0.7])
        n, reps = 100, 10000
        freqs = np.stack(
            [rng.sample_counts(p, n, rng.stream(9, r)) / n for r in range(reps)]
        )
        se = freqs.std(axis=0, ddof=1) / np.sqrt(reps)
        assert np.all(np.abs(freqs.mean(axis=0) - p) <= 3 * se)

    def test_chi_square_against_exact_binomial(self):
        # all 6 outcomes of n=5 draws from (0.4, 0.6), exact reference pmf
        n, reps = 5, 100000
        p = np.array([0.4, 0.6])
        expected = np.array(
            [math.comb(n, k) * 0.4**k * 0.6 ** (n - k) for k in range(n + 1)]
        )
        observed = np.zeros(n + 1)
        for r in range(reps):
            counts = rng.sample_counts(p, n, rng.stream(1234, r))
            observed[counts[0]] += 1
        chi2 = float(np.sum((observed - reps * expected) ** 2 / (reps * expected)))
        critical = stats.chi2.isf(1e-3, df=n)
        assert chi2 < critical
