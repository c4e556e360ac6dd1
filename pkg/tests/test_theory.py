import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infodyn import theory as th
from infodyn.simplex import Distribution, kl_divergence

interior = st.lists(st.integers(1, 500), min_size=2, max_size=10).map(
    lambda w: Distribution(np.asarray(w, dtype=float) / sum(w))
)


class TestDistanceMoments:
    def test_reference_values(self):
        assert th.distance_moments(3, 1000) == (0.003, 6e-6)

    def test_mean_scaling(self):
        m1, _ = th.distance_moments(5, 1000)
        m2, _ = th.distance_moments(5, 2000)
        assert m2 == m1 / 2

    def test_domain(self):
        with pytest.raises(ValueError):
            th.distance_moments(0, 100)


class TestFisherPrediction:
    def test_bias_reference_value(self):
        assert th.fisher_bias(9, 100000, 0.25) == pytest.approx(0.00288, rel=1e-12)

    def test_bias_vanishes_with_n(self):
        assert th.fisher_bias(9, 10**9, 0.25) < 1e-6
        assert th.fisher_bias(9, 10**9, 0.25) == th.fisher_bias(9, 10**6, 0.25) / 1000

    def test_variance_at_zero_information(self):
        pred = th.fisher_prediction(0.0, 9, 1000, 0.25)
        assert pred.expected_value == th.fisher_bias(9, 1000, 0.25)
        assert pred.variance == pytest.approx(8 * 9 / (1000**2 * 0.25**4), rel=1e-12)

    def test_negative_variance_rejected(self):
        with pytest.raises(ValueError):
            th.BiasVariancePrediction(1.0, -0.5)


class TestSecondOrderBias:
    def test_uniform_distribution_value(self):
        # sum(1/p) = (N+1)^2 makes the correction N^2 / (2 n^2 dt^2)
        n, dt, N = 1000, 0.25, 9
        p = Distribution(np.full(N + 1, 1.0 / (N + 1)))
        expected = th.fisher_bias(N, n, dt) + N**2 / (2 * n**2 * dt**2)
        assert th.fisher_bias_second_order(p, n, dt) == pytest.approx(expected, rel=1e-12)

    @given(interior)
    @settings(max_examples=100, deadline=None)
    def test_correction_is_nonnegative(self, p):
        n, dt = 1000, 0.25
        N = len(p) - 1
        assert th.fisher_bias_second_order(p, n, dt) >= th.fisher_bias(N, n, dt) - 1e-18

    def test_correction_fades_for_large_n(self):
        p = Distribution([0.2, 0.3, 0.5])
        lead = th.fisher_bias(2, 10**7, 0.25)
        full = th.fisher_bias_second_order(p, 10**7, 0.25)
        assert abs(full - lead) / lead < 1e-5


class TestClusteredPrediction:
    def test_identity_cluster_count_reduces_to_plain(self):
        plain = th.fisher_prediction(0.02, 9, 5000, 0.25)
        clustered = th.clustered_fisher_prediction(0.02, 10, 5000, 0.25)
        assert clustered == plain

    def test_single_cluster_has_no_bias(self):
        pred = th.clustered_fisher_prediction(0.0, 1, 5000, 0.25)
        assert pred.expected_value == 0.0
        assert pred.variance == 0.0

    def test_bias_reduction_ratio(self):
        n, dt = 10000, 0.25
        unclustered = th.fisher_bias(9, n, dt)
        clustered = th.clustered_fisher_prediction(0.0, 3, n, dt).expected_value
        assert unclustered / clustered == pytest.approx(4.5, rel=1e-12)


class TestInfoRateMoments:
    def test_zero_rate_zero_mean(self):
        mean, _ = th.info_rate_moments(0.0, 0.3, 1000, 0.25)
        assert mean == 0.0

    def test_variance_grows_toward_boundary(self):
        _, v_small = th.info_rate_moments(0.1, 0.01, 1000, 0.25)
        _, v_large = th.info_rate_moments(0.1, 0.3, 1000, 0.25)
        assert v_small > v_large

    def test_cluster_version_same_law(self):
        assert th.cluster_info_rate_moments(0.2, 0.4, 500, 0.25) == \
            th.info_rate_moments(0.2, 0.4, 500, 0.25)

    def test_vectorized(self):
        mean, var = th.info_rate_moments(np.array([0.0, 0.1]), np.array([0.5, 0.2]),
                                         1000, 0.25)
        assert mean.shape == (2,) and var.shape == (2,)


class TestNormalizationZ:
    def test_two_state_closed_form(self):
        for n in (100, 1000):
            z = th.normalization_z(Distribution([0.5, 0.5]), n)
            assert z == pytest.approx(n**1.5 * np.sqrt(np.pi / 2.0), rel=1e-12)

    def test_monotone_in_n(self):
        p = Distribution([0.2, 0.3, 0.5])
        assert th.normalization_z(p, 2000) > th.normalization_z(p, 1000)

    def test_non_interior_rejected(self):
        with pytest.raises(ValueError):
            th.normalization_z(Distribution([1.0, 0.0]), 100)

    @pytest.mark.parametrize("n", [200, 500, 1000])
    def test_lattice_sum_oracle(self, n):
        # Exact enumeration of all n+1 two-state lattice points.  The
        # closed form carries one density factor n per lattice dimension
        # more than the bare sum, so the sum approaches Z / n.
        p = Distribution([0.5, 0.5])
        total = 0.0
        for k in range(n + 1):
            phat = Distribution([k / n, 1 - k / n])
            total += np.exp(-n * kl_divergence(phat, p))
        z = th.normalization_z(p, n)
        assert abs(total - z / n) / (z / n) < 0.10
