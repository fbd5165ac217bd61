import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from classdist.errors import DivergentSeries, InvalidParameter, NoConvergence, NumericalUnderflow
from classdist.special import SeriesConfig, alpha, lerch_phi, lerch_phi_precise, partition_z, tau

from conftest import mp_phi


class TestLerchPhi:
    def test_zero_argument_is_first_term(self):
        assert lerch_phi(0.0, 2.0, 5.0) == 0.04

    def test_log_closed_form(self):
        assert lerch_phi(0.5, 1, 1) == pytest.approx(2 * math.log(2), abs=1e-8)

    @pytest.mark.parametrize("z,s,a", [(0.5, 2, 3), (0.9, 1, 1), (0.99, 2, 7), (0.3, 1.5, 0.25)])
    def test_matches_reference(self, z, s, a):
        assert lerch_phi(z, s, a) == pytest.approx(mp_phi(z, s, a), abs=1e-8)

    def test_frozen_values(self):
        assert lerch_phi_precise(0.5, 2, 3) == pytest.approx(0.15792421172010005, rel=1e-14)
        assert lerch_phi_precise(0.9, 1, 1) == pytest.approx(2.5584278811044954, rel=1e-14)

    @pytest.mark.parametrize("z", [1.0, 1.5, -0.1])
    def test_divergent(self, z):
        with pytest.raises(DivergentSeries):
            lerch_phi(z, 1, 1)

    @pytest.mark.parametrize("s,a", [(1, 0), (1, -2), (0, 1), (-1, 1)])
    def test_invalid(self, s, a):
        with pytest.raises(InvalidParameter):
            lerch_phi(0.5, s, a)

    def test_term_cap(self):
        with pytest.raises(NoConvergence):
            lerch_phi(0.9999, 1, 1, SeriesConfig(accuracy=1e-12, max_terms=1000))

    def test_config_validation(self):
        with pytest.raises(InvalidParameter):
            SeriesConfig(accuracy=0)
        with pytest.raises(InvalidParameter):
            SeriesConfig(max_terms=0)

    @given(z=st.floats(0.0, 0.95), a=st.floats(0.5, 20), s=st.sampled_from([1.0, 2.0, 3.0]),
           n=st.integers(1, 6))
    def test_shift_identity(self, z, a, s, n):
        lhs = lerch_phi(z, s, a)
        rhs = z**n * lerch_phi(z, s, a + n) + math.fsum(z**k / (k + a) ** s for k in range(n))
        assert lhs == pytest.approx(rhs, abs=2e-8)


class TestTau:
    @pytest.mark.parametrize("n0", [1, 2, 5, 20, 200])
    @pytest.mark.parametrize("gamma", [0.001, 0.05, 0.7, 3.0, 20.0])
    def test_equals_lerch_series(self, n0, gamma):
        ref = mp_phi(math.exp(-gamma), 1, n0)
        assert tau(n0, gamma) == pytest.approx(ref, rel=1e-10)

    def test_frozen(self):
        assert tau(1, math.log(2)) == pytest.approx(1.3862943611198906, rel=1e-14)
        assert tau(5, 0.1) == pytest.approx(1.0278890903251379, rel=1e-12)
        assert tau(20, 1.0) == pytest.approx(0.077014694067900685, rel=1e-12)

    def test_large_gamma_limit(self):
        # only the first term survives
        assert tau(1, 40.0) == pytest.approx(1.0, rel=1e-15)
        assert tau(7, 40.0) == pytest.approx(1 / 7, rel=1e-15)

    @pytest.mark.parametrize("n0,gamma", [(0, 1.0), (1.5, 1.0), (1, 0.0), (1, -1.0), (1, math.inf)])
    def test_invalid(self, n0, gamma):
        with pytest.raises(InvalidParameter):
            tau(n0, gamma)


class TestPartition:
    def test_exact_small_cases(self):
        assert partition_z(1, math.log(2)) == pytest.approx(math.log(2), rel=1e-15)
        assert partition_z(2, math.log(2)) == pytest.approx(math.log(2) - 0.5, rel=1e-14)

    @pytest.mark.parametrize("n0,gamma,ref", [
        (5, 0.1, 0.62344624806632449),
        (20, 1.0, 1.5873911565905081e-10),
        (3, 2.5, 0.00019651161859665245),
    ])
    def test_frozen(self, n0, gamma, ref):
        assert partition_z(n0, gamma) == pytest.approx(ref, rel=1e-11)

    @given(n0=st.integers(1, 60), gamma=st.floats(0.01, 8.0))
    def test_consistent_with_tau(self, n0, gamma):
        assert partition_z(n0, gamma) == pytest.approx(math.exp(-gamma * n0) * tau(n0, gamma), rel=1e-9)


class TestAlpha:
    def test_no_exclusion(self):
        assert alpha(1, 0.3, partition_z(1, 0.3)) == 1.0

    @pytest.mark.parametrize("n0,gamma,ref", [
        (5, 0.1, 0.49659685226936474),
        (20, 1.0, 0.073353002295238187),
        (3, 2.5, 0.34406499441222446),
    ])
    def test_frozen(self, n0, gamma, ref):
        assert alpha(n0, gamma, partition_z(n0, gamma)) == pytest.approx(ref, rel=1e-10)

    @given(n0=st.integers(2, 40), gamma=st.floats(0.01, 5.0))
    def test_weighted_reciprocal_mean(self, n0, gamma):
        # alpha = 1 - (n0 - 1) * E[1/N] under the class-count weights
        z = math.exp(-gamma)
        Z = partition_z(n0, gamma)
        K = n0 + int(40 / gamma) + 50
        ref = 1 - (n0 - 1) * math.fsum(z**N / (N * Z) / N for N in range(n0, K))
        assert alpha(n0, gamma, Z) == pytest.approx(ref, rel=1e-8)

    @given(n0=st.integers(1, 80), gamma=st.floats(0.001, 8.0))
    def test_lower_bound(self, n0, gamma):
        assert alpha(n0, gamma, partition_z(n0, gamma)) >= 1 / n0 - 1e-12

    def test_subnormal_partition_value(self):
        Z = partition_z(74, 10.0)
        assert 0 < Z < 1e-307
        with pytest.raises(NumericalUnderflow):
            alpha(74, 10.0, Z)

    def test_inconsistent_partition_value(self):
        with pytest.raises(NumericalUnderflow):
            alpha(5, 0.1, 1e-6)
        with pytest.raises(InvalidParameter):
            alpha(5, 0.1, 0.0)
