import math

import numpy as np
import pytest

from extkernel.fredholm import (
    FredholmConfig,
    lmax_cdf,
    lmax_cdf_detail,
    lmax_quantile,
)
from extkernel.source_kernel import SourceSpec, build_model


def phi(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


@pytest.fixture(scope="module")
def rank1_model(gaussian, gaussian_table):
    return build_model(SourceSpec(1, 1, (1.0,)), gaussian, table=gaussian_table)


@pytest.fixture(scope="module")
def rank2_model(gaussian, gaussian_table):
    return build_model(SourceSpec(4, 2, (1.0, -0.5)), gaussian, table=gaussian_table)


class TestConfig:
    def test_rejects_tiny_node_count(self):
        with pytest.raises(ValueError):
            FredholmConfig(m=2)

    def test_rejects_bad_tail_tol(self):
        with pytest.raises(ValueError):
            FredholmConfig(tail_tol=0.0)


class TestClosedForm:
    def test_single_eigenvalue_gaussian(self, rank1_model):
        # n=1, a=1: lmax ~ N(1/2, 1/2), so P(lmax <= s) = Phi(sqrt(2)(s - 1/2))
        for s in np.linspace(-1.5, 3.0, 25):
            want = phi(math.sqrt(2.0) * (s - 0.5))
            assert lmax_cdf(rank1_model, float(s)) == pytest.approx(want, abs=1e-10)

    def test_median_and_upper_tail(self, rank1_model):
        assert lmax_cdf(rank1_model, 0.5) == pytest.approx(0.5, abs=1e-8)
        assert lmax_cdf(rank1_model, 2.5) == pytest.approx(
            phi(2.0 * math.sqrt(2.0)), abs=1e-8
        )


class TestConvergenceAndShape:
    def test_doubling_converged(self, rank2_model):
        res = lmax_cdf_detail(rank2_model, 1.0)
        finer = lmax_cdf_detail(
            rank2_model, 1.0, FredholmConfig(m=2 * res.m, m_cap=4 * res.m)
        )
        assert abs(res.cdf - finer.cdf) <= 1e-8
        assert res.m <= FredholmConfig().m_cap

    def test_monotone_in_s(self, rank2_model):
        ss = np.linspace(-2.0, 5.0, 15)
        vals = [lmax_cdf(rank2_model, float(s)) for s in ss]
        assert all(b >= a - 1e-10 for a, b in zip(vals, vals[1:]))

    def test_limits(self, rank2_model):
        assert lmax_cdf(rank2_model, -8.0) == pytest.approx(0.0, abs=1e-6)
        assert lmax_cdf(rank2_model, 12.0) == pytest.approx(1.0, abs=1e-6)

    def test_in_unit_interval(self, rank2_model):
        for s in (-3.0, 0.0, 2.0, 6.0):
            v = lmax_cdf(rank2_model, s)
            assert 0.0 <= v <= 1.0

    def test_quartic_weight(self, quartic, quartic_table):
        model = build_model(SourceSpec(3, 1, (1.0,)), quartic, table=quartic_table)
        assert lmax_cdf(model, -5.0) == pytest.approx(0.0, abs=1e-6)
        assert lmax_cdf(model, 5.0) == pytest.approx(1.0, abs=1e-6)
        assert 0.0 < lmax_cdf(model, 1.2) < 1.0


class TestQuantile:
    def test_inverts_cdf(self, rank1_model):
        # median of N(1/2, 1/2)
        q = lmax_quantile(rank1_model, 0.5)
        assert q == pytest.approx(0.5, abs=1e-5)

    def test_rejects_bad_level(self, rank1_model):
        with pytest.raises(ValueError):
            lmax_quantile(rank1_model, 1.5)

    def test_unbracketed_level(self, rank1_model):
        with pytest.raises(ValueError, match="bracket"):
            lmax_quantile(rank1_model, 0.5, lo=5.0, hi=10.0)
