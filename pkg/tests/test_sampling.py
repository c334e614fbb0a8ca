import math

import numpy as np
import pytest

from extkernel.fredholm import lmax_cdf
from extkernel.sampling import (
    empirical_density,
    empirical_lmax_cdf,
    sample_spectra,
)
from extkernel.source_kernel import SourceSpec, build_model, kernel_diag


SPEC = SourceSpec(4, 2, (1.0, -0.5))


@pytest.fixture(scope="module")
def batch():
    return sample_spectra(SPEC, 800, seed=1234)


class TestSampler:
    def test_shapes_and_ordering(self, batch):
        assert batch.eigenvalues.shape == (800, 4)
        assert np.all(np.diff(batch.eigenvalues, axis=1) <= 0)

    def test_reproducible(self):
        a = sample_spectra(SPEC, 5, seed=7)
        b = sample_spectra(SPEC, 5, seed=7)
        assert np.array_equal(a.eigenvalues, b.eigenvalues)

    def test_prefix_stability(self):
        # per-index streams: a longer batch extends a shorter one
        a = sample_spectra(SPEC, 3, seed=7)
        b = sample_spectra(SPEC, 6, seed=7)
        assert np.array_equal(a.eigenvalues, b.eigenvalues[:3])

    def test_seed_changes_draws(self):
        a = sample_spectra(SPEC, 3, seed=7)
        b = sample_spectra(SPEC, 3, seed=8)
        assert not np.array_equal(a.eigenvalues, b.eigenvalues)

    def test_rejects_nongaussian_weight(self, quartic):
        with pytest.raises(ValueError, match="Gaussian|e\\^"):
            sample_spectra(SPEC, 2, seed=0, weight=quartic)

    def test_rejects_empty_batch(self):
        with pytest.raises(ValueError):
            sample_spectra(SPEC, 0, seed=0)

    def test_mean_trace_matches_shift(self):
        # E[Tr M] = Tr A/2 = (1 - 0.5)/2
        batch = sample_spectra(SPEC, 4000, seed=42)
        traces = batch.eigenvalues.sum(axis=1)
        want = 0.25
        se = traces.std(ddof=1) / math.sqrt(batch.count)
        assert abs(traces.mean() - want) <= 4 * se


class TestEmpiricalStatistics:
    def test_density_mass_is_n(self, batch):
        edges, heights = empirical_density(batch, 40)
        assert float(np.sum(heights * np.diff(edges))) == pytest.approx(4.0)

    def test_density_range_override(self, batch):
        edges, _ = empirical_density(batch, 20, lo=-3.0, hi=3.0)
        assert edges[0] == -3.0 and edges[-1] == 3.0

    def test_density_rejects_few_bins(self, batch):
        with pytest.raises(ValueError):
            empirical_density(batch, 5)

    def test_lmax_cdf_bounds_and_monotone(self, batch):
        vals = [empirical_lmax_cdf(batch, s) for s in (-5.0, 1.0, 2.0, 8.0)]
        assert vals[0] == 0.0 and vals[-1] == 1.0
        assert vals == sorted(vals)


class TestAgainstAnalytic:
    def test_lmax_law(self, batch, gaussian, gaussian_table):
        model = build_model(SPEC, gaussian, table=gaussian_table)
        qs = np.quantile(batch.eigenvalues[:, 0], [0.2, 0.5, 0.8])
        for s in qs:
            p = lmax_cdf(model, float(s))
            phat = empirical_lmax_cdf(batch, float(s))
            se = math.sqrt(max(p * (1 - p), 1e-12) / batch.count)
            assert abs(phat - p) <= 4 * se

    def test_density_matches_kernel_diagonal(self, batch, gaussian, gaussian_table):
        model = build_model(SPEC, gaussian, table=gaussian_table)
        edges, heights = empirical_density(batch, 24, lo=-2.5, hi=3.0)
        mids = 0.5 * (edges[:-1] + edges[1:])
        dens = kernel_diag(model, mids)
        widths = np.diff(edges)
        # binomial error bars on each bin count
        p_bin = dens * widths / SPEC.n
        se = np.sqrt(np.maximum(p_bin * (1 - p_bin), 1e-12) * SPEC.n / batch.count)
        se_height = se / widths
        assert np.all(np.abs(heights - dens) <= 4 * se_height + 1e-9)
