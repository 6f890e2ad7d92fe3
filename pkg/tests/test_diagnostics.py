import math

import numpy as np
import pytest
from scipy import stats

from extremal.diagnostics import (
    PP_SUPPRESSED_NOTE,
    acf,
    diagnose,
    gap_bin_edges,
    gap_distance,
    geometric_gap_test,
    inter_arrivals,
    ks_critical_value,
    ks_distance,
    lag_kendall_tau,
    lagged_pp,
    pp_uniformity_test,
    probability_transform,
)
from extremal.errors import DegenerateDataError, DomainError
from extremal.gpd import GpdParams, gpd_cdf, gpd_quantile, gpd_sample
from extremal.rng import RandomStream

G = GpdParams(0, 1, 0.3)


class TestPp:
    def test_iid_fills_square(self):
        x = gpd_sample(G, RandomStream(1), 20_000)
        pp = lagged_pp(x, 1)
        assert len(pp) == 19_999
        assert pp_uniformity_test(pp)[1] > 0.01

    def test_constant_lag_on_diagonal(self):
        pp = lagged_pp(np.full(30, 2.0), 1)
        assert np.array_equal(pp.u, pp.v)

    def test_rank_mode_values(self):
        x = gpd_sample(G, RandomStream(2), 500)
        u = probability_transform(x)
        assert sorted(u) == pytest.approx(np.arange(1, 501) / 501)

    def test_parametric_mode(self):
        x = np.array([0.5, 1.0, 2.0])
        assert np.allclose(probability_transform(x, G), gpd_cdf(G, x))

    def test_in_unit_square(self):
        x = gpd_sample(G, RandomStream(3), 100)
        pp = lagged_pp(x, 5, G)
        assert np.all((pp.pairs >= 0) & (pp.pairs <= 1))
        assert len(pp) == 95

    def test_bad_lag(self):
        with pytest.raises(DomainError):
            lagged_pp([1.0, 2.0], 2)


class TestInterArrivals:
    def test_hand_count(self):
        ia = inter_arrivals([1, 5, 2, 6, 7, 1], 4)
        assert ia.gaps.tolist() == [2, 1]
        assert ia.first_index == 1

    def test_none(self):
        ia = inter_arrivals([1, 2, 3], 10)
        assert len(ia) == 0 and ia.insufficient
        assert math.isnan(ia.mean_gap)

    def test_iid_geometric(self):
        p = 0.05
        x = gpd_sample(G, RandomStream(4), 100_000)
        ia = inter_arrivals(x, gpd_quantile(G, 1 - p))
        assert geometric_gap_test(ia.gaps, p)[2] > 0.01

    def test_geometric_test_rejects_clusters(self):
        gaps = np.tile([1, 1, 1, 60], 500)
        assert geometric_gap_test(gaps, 0.05)[2] < 1e-6

    def test_gap_distance_identical(self):
        g = np.array([1, 3, 5, 20, 2])
        assert gap_distance(g, g) == 0.0

    def test_gap_distance_separates(self):
        rng = np.random.default_rng(0)
        a = rng.geometric(0.05, 2000)
        b = rng.geometric(0.2, 2000)
        assert gap_distance(a, b) > gap_distance(a, rng.geometric(0.05, 2000))

    def test_bin_edges_cover(self):
        edges = gap_bin_edges(100)
        assert edges[0] == 1 and edges[-1] == 101
        assert np.all(np.diff(edges) > 0)


class TestKs:
    def test_quantile_grid(self):
        n = 200
        x = gpd_quantile(G, (np.arange(1, n + 1) - 0.5) / n)
        assert ks_distance(x, G) == pytest.approx(0.5 / n, abs=1e-12)

    def test_single_median(self):
        assert ks_distance([gpd_quantile(G, 0.5)], G) == pytest.approx(0.5, abs=1e-12)

    def test_matches_scipy(self):
        x = gpd_sample(G, RandomStream(5), 3000)
        ref = stats.kstest(x, lambda t: gpd_cdf(G, t)).statistic
        assert ks_distance(x, G) == pytest.approx(ref, abs=1e-14)

    def test_sample_below_critical(self):
        x = gpd_sample(G, RandomStream(6), 100_000)
        assert ks_distance(x, G) < ks_critical_value(100_000, 0.01)

    def test_critical_asymptotic(self):
        assert ks_critical_value(100_000, 0.01) == pytest.approx(1.6276 / math.sqrt(100_000), rel=0.01)


class TestAcf:
    def test_lag_zero(self):
        assert acf(np.arange(10.0), 3)[0] == 1.0

    def test_white_noise(self):
        x = RandomStream(7).standard_normal(10_000)
        assert abs(acf(x, 1)[1]) < 2 / math.sqrt(10_000)

    def test_ar1(self):
        e = RandomStream(8).standard_normal(100_000)
        x = np.empty_like(e)
        x[0] = e[0]
        for t in range(1, len(e)):
            x[t] = 0.8 * x[t - 1] + 0.6 * e[t]
        r = acf(x, 5)
        for k in range(1, 6):
            assert r[k] == pytest.approx(0.8**k, abs=0.02)

    def test_constant(self):
        with pytest.raises(DegenerateDataError):
            acf(np.ones(10), 2)

    def test_kendall(self):
        x = RandomStream(9).standard_normal(1000)
        assert abs(lag_kendall_tau(x)) < 0.1


class TestReport:
    def test_bundle(self):
        x = gpd_sample(G, RandomStream(10), 1000)
        rep = diagnose(x, 3.0, G, lags=(1, 2))
        assert sorted(rep.pp) == [1, 2]
        assert rep.ks < rep.ks_critical
        assert len(rep.acf) == 11

    def test_suppressed(self):
        x = gpd_sample(G, RandomStream(10), 100)
        rep = diagnose(x, 3.0, pp=False)
        assert rep.pp == {} and rep.pp_note == PP_SUPPRESSED_NOTE
