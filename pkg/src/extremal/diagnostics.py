"""Evaluation instruments: lagged PP pairs, inter-arrival gaps, KS distance, ACF.

Everything here is a deterministic function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DegenerateDataError, DomainError, EmptyDataError
from .gpd import GpdParams, extract_exceedances, gpd_cdf
from .pipeline import as_values

DEFAULT_LAGS = (1, 2, 5, 10)
PP_SUPPRESSED_NOTE = (
    "lagged PP pairs suppressed: dependence in the GLM process enters through "
    "its regression parameters, not through a serial copula"
)


@dataclass(frozen=True)
class PpPairs:
    lag: int
    u: np.ndarray
    v: np.ndarray

    @property
    def pairs(self) -> np.ndarray:
        return np.column_stack([self.u, self.v])

    def __len__(self):
        return len(self.u)


@dataclass(frozen=True)
class InterArrivals:
    """Gaps between successive exceedances of ``threshold``.

    ``insufficient`` flags series with fewer than two exceedances, for
    which ``gaps`` is empty.
    """

    threshold: float
    gaps: np.ndarray
    first_index: int | None
    insufficient: bool = False

    def __len__(self):
        return len(self.gaps)

    @property
    def mean_gap(self) -> float:
        return float(self.gaps.mean()) if len(self.gaps) else math.nan


def probability_transform(series, marginal: GpdParams | None = None) -> np.ndarray:
    """Parametric ``G(x)`` or, without a marginal, ranks divided by ``n + 1``."""
    x = as_values(series)
    if marginal is None:
        return stats.rankdata(x) / (len(x) + 1)
    return np.asarray(gpd_cdf(marginal, x), dtype=float)


def lagged_pp(series, lag: int, marginal: GpdParams | None = None) -> PpPairs:
    x = as_values(series)
    if lag < 1 or lag >= len(x):
        raise DomainError(f"lag must be in [1, {len(x) - 1}], got {lag}")
    u = probability_transform(x, marginal)
    return PpPairs(lag, u[:-lag], u[lag:])


def pp_uniformity_test(pp: PpPairs, bins: int = 4):
    """Chi-square test of the PP pairs against the uniform law on the unit square.

    Returns ``(statistic, pvalue)`` with ``bins**2 - 1`` degrees of freedom.
    """
    counts, _, _ = np.histogram2d(pp.u, pp.v, bins=bins, range=[[0, 1], [0, 1]])
    expected = len(pp) / bins**2
    stat = float(np.sum((counts - expected) ** 2 / expected))
    return stat, float(stats.chi2.sf(stat, bins**2 - 1))


def inter_arrivals(series, threshold: float) -> InterArrivals:
    idx = extract_exceedances(series, threshold).indices
    if len(idx) < 2:
        first = int(idx[0]) if len(idx) else None
        return InterArrivals(float(threshold), np.array([], dtype=np.int64), first, insufficient=True)
    return InterArrivals(float(threshold), np.diff(idx), int(idx[0]))


def ks_distance(series, marginal: GpdParams) -> float:
    """Sup distance between the empirical cdf of ``series`` and ``G``."""
    x = np.sort(as_values(series))
    n = len(x)
    if n == 0:
        raise EmptyDataError("empty series")
    f = np.asarray(gpd_cdf(marginal, x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Exact one-sample KS critical value at level ``alpha``."""
    return float(stats.kstwo.isf(alpha, n))


def acf(series, max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags ``0..max_lag`` (biased estimator)."""
    x = as_values(series)
    if max_lag < 0 or len(x) <= max_lag:
        raise DomainError(f"series of length {len(x)} too short for max_lag={max_lag}")
    d = x - x.mean()
    c0 = np.dot(d, d)
    if c0 == 0:
        raise DegenerateDataError("autocorrelation undefined for a constant series")
    n = len(x)
    return np.array([np.dot(d[: n - k], d[k:]) / c0 for k in range(max_lag + 1)])


def lag_kendall_tau(series, lag: int = 1) -> float:
    x = as_values(series)
    return float(stats.kendalltau(x[:-lag], x[lag:]).statistic)


# ---------------------------------------------------------------------------
# gap distributions


def gap_bin_edges(max_gap: int) -> np.ndarray:
    """Left edges 1, 2, 3, 4, 6, 8, 11, 16, ... roughly doubling every two bins."""
    edges = sorted({max(1, int(math.floor(2 ** (k / 2)))) for k in range(0, 2 * int(math.log2(max_gap + 1)) + 4)})
    edges = [e for e in edges if e <= max_gap]
    return np.array(edges + [max_gap + 1])


def gap_distance(gaps_a, gaps_b) -> float:
    """Two-sample chi-square homogeneity statistic on binned gaps; 0 for equal histograms."""
    a = np.asarray(gaps_a)
    b = np.asarray(gaps_b)
    if len(a) == 0 or len(b) == 0:
        return math.nan
    edges = gap_bin_edges(int(max(a.max(), b.max())))
    ca, _ = np.histogram(a, bins=edges)
    cb, _ = np.histogram(b, bins=edges)
    keep = (ca + cb) > 0
    ca, cb = ca[keep], cb[keep]
    total = ca + cb
    ea = total * len(a) / (len(a) + len(b))
    eb = total * len(b) / (len(a) + len(b))
    return float(np.sum((ca - ea) ** 2 / ea + (cb - eb) ** 2 / eb))


def geometric_gap_test(gaps, p: float, min_expected: float = 5.0):
    """Chi-square goodness of fit of gaps to Geometric(p) on {1, 2, ...}.

    Cells are the single values 1..K with the largest K keeping every
    expected count at least ``min_expected``, plus a tail cell ``> K``.
    Returns ``(statistic, dof, pvalue)``.
    """
    g = np.asarray(gaps)
    n = len(g)
    if n == 0:
        raise EmptyDataError("no gaps")
    k = 1
    while n * p * (1 - p) ** k >= min_expected and n * (1 - p) ** (k + 1) >= min_expected:
        k += 1
    values = np.arange(1, k + 1)
    probs = p * (1 - p) ** (values - 1)
    expected = n * np.append(probs, (1 - p) ** k)
    observed = np.append([(g == v).sum() for v in values], (g > k).sum())
    stat = float(np.sum((observed - expected) ** 2 / expected))
    dof = len(expected) - 1
    return stat, dof, float(stats.chi2.sf(stat, dof))


# ---------------------------------------------------------------------------
# bundled report


@dataclass
class DiagnosticsReport:
    pp: dict[int, PpPairs] = field(default_factory=dict)
    pp_note: str = ""
    inter_arrivals: InterArrivals | None = None
    ks: float = math.nan
    ks_critical: float = math.nan
    acf: np.ndarray = field(default_factory=lambda: np.array([]))


def diagnose(
    series,
    threshold: float,
    marginal: GpdParams | None = None,
    lags=DEFAULT_LAGS,
    max_lag: int = 10,
    pp: bool = True,
    pp_marginal: GpdParams | None = None,
) -> DiagnosticsReport:
    """All instruments for one series.

    ``marginal`` is used for the KS distance; ``pp_marginal`` selects the
    parametric PP transform (ranks when None). With ``pp=False`` the PP
    pairs are omitted and ``pp_note`` says why.
    """
    x = as_values(series)
    report = DiagnosticsReport()
    if pp:
        report.pp = {lag: lagged_pp(x, lag, pp_marginal) for lag in lags if lag < len(x)}
    else:
        report.pp_note = PP_SUPPRESSED_NOTE
    report.inter_arrivals = inter_arrivals(x, threshold)
    if marginal is not None:
        report.ks = ks_distance(x, marginal)
        report.ks_critical = ks_critical_value(len(x))
    report.acf = acf(x, min(max_lag, len(x) - 1))
    return report
