"""Gaussian-copula autoregression with GPD marginals.

A latent Gaussian AR(1), ``Y_t = rho * Y_{t-1} + sqrt(1 - rho**2) * v_t``,
started in its stationary law, is pushed through ``G^-1(Phi(.))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtri

from .errors import DegenerateDataError, InsufficientDataError, ParameterError
from .gpd import GpdFit, GpdParams, _ppf_from_log_sf, gpd_cdf, gpd_fit_marginal
from .pipeline import Path, as_values

MIN_LENGTH = 100
PROB_CLIP = 1e-12
RHO_CLIP = 0.999


@dataclass(frozen=True)
class GcParams:
    gpd: GpdParams
    rho: float

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise ParameterError(f"rho must lie in [-1, 1], got {self.rho}")

    @property
    def rho_bar(self) -> float:
        return math.sqrt(1.0 - self.rho * self.rho)


@dataclass(frozen=True)
class GcFit:
    params: GcParams
    marginal: GpdFit


def latent_ar1(rho: float, n: int, stream) -> np.ndarray:
    """Stationary Gaussian AR(1) of length ``n`` from ``n`` standard normal draws."""
    e = stream.standard_normal(n)
    y = np.empty(n)
    y[0] = e[0]
    rho_bar = math.sqrt(1.0 - rho * rho)
    prev = y[0]
    for t in range(1, n):
        prev = rho * prev + rho_bar * e[t]
        y[t] = prev
    return y


def gc_simulate(params: GcParams, n: int, stream) -> Path:
    """Simulate ``X_0..X_{n-1}``; ``Y_0`` is the first standard normal draw."""
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n}")
    y = latent_ar1(params.rho, n, stream)
    g = params.gpd
    # G^-1(Phi(y)) through the survival scale, Phi(-y) = 1 - Phi(y)
    x = _ppf_from_log_sf(log_ndtr(-y), g.mu, g.sigma, g.xi)
    return Path(x, meta="gc")


def gaussianize(series, marginal: GpdParams) -> np.ndarray:
    """``Phi^-1(G(x))`` with probabilities clipped to ``[1e-12, 1 - 1e-12]``."""
    u = np.clip(gpd_cdf(marginal, as_values(series)), PROB_CLIP, 1.0 - PROB_CLIP)
    return ndtri(u)


def lag1_autocorrelation(z) -> float:
    z = np.asarray(z, dtype=float)
    d = z - z.mean()
    denom = np.dot(d, d)
    if denom == 0:
        raise DegenerateDataError("series is constant")
    return float(np.dot(d[:-1], d[1:]) / denom)


def gc_fit(series, mu: float | None = None) -> GcFit:
    """Fit the marginal by GPD likelihood, then ``rho`` from the Gaussianized series.

    ``mu`` defaults to a point just below the sample minimum, see
    :func:`extremal.gpd.default_location`.
    """
    x = as_values(series)
    if len(x) < MIN_LENGTH:
        raise InsufficientDataError(f"need at least {MIN_LENGTH} observations, got {len(x)}")
    if np.ptp(x) == 0:
        raise DegenerateDataError("series is constant")
    marginal = gpd_fit_marginal(x, mu)
    z = gaussianize(x, marginal.params)
    rho = float(np.clip(lag1_autocorrelation(z), -RHO_CLIP, RHO_CLIP))
    return GcFit(GcParams(marginal.params, rho), marginal)
