"""Generalized Pareto distribution: kernel, peaks over threshold and MLE.

The parameterization is the usual one,

    G(x) = 1 - (1 + xi * (x - mu) / sigma) ** (-1 / xi),

with the exponential limit ``1 - exp(-(x - mu) / sigma)`` used whenever
``|xi| < XI_EPS``. All kernel functions broadcast over their argument and
return a Python float for scalar input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .errors import (
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    InsufficientDataError,
    ParameterError,
    SupportError,
)

XI_EPS = 1e-8

# Shape box used by the likelihood fits.
XI_BOUNDS = (-0.5, 2.5)

MIN_EXCESSES = 5


@dataclass(frozen=True)
class GpdParams:
    """Location ``mu``, scale ``sigma`` and shape ``xi`` of a GPD."""

    mu: float = 0.0
    sigma: float = 1.0
    xi: float = 0.0

    def __post_init__(self):
        for name in ("mu", "sigma", "xi"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"GPD {name} must be finite, got {value}")
            object.__setattr__(self, name, float(value))
        if self.sigma <= 0:
            raise ParameterError(f"GPD scale must be positive, got {self.sigma}")

    @property
    def upper_endpoint(self) -> float:
        if self.xi < 0:
            return self.mu - self.sigma / self.xi
        return math.inf


@dataclass(frozen=True)
class Exceedances:
    """Peaks over ``threshold``: positions in the series and excess sizes."""

    indices: np.ndarray
    excesses: np.ndarray
    threshold: float

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class GpdFit:
    params: GpdParams
    loglik: float
    nobs: int


# ---------------------------------------------------------------------------
# broadcasting kernels on raw arrays


def _log_sf(x, mu, sigma, xi):
    z = np.maximum((np.asarray(x, dtype=float) - mu) / sigma, 0.0)
    xi = np.asarray(xi, dtype=float)
    small = np.abs(xi) < XI_EPS
    xi_safe = np.where(small, 1.0, xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = xi_safe * z
        general = np.where(arg > -1.0, -np.log1p(np.maximum(arg, -1.0)) / xi_safe, -np.inf)
    return np.where(small, -z, general)


def _ppf_from_log_sf(log_sf, mu, sigma, xi):
    # log_sf <= 0; -inf maps to the upper endpoint
    y = -np.asarray(log_sf, dtype=float)
    xi = np.asarray(xi, dtype=float)
    small = np.abs(xi) < XI_EPS
    xi_safe = np.where(small, 1.0, xi)
    with np.errstate(over="ignore", invalid="ignore"):
        general = np.expm1(xi_safe * y) / xi_safe
    return mu + sigma * np.where(small, y, general)


def _ppf(p, mu, sigma, xi):
    with np.errstate(divide="ignore"):
        return _ppf_from_log_sf(np.log1p(-np.asarray(p, dtype=float)), mu, sigma, xi)


def _logpdf(x, mu, sigma, xi):
    z = (np.asarray(x, dtype=float) - mu) / sigma
    xi = np.asarray(xi, dtype=float)
    small = np.abs(xi) < XI_EPS
    xi_safe = np.where(small, 1.0, xi)
    inside = (z >= 0) & ((xi_safe >= 0) | small | (xi_safe * z > -1.0))
    zs = np.where(inside, z, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        general = (1.0 + 1.0 / xi_safe) * np.log1p(xi_safe * zs)
    core = np.where(small, zs, general)
    return np.where(inside, -np.log(sigma) - core, -np.inf)


def _scalar_or_array(result, like):
    if np.ndim(like) == 0:
        return float(result)
    return result


# ---------------------------------------------------------------------------
# public kernel


def gpd_cdf(params: GpdParams, x):
    """Distribution function, clamped to 0 below and 1 above the support."""
    out = -np.expm1(_log_sf(x, params.mu, params.sigma, params.xi))
    return _scalar_or_array(out, x)


def gpd_sf(params: GpdParams, x):
    """Survival function ``1 - G(x)``, accurate deep in the tail."""
    out = np.exp(_log_sf(x, params.mu, params.sigma, params.xi))
    return _scalar_or_array(out, x)


def gpd_quantile(params: GpdParams, p):
    """Quantile function on ``[0, 1)``."""
    arr = np.asarray(p, dtype=float)
    if not np.all((arr >= 0) & (arr < 1)):
        raise DomainError("quantile probabilities must lie in [0, 1)")
    out = _ppf(arr, params.mu, params.sigma, params.xi)
    return _scalar_or_array(out, p)


def gpd_isf(params: GpdParams, s):
    """Inverse survival function on ``(0, 1]``; ``s = 0`` gives the upper endpoint."""
    arr = np.asarray(s, dtype=float)
    if not np.all((arr >= 0) & (arr <= 1)):
        raise DomainError("survival probabilities must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        out = _ppf_from_log_sf(np.log(arr), params.mu, params.sigma, params.xi)
    return _scalar_or_array(out, s)


def gpd_logpdf(params: GpdParams, x):
    """Log density; ``-inf`` outside the support (open at a finite upper end)."""
    out = _logpdf(x, params.mu, params.sigma, params.xi)
    return _scalar_or_array(out, x)


def gpd_pdf(params: GpdParams, x):
    return _scalar_or_array(np.exp(gpd_logpdf(params, x)), x)


def gpd_loglik(params: GpdParams, x) -> float:
    return float(np.sum(_logpdf(x, params.mu, params.sigma, params.xi)))


def gpd_sample(params: GpdParams, stream, n: int) -> np.ndarray:
    """Draw ``n`` variates by inverse transform of ``stream.random(n)``."""
    if n < 0:
        raise DomainError(f"sample size must be non-negative, got {n}")
    u = stream.random(int(n))
    return _ppf(u, params.mu, params.sigma, params.xi)


# ---------------------------------------------------------------------------
# peaks over threshold


def extract_exceedances(series, threshold: float) -> Exceedances:
    """Observations strictly above ``threshold`` and their excesses."""
    values = np.asarray(getattr(series, "values", series), dtype=float)
    idx = np.flatnonzero(values > threshold)
    return Exceedances(indices=idx, excesses=values[idx] - threshold, threshold=float(threshold))


# ---------------------------------------------------------------------------
# maximum likelihood


def _moment_start(x):
    m = x.mean()
    v = x.var()
    xi = 0.5 * (1.0 - m * m / v)
    sigma = 0.5 * m * (m * m / v + 1.0)
    lo, hi = XI_BOUNDS
    feasible = lo < xi < hi and sigma > 0 and (xi >= 0 or x.max() < -sigma / xi)
    if not feasible:
        return math.log(m), 0.1
    return math.log(sigma), xi


def _nll_factory(x):
    n = len(x)
    xmax = x.max()
    sx = x.sum()
    lo, hi = XI_BOUNDS

    def nll(theta):
        log_sigma, xi = theta
        if not (lo < xi < hi) or not math.isfinite(log_sigma):
            return math.inf
        sigma = math.exp(log_sigma)
        if abs(xi) < XI_EPS:
            return n * log_sigma + sx / sigma
        if xi < 0 and xi * xmax / sigma <= -1.0:
            return math.inf
        return n * log_sigma + (1.0 + 1.0 / xi) * float(np.sum(np.log1p(xi * x / sigma)))

    return nll


def gpd_fit_mle(excesses, maxiter: int = 5000) -> GpdFit:
    """Maximum likelihood fit of ``GPD(0, sigma, xi)`` to positive excesses.

    The search runs Nelder-Mead on ``(log sigma, xi)`` with ``xi`` confined
    to ``XI_BOUNDS``, started from the method-of-moments estimate and
    restarted once from its own optimum.

    Raises
    ------
    InsufficientDataError
        Fewer than ``MIN_EXCESSES`` observations.
    DegenerateDataError
        All excesses equal.
    ConvergenceError
        No convergence within ``maxiter`` iterations; ``best`` carries the
        best fit found.
    """
    x = np.asarray(excesses, dtype=float).ravel()
    if len(x) < MIN_EXCESSES:
        raise InsufficientDataError(f"need at least {MIN_EXCESSES} excesses, got {len(x)}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise SupportError("excesses must be finite and strictly positive")
    if np.ptp(x) == 0:
        raise DegenerateDataError("all excesses are equal; GPD fit is degenerate")

    nll = _nll_factory(x)
    start = np.array(_moment_start(x))
    # summation noise in the likelihood grows with the sample size
    options = dict(xatol=1e-9, fatol=1e-10 + 1e-12 * len(x), maxiter=maxiter, maxfev=2 * maxiter)
    res = None
    for _ in range(2):
        simplex = np.array([start, start + [0.1, 0.0], start + [0.0, 0.05]])
        res = minimize(nll, start, method="Nelder-Mead", options=dict(options, initial_simplex=simplex))
        start = res.x
    fit = GpdFit(
        params=GpdParams(0.0, math.exp(res.x[0]), float(res.x[1])),
        loglik=-float(res.fun),
        nobs=len(x),
    )
    if not res.success:
        raise ConvergenceError(f"GPD likelihood search did not converge: {res.message}", best=fit)
    return fit


def default_location(values) -> float:
    """Location just below the sample minimum.

    The offset ``(mean - min) / n`` is the expected gap between the minimum
    and the true lower endpoint for an exponential-type sample.
    """
    x = np.asarray(values, dtype=float)
    lo = x.min()
    spread = x.mean() - lo
    if spread <= 0:
        raise DegenerateDataError("series is constant")
    return float(lo - spread / len(x))


def gpd_fit_marginal(values, mu: float | None = None) -> GpdFit:
    """Fit a full GPD marginal with location ``mu`` (default just below the minimum)."""
    x = np.asarray(getattr(values, "values", values), dtype=float)
    if mu is None:
        mu = default_location(x)
    if np.any(x <= mu):
        raise SupportError(f"all values must exceed the location {mu}")
    fit = gpd_fit_mle(x - mu)
    return replace(fit, params=replace(fit.params, mu=float(mu)))
