"""Shot-noise-type process with exact GPD marginals.

Each step lifts the previous value, ``Y_t = G^-1(f0(G(X_{t-1})))`` with
``f0(u) = u / ((1 - u) * beta + u)``, and then either holds it (with
probability ``beta``) or drops down to ``min(v_t, Y_t)`` for a fresh
``v_t ~ G``. The marginal law ``G`` is preserved exactly.

All lifts are computed on the log-survival scale, where
``f0`` reads ``s -> beta * s / (1 - (1 - beta) * s)``; this keeps the upper
tail accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError, ModelInconsistencyError, ParameterError, SupportError
from .gpd import XI_EPS, GpdFit, GpdParams, _log_sf, _logpdf, _ppf_from_log_sf, gpd_fit_marginal, gpd_sample
from .pipeline import Path, as_values

MIN_LENGTH = 100
HOLD_RTOL = 1e-9
# band used when G itself is estimated; absorbs the marginal estimation error
ESTIMATED_MARGINAL_RTOL = 5e-3
BETA_GRID = np.round(np.arange(1, 1000) * 0.001, 3)


@dataclass(frozen=True)
class SntParams:
    gpd: GpdParams
    beta: float

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ParameterError(f"beta must lie in [0, 1], got {self.beta}")


@dataclass(frozen=True)
class SntFit:
    beta: float
    n_holds: int
    loglik: float


def f0_beta(u, beta):
    """Probability-scale lift; ``f0(0) = 0`` and, for ``beta = 0``, ``f0(u > 0) = 1``."""
    u = np.asarray(u, dtype=float)
    den = (1.0 - u) * beta + u
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, u / np.where(den > 0, den, 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


def f0_beta_inv(v, beta):
    """Inverse of :func:`f0_beta`, ``v * beta / (1 - v * (1 - beta))``."""
    v = np.asarray(v, dtype=float)
    den = 1.0 - v * (1.0 - beta)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, v * beta / np.where(den > 0, den, 1.0), 1.0)
    return float(out) if out.ndim == 0 else out


def one_step_marginal(v, beta):
    """``P(X_t <= G^-1(v))`` when ``X_{t-1} ~ G``; equals ``v`` identically."""
    v = np.asarray(v, dtype=float)
    lifted_below = f0_beta_inv(v, beta)
    den = 1.0 - v * (1.0 - beta)
    with np.errstate(invalid="ignore", divide="ignore"):
        dropped_below = np.where(den > 0, 1.0 - (1.0 - v) ** 2 / np.where(den > 0, den, 1.0), 1.0)
    return beta * lifted_below + (1.0 - beta) * dropped_below


def _lift_log_sf(log_s, beta):
    if beta == 0:
        return np.where(log_s == 0, 0.0, -np.inf)
    with np.errstate(divide="ignore"):
        out = math.log(beta) + log_s - np.log1p(-(1.0 - beta) * np.exp(log_s))
    # lift never moves below its argument
    return np.minimum(out, log_s)


def lift(params: SntParams, x_prev):
    """``f_beta(x) = G^-1(f0(G(x)))``; monotone, ``>= x``, identity for ``beta = 1``."""
    g = params.gpd
    x = np.asarray(x_prev, dtype=float)
    if np.any(x < g.mu):
        raise DomainError("lift argument below the support of G")
    if params.beta == 1.0:
        out = x.copy()
    else:
        ls = _lift_log_sf(_log_sf(x, g.mu, g.sigma, g.xi), params.beta)
        out = _ppf_from_log_sf(ls, g.mu, g.sigma, g.xi)
    return float(out) if out.ndim == 0 else out


def _scalar_lifter(params: SntParams):
    mu, sigma, xi, beta = params.gpd.mu, params.gpd.sigma, params.gpd.xi, params.beta
    small = abs(xi) < XI_EPS
    log_beta = math.log(beta) if beta > 0 else -math.inf

    def step(x):
        z = (x - mu) / sigma
        if small:
            ls = -z
        elif xi * z > -1.0:
            ls = -math.log1p(xi * z) / xi
        else:
            ls = -math.inf
        if beta == 0:
            if ls < 0:
                return params.gpd.upper_endpoint
            return x
        new = min(log_beta + ls - math.log1p(-(1.0 - beta) * math.exp(ls)), ls)
        if new == -math.inf:
            return params.gpd.upper_endpoint
        y = -new
        return mu + sigma * (y if small else math.expm1(xi * y) / xi)

    return step


def snt_simulate(params: SntParams, n: int, stream, x0: float | None = None) -> Path:
    """Simulate ``X_1..X_n``.

    Draw order: ``X_0`` from ``G`` (only when ``x0`` is None), then ``n``
    uniforms for the hold indicators, then ``n`` dropdown candidates.
    """
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n}")
    g = params.gpd
    if x0 is None:
        x0 = float(gpd_sample(g, stream, 1)[0])
    elif x0 < g.mu:
        raise DomainError("x0 below the support of G")
    hold = stream.random(n) < params.beta
    v = gpd_sample(g, stream, n)

    out = np.empty(n)
    x = float(x0)
    if params.beta == 1.0:
        out[:] = x
        return Path(out, meta="snt")
    step = _scalar_lifter(params)
    for t in range(n):
        y = step(x)
        x = y if hold[t] else min(v[t], y)
        out[t] = x
    return Path(out, meta="snt")


def implied_beta(params_gpd: GpdParams, x_prev, x_cur):
    """Dependency value for which ``x_cur`` is exactly the lift of ``x_prev``.

    Holds sit at the true ``beta``; dropdowns give larger values. Steps
    starting at the lower endpoint carry no information and yield NaN.
    """
    g = params_gpd
    lp = _log_sf(x_prev, g.mu, g.sigma, g.xi)
    lc = _log_sf(x_cur, g.mu, g.sigma, g.xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        logit_p = lp - np.log(-np.expm1(lp))
        logit_c = lc - np.log(-np.expm1(lc))
        out = np.exp(logit_c - logit_p)
    return np.where(lp == 0, np.nan, out)


def _profile(g, prev, cur, beta, rtol):
    y = lift(SntParams(g, beta), prev)
    band = rtol * (np.abs(y) + g.sigma)
    if np.any(cur > y + band):
        return None
    hold = np.abs(cur - y) <= band
    n_holds = int(hold.sum())
    ll = 0.0
    if n_holds:
        sf_y = np.exp(_log_sf(y[hold], g.mu, g.sigma, g.xi))
        ll += float(np.sum(np.log(beta + (1.0 - beta) * sf_y)))
    n_drop = len(cur) - n_holds
    if n_drop:
        if beta == 1.0:
            return None
        ll += n_drop * math.log1p(-beta) + float(np.sum(_logpdf(cur[~hold], g.mu, g.sigma, g.xi)))
    return n_holds, ll


def snt_fit(series, gpd: GpdParams, rtol: float = HOLD_RTOL) -> SntFit:
    """Profile-likelihood estimate of ``beta`` given the marginal ``G``.

    Every step is classified as a hold (``X_t`` equals the lift within a
    relative band of ``rtol``) or a dropdown. Holds are atoms of the
    transition law, so candidates are ranked by hold count first and by the
    likelihood second. Candidates are ``BETA_GRID`` plus the smallest implied
    dependency value over all steps, which is where exact holds line up.

    Raises
    ------
    ModelInconsistencyError
        Some step rises above the lift for every candidate.
    """
    x = as_values(series)
    if len(x) < MIN_LENGTH:
        raise InsufficientDataError(f"need at least {MIN_LENGTH} observations, got {len(x)}")
    if np.any(x < gpd.mu) or np.any(x > gpd.upper_endpoint):
        raise SupportError("series leaves the support of G")
    prev, cur = x[:-1], x[1:]

    candidates = list(BETA_GRID)
    implied = implied_beta(gpd, prev, cur)
    if np.any(np.isfinite(implied)):
        candidates.append(float(min(np.nanmin(implied), 1.0)))

    best = None
    for beta in sorted(set(candidates)):
        scored = _profile(gpd, prev, cur, beta, rtol)
        if scored is None:
            continue
        if best is None or scored > best[0]:
            best = (scored, beta)
    if best is None:
        raise ModelInconsistencyError("series rises above the lift for every candidate beta")
    (n_holds, ll), beta = best
    return SntFit(beta=beta, n_holds=n_holds, loglik=ll)


def snt_fit_with_marginal(series, mu: float | None = None) -> tuple[SntFit, GpdFit]:
    """Fit ``G`` by likelihood first, then ``beta`` with the wider hold band."""
    marginal = gpd_fit_marginal(as_values(series), mu)
    return snt_fit(series, marginal.params, rtol=ESTIMATED_MARGINAL_RTOL), marginal
