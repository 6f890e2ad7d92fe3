"""AR-EARCH state-space model with GPD-enriched innovations.

The recursion is

    mu_t        = mu0 + phi * X_{t-1}
    log sigma_t = log_sigma0 + gamma * log(1 + (X_{t-1} - mu_{t-1})**2)
    X_t         = mu_t + sigma_t * v_t

At ``t = 1`` the lagged deviation is ``x0 - mu0``.

Innovations start as ``v' ~ F0``. Whenever ``|v'| >= tau`` the draw is
replaced by ``sign(v') * (tau + w)`` with ``w ~ GPD(0, 1, xi)``, so the law
stays symmetric and the excesses of ``|v|`` over ``tau`` are exactly GPD.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate, stats

from .errors import (
    DegenerateDataError,
    ExplosionError,
    InsufficientDataError,
    InsufficientTailDataError,
    ParameterError,
)
from .gpd import GpdFit, GpdParams, gpd_fit_mle, gpd_sample
from .pipeline import Path, as_values

EXPLOSION_BOUND = 1e300
MIN_LENGTH = 50
MIN_TAIL = 10

# name -> (stream method, scipy distribution)
INNOVATION_BASES = {
    "normal": ("standard_normal", stats.norm),
    "laplace": ("laplace", stats.laplace),
}


class NonStationarityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SsmParams:
    mu0: float = 0.0
    phi: float = 0.0
    log_sigma0: float = 0.0
    gamma: float = 0.0
    tau: float = 3.0
    xi: float = 0.0
    innovation_base: str = "normal"

    def __post_init__(self):
        for name in ("mu0", "phi", "log_sigma0", "gamma", "xi"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if not self.tau > 0:
            raise ParameterError(f"tau must be positive, got {self.tau}")
        if self.innovation_base not in INNOVATION_BASES:
            raise ParameterError(
                f"unknown innovation base {self.innovation_base!r}; "
                f"choose from {sorted(INNOVATION_BASES)}"
            )


@dataclass(frozen=True)
class SsmFit:
    params: SsmParams
    residuals: Path
    tail: GpdFit | None


def ssm_draw_innovations(params: SsmParams, stream, n: int) -> np.ndarray:
    """Draw ``n`` enriched innovations.

    Base draws come first (``n`` of them), then one uniform per enriched
    position, in index order.
    """
    method, _ = INNOVATION_BASES[params.innovation_base]
    v = np.asarray(getattr(stream, method)(n), dtype=float)
    hit = np.abs(v) >= params.tau
    k = int(hit.sum())
    if k:
        w = gpd_sample(GpdParams(0.0, 1.0, params.xi), stream, k)
        v[hit] = np.sign(v[hit]) * (params.tau + w)
    return v


def ssm_draw_innovation(params: SsmParams, stream) -> float:
    return float(ssm_draw_innovations(params, stream, 1)[0])


def ssm_simulate(params: SsmParams, x0: float, n: int, stream) -> Path:
    """Simulate ``n`` steps after the start value ``x0`` (which is not included)."""
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n}")
    if not math.isfinite(x0):
        raise ParameterError("x0 must be finite")
    if abs(params.phi) >= 1:
        warnings.warn(f"|phi| = {abs(params.phi)} >= 1: path is not stationary", NonStationarityWarning)

    v = ssm_draw_innovations(params, stream, n).tolist()
    mu0, phi, ls0, gamma = params.mu0, params.phi, params.log_sigma0, params.gamma
    out = np.empty(n)
    x_prev, mu_prev = float(x0), mu0
    for t in range(n):
        mu_t = mu0 + phi * x_prev
        dev = x_prev - mu_prev
        try:
            x = mu_t + math.exp(ls0 + gamma * math.log1p(dev * dev)) * v[t]
        except OverflowError:
            raise ExplosionError("scale overflow", t + 1) from None
        if not abs(x) <= EXPLOSION_BOUND:
            raise ExplosionError(f"|X_t| exceeded {EXPLOSION_BOUND:g}", t + 1)
        out[t] = x
        x_prev, mu_prev = x, mu_t
    return Path(out, meta="ssm")


def ssm_filter(params: SsmParams, series) -> tuple[np.ndarray, np.ndarray]:
    """Conditional means and scales for steps ``1..n-1`` of an observed series.

    The first observation plays the role of ``x0``.
    """
    x = as_values(series)
    mu = params.mu0 + params.phi * x[:-1]
    resid = np.empty_like(x)
    resid[0] = x[0] - params.mu0
    resid[1:] = x[1:] - mu
    sigma = np.exp(params.log_sigma0 + params.gamma * np.log1p(resid[:-1] ** 2))
    return mu, sigma


def expected_log_abs_innovation(tau: float, xi: float, base: str = "normal") -> float:
    """``E log|v|`` under the enriched innovation law."""
    dist = INNOVATION_BASES[base][1]
    core, _ = integrate.quad(lambda u: math.log(u) * dist.pdf(u), 0.0, min(tau, 60.0), limit=200)
    core *= 2.0
    if not math.isfinite(tau):
        return core
    p_tail = 2.0 * dist.sf(tau)

    def integrand(y):
        w = y if abs(xi) < 1e-8 else math.expm1(xi * y) / xi
        return math.log(tau + w) * math.exp(-y)

    # y ~ Exp(1); the mass beyond y = 100 is below e**-100
    tail, _ = integrate.quad(integrand, 0.0, 100.0, limit=200)
    return core + p_tail * tail


def _ols(y, x):
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    sxx = np.dot(dx, dx)
    if sxx == 0:
        raise DegenerateDataError("regressor has zero variance")
    slope = float(np.dot(dx, y - ym) / sxx)
    return float(ym - slope * xm), slope


def ssm_fit(series, tau: float, base: str = "normal", max_iter: int = 50) -> SsmFit:
    """Two-stage fit: least squares for the dynamics, GPD likelihood for the tail.

    Stage one regresses ``X_t`` on ``X_{t-1}`` for ``(mu0, phi)`` and
    ``log|e_t|`` on ``log(1 + e_{t-1}**2)`` for ``gamma``. The regression
    intercept estimates ``log_sigma0 + E log|v|``; the expectation depends
    on the tail shape, so ``log_sigma0`` and ``xi`` are iterated to a fixed
    point. Standardized residuals beyond ``tau`` give the tail fit.

    Raises
    ------
    InsufficientTailDataError
        Fewer than ``MIN_TAIL`` standardized residuals beyond ``tau``; the
        ``partial`` attribute then holds the stage-one fit with ``xi = 0``.
    """
    x = as_values(series)
    if len(x) < MIN_LENGTH:
        raise InsufficientDataError(f"need at least {MIN_LENGTH} observations, got {len(x)}")
    if np.ptp(x) == 0:
        raise DegenerateDataError("series is constant")

    mu0, phi = _ols(x[1:], x[:-1])
    if abs(phi) >= 1:
        warnings.warn(f"estimated |phi| = {abs(phi):.3f} >= 1", NonStationarityWarning)
    resid = np.empty_like(x)
    resid[0] = x[0] - mu0
    resid[1:] = x[1:] - mu0 - phi * x[:-1]
    lhs, rhs = resid[1:], np.log1p(resid[:-1] ** 2)
    keep = lhs != 0
    intercept, gamma = _ols(np.log(np.abs(lhs[keep])), rhs[keep])

    params = SsmParams(mu0, phi, 0.0, gamma, tau, 0.0, base)
    shift = expected_log_abs_innovation(math.inf, 0.0, base)
    tail = None
    for _ in range(max_iter):
        params = replace(params, log_sigma0=intercept - shift)
        _, sigma = ssm_filter(params, x)
        v = resid[1:] / sigma
        excess = np.abs(v)[np.abs(v) > tau] - tau
        if len(excess) < MIN_TAIL:
            partial = SsmFit(params, Path(v, meta="ssm residuals"), None)
            raise InsufficientTailDataError(
                f"only {len(excess)} standardized residuals exceed tau={tau}", partial=partial
            )
        tail = gpd_fit_mle(excess)
        params = replace(params, xi=tail.params.xi)
        new_shift = expected_log_abs_innovation(tau, params.xi, base)
        if abs(new_shift - shift) < 1e-10:
            break
        shift = new_shift
    params = replace(params, log_sigma0=intercept - shift)
    _, sigma = ssm_filter(params, x)
    return SsmFit(params, Path(resid[1:] / sigma, meta="ssm residuals"), tail)
