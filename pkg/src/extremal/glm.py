"""Parameter-driven GPD process with lag-1 regressors.

    X_t ~ GPD(mu, sigma_t, xi_t)
    sigma_t = exp(beta1 + beta2 * X_{t-1}**2)
    xi_t    = -0.5 + 3 / (1 + exp(-(gamma1 + gamma2 * log(1 + |X_{t-1}|))))

The shape link keeps every ``xi_t`` strictly inside ``(-0.5, 2.5)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit

from .errors import ConvergenceError, ExplosionError, InsufficientDataError, ParameterError, SupportError
from .gpd import XI_EPS, _logpdf, _ppf, gpd_fit_mle
from .pipeline import Path, as_values

EXPLOSION_BOUND = 1e300
MIN_LENGTH = 100
SCALE_CLIP = 700.0
# expit(+-30) stays a representable distance away from 0 and 1
SHAPE_CLIP = 30.0
SHAPE_LOW, SHAPE_WIDTH = -0.5, 3.0


@dataclass(frozen=True)
class GlmParams:
    mu: float = 0.0
    beta1: float = 0.0
    beta2: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0

    def __post_init__(self):
        for name in ("mu", "beta1", "beta2", "gamma1", "gamma2"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")

    @property
    def has_feedback(self) -> bool:
        return self.beta2 != 0.0 or self.gamma2 != 0.0


@dataclass(frozen=True)
class GlmFit:
    params: GlmParams
    loglik: float
    null_loglik: float

    @property
    def lr_statistic(self) -> float:
        return 2.0 * (self.loglik - self.null_loglik)


def link_scale(z):
    """Scale link, ``exp`` with the argument clipped to ``[-700, 700]``."""
    out = np.exp(np.clip(z, -SCALE_CLIP, SCALE_CLIP))
    return float(out) if np.ndim(out) == 0 else out


def link_shape(z):
    """Shape link, a logistic curve onto ``(-0.5, 2.5)``."""
    out = SHAPE_LOW + SHAPE_WIDTH * expit(np.clip(z, -SHAPE_CLIP, SHAPE_CLIP))
    return float(out) if np.ndim(out) == 0 else out


def link_shape_inverse(xi):
    return logit((np.asarray(xi, dtype=float) - SHAPE_LOW) / SHAPE_WIDTH)


def conditional_params(params: GlmParams, x_prev):
    """``(sigma_t, xi_t)`` given the previous observation(s)."""
    x = np.asarray(x_prev, dtype=float)
    sigma = link_scale(params.beta1 + params.beta2 * x * x)
    xi = link_shape(params.gamma1 + params.gamma2 * np.log1p(np.abs(x)))
    return sigma, xi


def glm_simulate(params: GlmParams, x0: float, n: int, stream) -> Path:
    """Simulate ``X_1..X_n`` from ``n`` uniforms by inverse transform.

    Without feedback the draw is made in one vectorized pass, which is
    exactly ``gpd_sample`` with the same stream.
    """
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n}")
    if not math.isfinite(x0):
        raise ParameterError("x0 must be finite")
    u = stream.random(n)
    if not params.has_feedback:
        sigma, xi = conditional_params(params, 0.0)
        return Path(_ppf(u, params.mu, sigma, xi), meta="glm")

    b1, b2, g1, g2, mu = params.beta1, params.beta2, params.gamma1, params.gamma2, params.mu
    out = np.empty(n)
    x = float(x0)
    for t in range(n):
        zs = min(max(b1 + b2 * x * x, -SCALE_CLIP), SCALE_CLIP)
        zx = min(max(g1 + g2 * math.log1p(abs(x)), -SHAPE_CLIP), SHAPE_CLIP)
        sigma = math.exp(zs)
        xi = SHAPE_LOW + SHAPE_WIDTH / (1.0 + math.exp(-zx))
        y = -math.log1p(-u[t])
        try:
            x = mu + sigma * (y if abs(xi) < XI_EPS else math.expm1(xi * y) / xi)
        except OverflowError:
            raise ExplosionError("draw overflow", t + 1) from None
        if not abs(x) <= EXPLOSION_BOUND:
            raise ExplosionError(f"|X_t| exceeded {EXPLOSION_BOUND:g}", t + 1)
        out[t] = x
    return Path(out, meta="glm")


def glm_loglik(params: GlmParams, series) -> float:
    """Conditional log-likelihood of ``X_1..X_{n-1}`` given their predecessors."""
    x = as_values(series)
    sigma, xi = conditional_params(params, x[:-1])
    return float(np.sum(_logpdf(x[1:], params.mu, sigma, xi)))


def _spread(h):
    s = float(np.mean(np.abs(h - np.median(h))))
    return max(s, 1e-8)


def glm_fit(series, mu: float, maxiter: int = 20000) -> GlmFit:
    """Conditional maximum likelihood over ``(beta1, beta2, gamma1, gamma2)``.

    The Nelder-Mead search starts at the null model (marginal GPD fit with
    both feedback coefficients zero) and is restarted from its optimum, so
    the returned likelihood is never below the null likelihood.
    """
    x = as_values(series)
    if len(x) < MIN_LENGTH:
        raise InsufficientDataError(f"need at least {MIN_LENGTH} observations, got {len(x)}")
    if np.any(x <= mu):
        raise SupportError(f"all observations must exceed mu={mu}")
    prev, cur = x[:-1], x[1:]
    h1, h2 = prev * prev, np.log1p(np.abs(prev))

    null = gpd_fit_mle(cur - mu)
    start = np.array([math.log(null.params.sigma), 0.0, float(link_shape_inverse(null.params.xi)), 0.0])
    null_params = GlmParams(mu, float(start[0]), 0.0, float(start[2]), 0.0)
    null_ll = glm_loglik(null_params, x)

    def nll(theta):
        b1, b2, g1, g2 = theta
        sigma = link_scale(b1 + b2 * h1)
        xi = link_shape(g1 + g2 * h2)
        val = -float(np.sum(_logpdf(cur, mu, sigma, xi)))
        return val if math.isfinite(val) else math.inf

    steps = np.diag([0.2, 0.2 / _spread(h1), 0.2, 0.2 / _spread(h2)])
    options = dict(xatol=1e-8, fatol=1e-10 + 1e-12 * len(cur), maxiter=maxiter, maxfev=2 * maxiter)
    res = None
    for _ in range(3):
        simplex = np.vstack([start, start + steps])
        res = minimize(nll, start, method="Nelder-Mead", options=dict(options, initial_simplex=simplex))
        start = res.x
    b1, b2, g1, g2 = (float(v) for v in res.x)
    fit = GlmFit(GlmParams(mu, b1, b2, g1, g2), -float(res.fun), null_ll)
    if fit.loglik < null_ll:
        fit = GlmFit(null_params, null_ll, null_ll)
    if not res.success:
        raise ConvergenceError(f"GLM likelihood search did not converge: {res.message}", best=fit)
    return fit
