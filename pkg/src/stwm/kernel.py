"""Per-mode temporal covariance of the solution process.

A single eigenmode of the space-time model is the scalar Gaussian process

    Z(t) = w^{1/2} / Gamma(g) * int_0^t (t-s)^{g-1} e^{-mu (t-s)} dB(s),

with decay rate mu > 0, noise weight w > 0 and fractional order g. Its
covariance

    q(s, t) = w / Gamma(g)^2 * int_0^{min(s,t)} [(s-r)(t-r)]^{g-1}
              e^{-mu (s+t-2r)} dr

is computed here by singularity-aware adaptive quadrature, together with its
closed forms: the incomplete-gamma expression for the variance q(t, t), the
stationary (t -> infinity) variance, and the Matern-type limit of the lagged
covariance.
"""

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate
from .specfun import bessel_k, gamma_fn, lower_incomplete_gamma

__all__ = [
    "ModeKernel",
    "mode_cov",
    "mode_var",
    "stationary_variance",
    "temporal_matern_limit",
    "square_function_ratio",
    "square_function_ratio_closed_form",
]

# Effective e-folds of integrand kept: contributions further than this many
# e-folds below the integrand maximum are dropped when restricting the
# integration window (safe at double precision).
_EFOLDS = 760.0


@dataclass(frozen=True)
class ModeKernel:
    """One eigenmode's temporal law: decay rate mu = lambda^beta, noise weight
    w = lambda_tilde^{-alpha}, fractional order gamma.

    gamma > 1/2 is required by every operation touching pointwise variances
    (finite-variance condition with delta = 0 at mode level); the lagged
    covariance alone is defined for all gamma > 0.
    """

    mu: float
    weight: float
    gamma: float

    def __post_init__(self):
        if not self.mu > 0.0:
            raise ValueError(f"ModeKernel requires mu > 0, got {self.mu}")
        if not self.weight > 0.0:
            raise ValueError(f"ModeKernel requires weight > 0, got {self.weight}")
        if not self.gamma > 0.0:
            raise ValueError(f"ModeKernel requires gamma > 0, got {self.gamma}")


def _dyadic_breaks(width: float, mu: float, p: float = 1.0):
    """Geometric ladder of initial panel edges covering every scale of
    e^{-2 mu u} on (0, width], mapped through the substitution u -> u^p.

    Adaptive refinement alone can miss integrand mass concentrated far below
    the panel width, so the ladder seeds panels down to scales well under
    1/(2 mu)."""
    depth = max(4, math.ceil(math.log2(max(width * 2.0 * mu, 2.0))) + 6)
    depth = min(depth, 60)
    us = width * 2.0 ** -np.arange(1, depth + 1, dtype=float)
    return np.sort(us ** p)


def _equal_time_integral(g: float, mu: float, width: float, cfg: QuadratureConfig) -> float:
    """int_0^width u^{2g-2} e^{-2 mu u} du via the substitution v = u^{2g-1}."""
    p = 2.0 * g - 1.0
    inv_p = 1.0 / p

    def f(v):
        return np.exp(-2.0 * mu * v ** inv_p)

    return inv_p * integrate(f, 0.0, width ** p, cfg, points=_dyadic_breaks(width, mu, p))


def _lagged_integral(g: float, mu: float, width: float, lag: float, cfg: QuadratureConfig) -> float:
    """int_0^width u^{g-1} (u+lag)^{g-1} e^{-mu (lag+2u)} du.

    For non-integer g the endpoint factor u^{g-1} is absorbed exactly by
    v = u^g, leaving a bounded integrand (the other factor is >= lag^{g-1}
    away from the singular point).
    """
    pre = math.exp(-mu * lag)
    if pre == 0.0:
        return 0.0
    if float(g).is_integer():
        def f(u):
            return u ** (g - 1.0) * (u + lag) ** (g - 1.0) * np.exp(-2.0 * mu * u)

        return pre * integrate(f, 0.0, width, cfg, points=_dyadic_breaks(width, mu))
    inv_g = 1.0 / g

    def f(v):
        u = v ** inv_g
        return (u + lag) ** (g - 1.0) * np.exp(-2.0 * mu * u)

    return pre * inv_g * integrate(f, 0.0, width ** g, cfg, points=_dyadic_breaks(width, mu, g))


def mode_cov(k: ModeKernel, s: float, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Covariance q(s, t) of the mode process, symmetric in (s, t), zero when
    either argument is 0 (zero initial condition).

    Underflows to exactly 0 when mu * |t - s| exceeds the e^{-x} range of
    double precision (the covariance is bounded by e^{-mu |t-s|} times a
    moderate factor).
    """
    if s < 0.0 or t < 0.0:
        raise ValueError(f"mode_cov requires s, t >= 0, got ({s}, {t})")
    lo, hi = (s, t) if s <= t else (t, s)
    if lo == 0.0:
        return 0.0
    g, mu = k.gamma, k.mu
    if lo == hi and not g > 0.5:
        raise ValueError(f"pointwise variance requires gamma > 1/2, got {g}")
    # integrate in u = min(s,t) - r over [0, width]; beyond width the
    # integrand has decayed by > _EFOLDS e-folds relative to its maximum
    width = min(lo, 0.5 * _EFOLDS / mu)
    lag = hi - lo
    if lag == 0.0:
        raw = _equal_time_integral(g, mu, width, cfg)
    else:
        raw = _lagged_integral(g, mu, width, lag, cfg)
    return k.weight / gamma_fn(g) ** 2 * raw


def mode_var(k: ModeKernel, t: float) -> float:
    """Variance q(t, t) through the incomplete-gamma closed form (no quadrature)."""
    if t < 0.0:
        raise ValueError(f"mode_var requires t >= 0, got {t}")
    g = k.gamma
    if not g > 0.5:
        raise ValueError(f"mode_var requires gamma > 1/2 (infinite variance), got {g}")
    if t == 0.0:
        return 0.0
    two_mu = 2.0 * k.mu
    return k.weight / (gamma_fn(g) ** 2 * two_mu ** (2.0 * g - 1.0)) * lower_incomplete_gamma(
        2.0 * g - 1.0, two_mu * t)


def stationary_variance(k: ModeKernel) -> float:
    """Limit of mode_var(k, t) as t -> infinity."""
    g = k.gamma
    if not g > 0.5:
        raise ValueError(f"stationary_variance requires gamma > 1/2, got {g}")
    return k.weight * gamma_fn(g - 0.5) / (2.0 * math.sqrt(math.pi) * gamma_fn(g)) * k.mu ** (1.0 - 2.0 * g)


def temporal_matern_limit(gamma: float, kappa: float, h: float) -> float:
    """Long-time limit of the lagged covariance q(t, t+h) for the unit-weight
    mode with decay rate kappa: a Matern function of the lag with smoothness
    gamma - 1/2. The continuous extension at h = 0 is the stationary variance.
    """
    if not gamma > 0.5:
        raise ValueError(f"temporal_matern_limit requires gamma > 1/2, got {gamma}")
    if not kappa > 0.0:
        raise ValueError(f"temporal_matern_limit requires kappa > 0, got {kappa}")
    if h == 0.0:
        return stationary_variance(ModeKernel(mu=kappa, weight=1.0, gamma=gamma))
    z = kappa * abs(h)
    nu = gamma - 0.5
    pre = 2.0 ** (0.5 - gamma) * kappa ** (1.0 - 2.0 * gamma) / (math.sqrt(math.pi) * gamma_fn(gamma))
    if z > 705.0:
        return 0.0
    return pre * z ** nu * bessel_k(nu, z)


def square_function_ratio(k: ModeKernel, delta: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Ratio of the squared weighted-semigroup time integral to the matching
    power of the decay rate,

        int_0^infty t^{2(g-1-delta)} e^{-2 mu t} dt  /  mu^{1+2delta-2g},

    evaluated by direct quadrature. The value is independent of mu and equals
    square_function_ratio_closed_form(g, delta).
    """
    if delta < 0.0:
        raise ValueError(f"square_function_ratio requires delta >= 0, got {delta}")
    g, mu = k.gamma, k.mu
    p = 2.0 * (g - delta) - 1.0
    if not p > 0.0:
        raise ValueError(
            f"square_function_ratio requires gamma > 1/2 + delta, got gamma={g}, delta={delta}")
    two_a = p - 1.0  # exponent of t in the integrand
    # truncation point: solve 2 mu T - two_a ln T = _EFOLDS crudely
    t_hi = _EFOLDS / (2.0 * mu)
    for _ in range(4):
        t_hi = (_EFOLDS + max(two_a, 0.0) * math.log(max(t_hi, 1.0))) / (2.0 * mu)
    if two_a >= 0.0 and float(two_a).is_integer():
        def f(t):
            return t ** two_a * np.exp(-2.0 * mu * t)

        integral = integrate(f, 0.0, t_hi, cfg, points=_dyadic_breaks(t_hi, mu))
    else:
        inv_p = 1.0 / p

        def f(v):
            return np.exp(-2.0 * mu * v ** inv_p)

        integral = inv_p * integrate(f, 0.0, t_hi ** p, cfg, points=_dyadic_breaks(t_hi, mu, p))
    return integral / mu ** (-p)


def square_function_ratio_closed_form(gamma: float, delta: float) -> float:
    """Gamma(2 gamma - 2 delta - 1) / 2^{2 gamma - 2 delta - 1}."""
    p = 2.0 * (gamma - delta) - 1.0
    if not p > 0.0:
        raise ValueError(
            f"square_function_ratio requires gamma > 1/2 + delta, got gamma={gamma}, delta={delta}")
    return gamma_fn(p) / 2.0 ** p
