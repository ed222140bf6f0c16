"""Two-parameter tail empirical process surfaces and limit-law probes.

tail_surface counts exceedances of u_n * s over prefixes floor(n t),
normalized by (an estimate of) n F-bar(u_n). centered_surface subtracts
the limiting mean t s^(-alpha). regime_probe estimates the variance and
cross-level correlation structure of the scaled process on simulated
stationary paths, which is how the dichotomy between the
Brownian-sheet limit and the degenerate (perfectly s-correlated) LRD
limit is checked numerically. second_order_bound_check verifies the
ratio bound that second-order regular variation buys on an analytic
family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import as_values
from .errors import EmptyGrid, InvalidSpec, ValidationError
from .lmsv import (
    LmsvSpec,
    classify_regime,
    exact_threshold,
    floor_index,
    lrd_norming,
    simulate_lmsv,
)
from .seeding import mix64


@dataclass(frozen=True)
class TepSurface:
    """Normalized exceedance counts on an (s, t) grid.

    values[i][j] = #{l <= floor(n t_j): x_l > u_n s_i} / normalizer.
    Non-increasing along s, non-decreasing along t, zero at t = 0.
    """

    s_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray
    normalizer: float
    threshold: float

    def __post_init__(self):
        s = np.asarray(self.s_grid, dtype=np.float64)
        t = np.asarray(self.t_grid, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if s.size == 0 or t.size == 0:
            raise EmptyGrid("s and t grids must be non-empty")
        if np.any(s < 1.0) or np.any(np.diff(s) <= 0):
            raise ValidationError("s_grid must be increasing and >= 1")
        if np.any(t < 0.0) or np.any(t > 1.0) or np.any(np.diff(t) <= 0):
            raise ValidationError("t_grid must be increasing within [0, 1]")
        if v.shape != (s.size, t.size):
            raise ValidationError("values must have shape (len(s), len(t))")
        if np.any(v < 0.0):
            raise ValidationError("surface values must be nonnegative")
        if np.any(np.diff(v, axis=0) > 1e-12):
            raise ValidationError("surface must be non-increasing along s")
        if np.any(np.diff(v, axis=1) < -1e-12):
            raise ValidationError("surface must be non-decreasing along t")
        if t[0] == 0.0 and np.any(v[:, 0] != 0.0):
            raise ValidationError("surface must vanish at t = 0")
        object.__setattr__(self, "s_grid", s)
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class SecondOrderFamily:
    """Survival function x^(-alpha) (1 + c x^(-alpha beta)).

    c = 0 is the exact power law (standard Pareto); any c introduces a
    second-order term with rate exponent rho = alpha * beta.
    """

    alpha: float
    beta: float
    c: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise InvalidSpec("alpha and beta must be positive")

    @property
    def rho(self) -> float:
        return self.alpha * self.beta

    def survival_ratio(self, z, t):
        """F-bar(z t) / F-bar(t), computed in its reduced analytic form."""
        z = np.asarray(z, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        second = (1.0 + self.c * (z * t) ** -self.rho) / (1.0 + self.c * t**-self.rho)
        return z**-self.alpha * second


def tail_surface(x, u_n: float, s_grid, t_grid, normalizer: float) -> TepSurface:
    """Evaluate the exceedance surface of x at levels u_n * s_grid.

    The caller supplies the normalizer: n F-bar(u_n) when the marginal
    law is known (simulations), or the exceedance count k_n on data.
    """
    vals = as_values(x)
    n = vals.size
    if u_n <= 0.0:
        raise InvalidSpec("u_n must be positive")
    if normalizer <= 0.0:
        raise InvalidSpec("normalizer must be positive")
    s = np.atleast_1d(np.asarray(s_grid, dtype=np.float64))
    t = np.atleast_1d(np.asarray(t_grid, dtype=np.float64))
    if s.size == 0 or t.size == 0:
        raise EmptyGrid("s and t grids must be non-empty")
    prefix_ends = np.array([floor_index(n * tj) for tj in t])
    out = np.empty((s.size, t.size))
    for i, si in enumerate(s):
        counts = np.cumsum(vals > u_n * si)
        for j, m in enumerate(prefix_ends):
            out[i, j] = counts[m - 1] if m > 0 else 0.0
    out /= normalizer
    return TepSurface(
        s_grid=s, t_grid=t, values=out, normalizer=float(normalizer),
        threshold=float(u_n),
    )


def centered_surface(surface: TepSurface, alpha: float) -> np.ndarray:
    """Subtract the limit mean t s^(-alpha) from the surface values."""
    if alpha <= 0.0:
        raise InvalidSpec("alpha must be positive")
    s = surface.s_grid[:, None]
    t = surface.t_grid[None, :]
    return surface.values - t * s**-alpha


@dataclass(frozen=True)
class BoundCheck:
    """Result of the second-order ratio bound evaluation."""

    max_ratio: float
    epsilon: float
    rho: float


def second_order_bound_check(
    family: SecondOrderFamily, z_grid, t_grid, epsilon: float = 0.01
) -> BoundCheck:
    """Max over (z, t) of the normalized second-order deviation

        |F-bar(z t)/F-bar(t) - z^(-alpha)|
        -----------------------------------------
        eta*(t) z^(-alpha-rho) max(z, 1/z)^epsilon

    with eta*(t) = t^(-alpha beta) and rho = alpha beta. Bounded for a
    second-order regularly varying family; identically zero for the
    exact power law (c = 0).
    """
    z = np.atleast_1d(np.asarray(z_grid, dtype=np.float64))
    t = np.atleast_1d(np.asarray(t_grid, dtype=np.float64))
    if z.size == 0 or t.size == 0:
        raise EmptyGrid("z and t grids must be non-empty")
    if np.any(z <= 0.0):
        raise ValidationError("z grid must be positive")
    if np.any(t < 1.0):
        raise ValidationError("threshold grid must lie in [1, inf)")
    zz = z[:, None]
    tt = t[None, :]
    numer = np.abs(family.survival_ratio(zz, tt) - zz**-family.alpha)
    eta_star = tt**-family.rho
    denom = eta_star * zz ** (-family.alpha - family.rho)
    denom = denom * np.maximum(zz, 1.0 / zz) ** epsilon
    ratios = numer / denom
    return BoundCheck(
        max_ratio=float(ratios.max()), epsilon=epsilon, rho=family.rho
    )


@dataclass(frozen=True)
class RegimeProbe:
    """Monte Carlo variance/correlation of the scaled process at t = 1."""

    s_grid: np.ndarray
    variances: np.ndarray
    correlations: np.ndarray
    regime: str
    scaling: float
    threshold: float
    reps: int


def regime_probe(
    spec: LmsvSpec, k_n: int, s_grid, reps: int, seed: int = 0
) -> RegimeProbe:
    """Estimate Var[a_n e_n(s, 1)] and Corr[a_n e_n(s, 1), a_n e_n(s_0, 1)].

    Simulates `reps` independent stationary paths (the spec must have no
    break), thresholds at the exact level u_n with n F-bar(u_n) = k_n,
    and scales by a_n = sqrt(k_n) in the martingale regime or
    n / d_{n,1} in the LRD regime. In the martingale regime the limit
    variance is s^(-alpha) with Brownian-sheet covariances; in the LRD
    regime all levels are driven by one common factor, so the cross-s
    correlation approaches 1.
    """
    if spec.break_active:
        raise InvalidSpec("regime_probe needs a stationary spec (no break)")
    if reps < 100:
        raise InvalidSpec("need reps >= 100 for stable second moments")
    s = np.atleast_1d(np.asarray(s_grid, dtype=np.float64))
    if s.size == 0:
        raise EmptyGrid("s grid must be non-empty")
    u_n = exact_threshold(spec.n, k_n, spec.alpha, spec.family)
    report = classify_regime(spec.n, spec.hurst, k_n)
    if report.regime == "lrd":
        scaling = spec.n / lrd_norming(spec.n, report.lrd_exponent, 1)
    else:
        # martingale regime, and the conjectured proper scaling on the
        # boundary as well
        scaling = math.sqrt(k_n)
    levels = u_n * s
    centers = s ** -spec.alpha
    vals = np.empty((reps, s.size))
    for i in range(reps):
        path = simulate_lmsv(replace(spec, seed=mix64(seed, i))).values
        counts = np.array([np.count_nonzero(path > lv) for lv in levels])
        vals[i] = counts / k_n - centers
    scaled = scaling * vals
    variances = np.var(scaled, axis=0, ddof=1)
    correlations = np.corrcoef(scaled, rowvar=False)[0] if s.size > 1 else np.ones(1)
    return RegimeProbe(
        s_grid=s,
        variances=variances,
        correlations=np.atleast_1d(correlations),
        regime=report.regime,
        scaling=float(scaling),
        threshold=float(u_n),
        reps=reps,
    )
