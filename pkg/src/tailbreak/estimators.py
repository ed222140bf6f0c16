"""Sequential tail-index estimators.

Two variants of the same idea: average log-exceedances over a prefix,
either above a fixed threshold u (gamma_threshold) or above the running
(k+1)-th largest order statistic of the prefix (hill_sequential). Both
estimate gamma = 1/alpha.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_values
from .errors import (
    InsufficientPrefix,
    InvalidSpec,
    NoExceedances,
    NonPositiveReference,
)
from .lmsv import floor_index

VARIANTS = ("threshold", "hill")


@dataclass(frozen=True)
class TailEstimate:
    """One sequential tail-index estimate gamma = 1/alpha."""

    gamma: float
    t: float
    exceedances: int
    threshold: float
    variant: str


def gamma_threshold(x, u_n: float, t: float = 1.0) -> TailEstimate:
    """Mean log-exceedance of the fixed level u_n over the prefix floor(nt).

    gamma = sum_{j<=floor(nt)} log(x_j/u_n) 1{x_j > u_n} / #exceedances.
    Exceedances are strict, and their logs are accumulated in ascending
    order so that the estimate matches hill_sequential bit for bit when
    u_n is the matching order statistic of a tie-free sample.
    """
    vals = as_values(x)
    if u_n <= 0.0:
        raise InvalidSpec("threshold u_n must be positive")
    if not 0.0 < t <= 1.0:
        raise InvalidSpec("prefix fraction t must lie in (0, 1]")
    m = floor_index(vals.size * t)
    prefix = vals[:m]
    exceed = np.sort(prefix[prefix > u_n])
    if exceed.size == 0:
        raise NoExceedances(
            f"no exceedances of u_n = {u_n:g} in the first {m} observations; "
            "lower the threshold or increase t"
        )
    gamma = float(np.mean(np.log(exceed / u_n)))
    return TailEstimate(
        gamma=gamma,
        t=t,
        exceedances=int(exceed.size),
        threshold=float(u_n),
        variant="threshold",
    )


def hill_sequential(x, k_n: int, t: float = 1.0) -> TailEstimate:
    """Hill estimator on the prefix m = floor(nt) with floor(k_n t) top
    order statistics.

    gamma = mean over i <= floor(k_n t) of
    log(X_{m:m-i+1} / X_{m:m-floor(k_n t)}).
    """
    vals = as_values(x)
    if k_n < 1:
        raise InvalidSpec("k_n must be >= 1")
    if not 0.0 < t <= 1.0:
        raise InvalidSpec("prefix fraction t must lie in (0, 1]")
    m = floor_index(vals.size * t)
    k = floor_index(k_n * t)
    if m < 2 or k < 1 or k > m - 1:
        raise InsufficientPrefix(
            f"prefix of length {m} cannot supply floor(k_n t) = {k} "
            "top order statistics"
        )
    top = np.sort(vals[:m])[m - k - 1 :]
    ref = top[0]
    if ref <= 0.0:
        raise NonPositiveReference(
            "reference order statistic is <= 0; tail estimation undefined"
        )
    gamma = float(np.mean(np.log(top[1:] / ref)))
    return TailEstimate(
        gamma=gamma, t=t, exceedances=int(k), threshold=float(ref), variant="hill"
    )
