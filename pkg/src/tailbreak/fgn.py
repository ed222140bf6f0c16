"""Exact-covariance fractional Gaussian noise via circulant embedding.

Davies & Harte (1987) / Wood & Chan (1994): embed the autocovariance
sequence in a circulant matrix, diagonalize it with one FFT, and color
white noise with the eigenvalue square roots. O(n log n) and exact in
distribution, unlike truncated-MA or Cholesky approaches.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import fft, next_fast_len

from .core import TimeSeries
from .errors import EmbeddingNotPSD, InvalidSpec
from .seeding import philox, standard_normal

# Eigenvalues in [-EIG_TOL, 0) are round-off and get clipped to zero;
# anything below aborts (for fGn that would signal a bug, since the
# embedding is provably nonnegative definite for all H in (0,1)).
EIG_TOL = 1e-10


@dataclass(frozen=True)
class FgnSpec:
    """Length, Hurst parameter and seed of one fGn path."""

    n: int
    hurst: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidSpec("path length must be >= 1")
        if not 0.0 < self.hurst < 1.0:
            raise InvalidSpec("hurst must lie in (0, 1)")


def fgn_autocov(k, hurst: float):
    """Autocovariance of unit-variance fGn at lag k.

    gamma(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2, equal to 1 at
    lag 0 and decaying like H(2H-1) k^{2H-2} for H != 1/2.
    """
    if not 0.0 < hurst < 1.0:
        raise InvalidSpec("hurst must lie in (0, 1)")
    kk = np.abs(np.asarray(k, dtype=np.float64))
    h2 = 2.0 * hurst
    out = 0.5 * (np.abs(kk + 1.0) ** h2 - 2.0 * kk**h2 + np.abs(kk - 1.0) ** h2)
    return out if out.ndim else float(out)


@lru_cache(maxsize=8)
def _embedding(n: int, hurst: float) -> tuple[np.ndarray, int]:
    """Nonnegative circulant eigenvalues for an n-point fGn path.

    The circulant size is the smallest FFT-friendly even m >= 2(n-1);
    its first row carries genuine autocovariances out to lag m/2, so
    padding does not distort the law of the first n outputs.
    """
    m = next_fast_len(max(2 * (n - 1), 2))
    if m % 2:
        m = next_fast_len(m + 1)
    half = m // 2
    gamma = fgn_autocov(np.arange(half + 1), hurst)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = fft(row).real
    worst = float(eig.min())
    if worst < -EIG_TOL:
        raise EmbeddingNotPSD(worst)
    np.clip(eig, 0.0, None, out=eig)
    eig.setflags(write=False)
    return eig, m


def generate_fgn(spec: FgnSpec) -> TimeSeries:
    """A stationary Gaussian path with autocovariance fgn_autocov(., H).

    Mean zero, unit variance, deterministic function of
    (seed, n, hurst); identical specs give bit-identical paths.
    """
    rng = philox(spec.seed)
    if spec.n == 1:
        return TimeSeries(standard_normal(rng, 1))
    eig, m = _embedding(spec.n, spec.hurst)
    half = m // 2
    xi = standard_normal(rng, m)
    w = np.empty(m, dtype=np.complex128)
    w[0] = np.sqrt(eig[0] / m) * xi[0]
    w[half] = np.sqrt(eig[half] / m) * xi[half]
    amp = np.sqrt(eig[1:half] / (2.0 * m))
    w[1:half] = amp * (xi[1:half] + 1j * xi[half + 1 :])
    w[half + 1 :] = np.conj(w[half - 1 : 0 : -1])
    path = fft(w).real[: spec.n]
    return TimeSeries(path)
