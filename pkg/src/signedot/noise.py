"""Zero-sum Gaussian pixel noise.

Each draw has marginal variance ``sigma**2``, pairwise covariance
``-sigma**2 / (m - 1)`` for ``m = n**2`` pixels, and sums to zero. Draws come
from a Philox counter-based stream keyed by ``(seed, trial, stream)``, so any
trial can be regenerated alone and in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import SignedGridMeasure, _check_same_grid


@dataclass(frozen=True)
class NoiseModel:
    n: int
    sigma: float
    seed: int = 0
    iid: bool = False

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")
        if self.n < 2:
            raise ValueError("zero-sum noise needs at least 2 pixels per side")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def m(self) -> int:
        return self.n * self.n

    def covariance(self) -> np.ndarray:
        """Dense ``m x m`` covariance (small grids only)."""
        s2 = self.sigma**2
        if self.iid:
            return s2 * np.eye(self.m)
        cov = np.full((self.m, self.m), -s2 / (self.m - 1))
        np.fill_diagonal(cov, s2)
        return cov


def philox_generator(seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    """Generator whose Philox key is ``(seed, trial)`` and counter starts at ``stream``.

    Streams are spaced ``2**64`` blocks apart in the counter, far beyond any
    single draw.
    """
    if trial < 0 or stream < 0:
        raise ValueError("trial and stream must be non-negative")
    key = np.array([seed % 2**64, trial % 2**64], dtype=np.uint64)
    counter = np.array([0, stream % 2**64, 0, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def standard_draw(n: int, seed: int, trial: int, stream: int = 0, iid: bool = False):
    """Unit-sigma draw as an ``(n, n)`` array; scale by sigma to get a sample."""
    m = n * n
    z = philox_generator(seed, trial, stream).standard_normal(m)
    if iid:
        return z.reshape(n, n)
    z *= math.sqrt(m / (m - 1))
    z -= math.fsum(z) / m
    return z.reshape(n, n)


def sample_zero_sum(model: NoiseModel, trial: int, stream: int = 0) -> SignedGridMeasure:
    """One noise image for ``trial``; ``stream`` separates independent images."""
    z = standard_draw(model.n, model.seed, trial, stream, iid=model.iid)
    return SignedGridMeasure(model.n, model.sigma * z)


def sample_batch(model: NoiseModel, trials: int, stream: int = 0) -> np.ndarray:
    """Draws for trials ``0..trials-1`` stacked into a ``(trials, n*n)`` array."""
    out = np.empty((trials, model.m))
    for t in range(trials):
        out[t] = standard_draw(model.n, model.seed, t, stream, iid=model.iid).ravel()
    return model.sigma * out


def add_noise(mu: SignedGridMeasure, eps: SignedGridMeasure) -> SignedGridMeasure:
    _check_same_grid(mu, eps)
    return SignedGridMeasure(mu.n, mu.values + eps.values)
