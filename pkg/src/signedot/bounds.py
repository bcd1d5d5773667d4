"""Closed-form noise-robustness bounds for the signed Wasserstein cost.

All evaluators take the grid side ``n`` (a power of two) and the pixel noise
standard deviation ``sigma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dyadic import log2_exact
from .measures import SignedGridMeasure, mainini_split
from .metric import TORUS_DIAMETER
from .noise import NoiseModel, sample_zero_sum

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class BoundReport:
    name: str
    n: int
    sigma: float
    p: int
    value: float
    inputs: dict = field(default_factory=dict)


def _check(n: int, sigma: float) -> int:
    if n < 2:
        raise ValueError("n must be at least 2")
    if not sigma >= 0.0:
        raise ValueError(f"sigma must be non-negative, got {sigma!r}")
    return log2_exact(n)


def bound_w1_self(n: int, sigma: float) -> float:
    """Bound on ``E W1±(mu, mu + eps)``."""
    eta = _check(n, sigma)
    return 2.0 / SQRT_PI * sigma * n * eta + sigma * n / (2.0 * SQRT_PI)


def bound_wp_self_power(n: int, sigma: float, p: int) -> float:
    """Bound on ``E[W_p±(mu, mu + eps)^p]``, before Jensen."""
    _check(n, sigma)
    if int(p) != p or p < 2:
        raise ValueError("the self-distance W_p bound needs an integer p >= 2")
    return 4.0 * n * sigma / SQRT_PI


def bound_wp_self(n: int, sigma: float, p: int) -> float:
    """Bound on ``E W_p±(mu, mu + eps)`` for integer ``p >= 2``."""
    return bound_wp_self_power(n, sigma, p) ** (1.0 / p)


def bound_w1_pair(n: int, sigma: float) -> float:
    """Bound on ``E[W1±(mu+e1, nu+e2)] - W1±(mu, nu)``."""
    eta = _check(n, sigma)
    return (4.0 * n * eta + n) * sigma / SQRT_PI + math.sqrt(2.0) / n


def bound_wp_pair(w1_clean: float, n: int, sigma: float, p: int) -> float:
    """Bound on ``E W_p±(mu+e1, nu+e2)`` given the clean ``W1(mu, nu)``."""
    eta = _check(n, sigma)
    if w1_clean < 0.0:
        raise ValueError("w1_clean must be non-negative")
    if int(p) != p or p < 1:
        raise ValueError("p must be an integer >= 1")
    D = TORUS_DIAMETER
    noise = (4.0 / SQRT_PI * n * eta + 2.0 / SQRT_PI * n) ** (1.0 / p) * sigma ** (1.0 / p)
    return D ** (1.0 - 1.0 / p) * w1_clean ** (1.0 / p) + D * noise


def all_bounds(n: int, sigma: float, p: int, w1_clean: float | None = None) -> list[BoundReport]:
    reports = [
        BoundReport("w1_self", n, sigma, 1, bound_w1_self(n, sigma)),
        BoundReport("w1_pair", n, sigma, 1, bound_w1_pair(n, sigma)),
    ]
    if p >= 2:
        pre = bound_wp_self_power(n, sigma, p)
        reports.append(BoundReport("wp_self", n, sigma, p, pre ** (1.0 / p), {"power": pre}))
    if w1_clean is not None:
        reports.append(
            BoundReport(
                "wp_pair", n, sigma, p, bound_wp_pair(w1_clean, n, sigma, p),
                {"w1_clean": w1_clean},
            )
        )
    return reports


@dataclass(frozen=True)
class ImbalanceReport:
    statistic: float
    expected: float
    trials: int
    imbalances: np.ndarray


def mass_imbalance_stat(
    mu: SignedGridMeasure,
    nu: SignedGridMeasure,
    sigma: float,
    trials: int = 1000,
    seed: int = 0,
    iid: bool = True,
) -> ImbalanceReport:
    """Spread of the split mass imbalance ``sum(S - T)`` under pixel noise.

    Returns the sample standard deviation of ``C_S - C_T`` over ``trials``
    noisy pairs, divided by ``sigma * n``. Under i.i.d. noise this tends to
    ``sqrt(2)``; under zero-sum noise the imbalance vanishes.
    """
    if trials < 100:
        raise ValueError("mass imbalance statistic needs at least 100 trials")
    if mu.n != nu.n:
        raise ValueError(f"grid-size mismatch: {mu.n} vs {nu.n}")
    n = mu.n
    if sigma == 0.0:
        return ImbalanceReport(0.0, math.sqrt(2.0), trials, np.zeros(trials))
    model = NoiseModel(n, sigma, seed, iid=iid)
    imb = np.empty(trials)
    for t in range(trials):
        noisy_mu = mu + sample_zero_sum(model, t, stream=0)
        noisy_nu = nu + sample_zero_sum(model, t, stream=1)
        split = mainini_split(noisy_mu, noisy_nu)
        imb[t] = split.C_S - split.C_T
    stat = float(np.std(imb, ddof=1)) / (sigma * n)
    return ImbalanceReport(stat, math.sqrt(2.0), trials, imb)
