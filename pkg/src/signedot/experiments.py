"""Monte-Carlo harness: noise scaling, distance ratios, bound overlays,
pairwise distance matrices, the dip phenomenon and transport flow traces.

Noise for image ``i`` in trial ``t`` is ``sigma * z(seed, t, i)`` where ``z`` is a
unit zero-sum draw. The same ``z`` is reused across the sigma sweep (common
random numbers), which keeps per-sigma means independent of evaluation order
and makes sweeps smooth in sigma.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .bounds import bound_w1_pair, bound_w1_self, bound_wp_pair, bound_wp_self
from .measures import (
    SignedGridMeasure,
    l2_distance,
    mainini_split,
    normalize_pair,
    pixel_centers,
    to_support,
)
from .metric import toroidal_distance
from .noise import standard_draw
from .solver import TransportPlan, signed_wasserstein, solve_transport

METRICS = ("L2", "W1", "W2", "W3")


def metric_order(metric: str) -> int:
    """Transport exponent of a metric name, 0 for L2."""
    if metric == "L2":
        return 0
    if metric in METRICS:
        return int(metric[1:])
    raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 32
    sigmas: tuple = tuple(np.logspace(-4, -1, 8))
    trials: int = 100
    metrics: tuple = ("L2", "W1", "W2")
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        sig = tuple(float(s) for s in self.sigmas)
        if not sig:
            raise ValueError("empty sigma grid")
        if any(s < 0 or not math.isfinite(s) for s in sig):
            raise ValueError("sigmas must be finite and non-negative")
        if any(b <= a for a, b in zip(sig, sig[1:])):
            raise ValueError("sigmas must be strictly increasing")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for m in self.metrics:
            metric_order(m)
        object.__setattr__(self, "sigmas", sig)
        object.__setattr__(self, "metrics", tuple(self.metrics))


@dataclass(frozen=True, order=True)
class ExperimentRecord:
    sigma: float
    trial: int
    metric: str
    pair: str
    value: float = field(compare=False)
    bound: float | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SweepStat:
    """Trial statistics of one metric at one sigma."""

    mean: float
    se: float
    power_mean: float
    power_se: float
    bound: float | None = None

    @property
    def within_bound(self) -> bool | None:
        if self.bound is None:
            return None
        return self.mean <= self.bound + 2.0 * self.se


@dataclass(frozen=True)
class DistanceMatrix:
    entries: np.ndarray
    symmetric: bool
    zero_diagonal: bool

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    def upper(self) -> np.ndarray:
        return self.entries[np.triu_indices(self.k, 1)]


def _stat(values: np.ndarray, p: int, bound: float | None = None) -> SweepStat:
    t = len(values)
    power = values**p if p > 0 else values
    if t > 1:
        se = float(np.std(values, ddof=1)) / math.sqrt(t)
        pse = float(np.std(power, ddof=1)) / math.sqrt(t)
    else:
        se = pse = 0.0
    return SweepStat(math.fsum(values) / t, se, math.fsum(power) / t, pse, bound)


def signed_distances(mu: SignedGridMeasure, nu: SignedGridMeasure, metrics) -> dict:
    """All requested metrics for one pair; the split is shared across ``p``.

    ``W1`` is solved on the difference ``S - T`` alone: for ``p = 1`` the common
    mass of ``S`` and ``T`` never changes the optimal cost, and dropping it
    shrinks the problem.
    """
    out = {}
    orders = [metric_order(m) for m in metrics]
    src = dst = None
    if any(p > 0 for p in orders):
        split = mainini_split(mu, nu)
        if split.C_S > 0.0 or split.C_T > 0.0:
            split = normalize_pair(split)
            src, _ = to_support(split.S)
            dst, _ = to_support(split.T)
    for m, p in zip(metrics, orders):
        if p == 0:
            out[m] = l2_distance(mu, nu)
        elif src is None:
            out[m] = 0.0
        elif p == 1:
            out[m] = _w1_of_difference(split.S.values - split.T.values)
        else:
            out[m] = solve_transport(src, dst, p).wasserstein_p
    return out


def _w1_of_difference(diff: np.ndarray) -> float:
    n = diff.shape[0]
    pos, _ = to_support(SignedGridMeasure(n, np.maximum(diff, 0.0)))
    neg, _ = to_support(SignedGridMeasure(n, np.maximum(-diff, 0.0)))
    if pos is None or neg is None:
        # only rounding-level residue on one side
        residue = np.abs(diff).sum()
        if residue > 1e-12:
            raise ValueError(f"unbalanced difference with mass {residue!r}")
        return 0.0
    return solve_transport(pos, neg, 1).wasserstein_p


def _noisy(img: SignedGridMeasure, sigma: float, z: np.ndarray) -> SignedGridMeasure:
    if sigma == 0.0:
        return img
    return SignedGridMeasure(img.n, img.values + sigma * z)


def _pair_task(args):
    """Distances of one (sigma, trial) cell for every requested pair.

    ``pairs`` holds ``(i, j)`` image indices; ``j = None`` compares image ``i``
    with its own noisy version.
    """
    images, pairs, sigma, seed, trial, metrics = args
    n = images[0].n
    used = sorted({k for pr in pairs for k in pr if k is not None})
    z = {k: standard_draw(n, seed, trial, stream=k) for k in used}
    out = []
    for i, j in pairs:
        if j is None:
            d = signed_distances(images[i], _noisy(images[i], sigma, z[i]), metrics)
        else:
            d = signed_distances(_noisy(images[i], sigma, z[i]), _noisy(images[j], sigma, z[j]), metrics)
        out.append(d)
    return out


def run_tasks(fn: Callable, tasks: Sequence, workers: int = 1) -> list:
    """Map ``fn`` over ``tasks`` preserving order, optionally in worker processes."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _sweep(images, pairs, cfg: ExperimentConfig, metrics):
    """values[sigma_index][pair_index][metric] -> array over trials."""
    tasks = [
        (images, pairs, s, cfg.seed, t, metrics)
        for s in cfg.sigmas
        for t in range(cfg.trials)
    ]
    flat = run_tasks(_pair_task, tasks, cfg.workers)
    out = []
    for si in range(len(cfg.sigmas)):
        rows = flat[si * cfg.trials : (si + 1) * cfg.trials]
        out.append(
            [
                {m: np.array([r[pi][m] for r in rows]) for m in metrics}
                for pi in range(len(pairs))
            ]
        )
    return out


def _check_images(images) -> int:
    ns = {img.n for img in images}
    if len(ns) != 1:
        raise ValueError(f"mixed grid sizes: {sorted(ns)}")
    return ns.pop()


def fit_loglog_slope(sigmas, means) -> float:
    if len(sigmas) < 2:
        return float("nan")
    x = np.log(np.asarray(sigmas, dtype=np.float64))
    y = np.log(np.asarray(means, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])


def fit_window(sigmas) -> list[int]:
    """Indices of the upper half of the sweep, where noise dominates."""
    k = len(sigmas)
    return list(range(k // 2, k))


@dataclass
class ScalingResult:
    records: list
    stats: dict
    slopes: dict


def exp_scaling(image: SignedGridMeasure, cfg: ExperimentConfig, image_id: str = "img") -> ScalingResult:
    """Self-distance ``metric(mu, mu + eps)`` across the sigma sweep.

    Slopes are least-squares fits of log mean against log sigma over the upper
    half of the sweep.
    """
    if image.n != cfg.n:
        raise ValueError(f"image has n={image.n}, config has n={cfg.n}")
    metrics = cfg.metrics
    values = _sweep([image], [(0, None)], cfg, metrics)
    records, table = [], {}
    for si, s in enumerate(cfg.sigmas):
        for m in metrics:
            p = metric_order(m)
            bound = None
            if s > 0 and p == 1:
                bound = bound_w1_self(cfg.n, s)
            elif s > 0 and p >= 2:
                bound = bound_wp_self(cfg.n, s, p)
            vals = values[si][0][m]
            st = _stat(vals, p, bound)
            table[(s, m)] = st
            records += [ExperimentRecord(s, t, m, image_id, float(v), bound) for t, v in enumerate(vals)]
            records.append(ExperimentRecord(s, -1, m, image_id, st.mean, bound))
    window = [cfg.sigmas[i] for i in fit_window(cfg.sigmas)]
    slopes = {
        m: fit_loglog_slope(window, [table[(s, m)].mean for s in window]) for m in metrics
    }
    return ScalingResult(sorted(records), table, slopes)


@dataclass
class RatioResult:
    records: list
    clean: dict
    stats: dict
    excluded: list


def exp_ratio(
    img_a: SignedGridMeasure, img_b: SignedGridMeasure, cfg: ExperimentConfig, pair_id: str = "A|B"
) -> RatioResult:
    """Mean of ``metric(noisy A, noisy B) / metric(A, B)`` per sigma."""
    _check_images([img_a, img_b])
    clean = signed_distances(img_a, img_b, cfg.metrics)
    excluded = [m for m in cfg.metrics if not clean[m] > 0.0]
    metrics = tuple(m for m in cfg.metrics if m not in excluded)
    if not metrics:
        raise ValueError("clean images coincide under every metric; ratios undefined")
    values = _sweep([img_a, img_b], [(0, 1)], cfg, metrics)
    records, table = [], {}
    for si, s in enumerate(cfg.sigmas):
        for m in metrics:
            ratios = values[si][0][m] / clean[m]
            table[(s, m)] = _stat(ratios, 0)
            records += [ExperimentRecord(s, t, m, pair_id, float(v)) for t, v in enumerate(ratios)]
            records.append(ExperimentRecord(s, -1, m, pair_id, table[(s, m)].mean))
    return RatioResult(sorted(records), clean, table, excluded)


@dataclass
class OverlayResult:
    records: list
    w1_clean: float
    stats: dict

    def all_within_bounds(self) -> bool:
        return all(st.within_bound for st in self.stats.values())


def pair_bound(w1_clean: float, n: int, sigma: float, p: int) -> float:
    """Closed-form bound on the mean noisy signed distance of order ``p``."""
    if p == 1:
        return w1_clean + bound_w1_pair(n, sigma)
    return bound_wp_pair(w1_clean, n, sigma, p)


def exp_bound_overlay(
    img_a: SignedGridMeasure,
    img_b: SignedGridMeasure,
    cfg: ExperimentConfig,
    orders: Sequence[int] = (1, 2, 3),
    pair_id: str = "A|B",
) -> OverlayResult:
    """Mean noisy ``W_p±`` against the two-image bounds, for each ``p``."""
    n = _check_images([img_a, img_b])
    w1_clean = signed_wasserstein(img_a, img_b, 1).value
    if not w1_clean > 0.0:
        raise ValueError("clean images coincide; nothing to overlay")
    metrics = tuple(f"W{p}" for p in orders)
    values = _sweep([img_a, img_b], [(0, 1)], cfg, metrics)
    records, table = [], {}
    for si, s in enumerate(cfg.sigmas):
        for m, p in zip(metrics, orders):
            bound = pair_bound(w1_clean, n, s, p)
            vals = values[si][0][m]
            table[(s, m)] = _stat(vals, p, bound)
            records += [ExperimentRecord(s, t, m, pair_id, float(v), bound) for t, v in enumerate(vals)]
            records.append(ExperimentRecord(s, -1, m, pair_id, table[(s, m)].mean, bound))
    return OverlayResult(sorted(records), w1_clean, table)


@dataclass
class MatrixResult:
    records: list
    clean: dict
    noisy: dict
    rank_correlation: dict


def exp_matrix(images: Sequence[SignedGridMeasure], cfg: ExperimentConfig) -> MatrixResult:
    """Clean and trial-averaged noisy pairwise distance matrices.

    ``noisy[sigma][metric]`` averages distances (not images) over trials, each
    image receiving its own noise per trial. ``rank_correlation[sigma][metric]``
    is the Spearman correlation between clean and noisy upper triangles.
    """
    k = len(images)
    if k < 2:
        raise ValueError("need at least two images")
    _check_images(images)
    metrics = cfg.metrics
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    clean_vals = [signed_distances(images[i], images[j], metrics) for i, j in pairs]
    clean = {m: _to_matrix(k, pairs, [c[m] for c in clean_vals], metric_order(m)) for m in metrics}
    values = _sweep(list(images), pairs, cfg, metrics)
    records, noisy, corr = [], {}, {}
    for si, s in enumerate(cfg.sigmas):
        noisy[s], corr[s] = {}, {}
        for m in metrics:
            means = []
            for pi, (i, j) in enumerate(pairs):
                vals = values[si][pi][m]
                pid = f"{i}|{j}"
                records += [ExperimentRecord(s, t, m, pid, float(v)) for t, v in enumerate(vals)]
                mean = math.fsum(vals) / len(vals)
                records.append(ExperimentRecord(s, -1, m, pid, mean))
                means.append(mean)
            noisy[s][m] = _to_matrix(k, pairs, means, metric_order(m))
            corr[s][m] = spearman(clean[m].upper(), noisy[s][m].upper())
    return MatrixResult(sorted(records), clean, noisy, corr)


def _to_matrix(k, pairs, vals, p) -> DistanceMatrix:
    M = np.zeros((k, k))
    for (i, j), v in zip(pairs, vals):
        M[i, j] = M[j, i] = v
    M.setflags(write=False)
    # the signed cost is symmetric for every p but a metric only for p <= 1
    return DistanceMatrix(M, symmetric=True, zero_diagonal=True)


def spearman(x, y) -> float:
    if len(x) < 2:
        return float("nan")
    return float(stats.spearmanr(x, y).statistic)


@dataclass
class DipResult:
    records: list
    clean: float
    stats: dict
    dip: dict
    argmin: dict


def exp_dip(
    cfg: ExperimentConfig,
    pixels: tuple = ((8, 8), (24, 24)),
    orders: Sequence[int] = (1, 2, 3),
) -> DipResult:
    """Two unit point masses under growing noise.

    ``dip[p]`` is True when some sigma has mean ``W_p±`` more than two standard
    errors below the noiseless value (the torus distance between the pixels).
    """
    n = cfg.n
    a = SignedGridMeasure.point_mass(n, tuple(pixels[0]))
    b = SignedGridMeasure.point_mass(n, tuple(pixels[1]))
    clean = toroidal_distance(*(((np.asarray(px) + 0.5) / n) for px in pixels))
    metrics = tuple(f"W{p}" for p in orders)
    values = _sweep([a, b], [(0, 1)], cfg, metrics)
    pid = "|".join(f"r{int(i)}c{int(j)}" for i, j in pixels)
    records, table, dip, argmin = [], {}, {}, {}
    for m, p in zip(metrics, orders):
        for si, s in enumerate(cfg.sigmas):
            bound = pair_bound(clean, n, s, p)
            vals = values[si][0][m]
            table[(s, m)] = _stat(vals, p, bound)
            records += [ExperimentRecord(s, t, m, pid, float(v), bound) for t, v in enumerate(vals)]
            records.append(ExperimentRecord(s, -1, m, pid, table[(s, m)].mean, bound))
        curve = [table[(s, m)] for s in cfg.sigmas]
        dip[p] = any(st.mean + 2.0 * st.se < clean for st in curve)
        argmin[p] = cfg.sigmas[int(np.argmin([st.mean for st in curve]))]
    return DipResult(sorted(records), clean, table, dip, argmin)


def flow_trace(plan: TransportPlan, pixel: tuple[int, int], direction: str = "source") -> SignedGridMeasure:
    """Where the mass of one source pixel goes (or where a target pixel's mass comes from)."""
    if direction not in ("source", "target"):
        raise ValueError("direction must be 'source' or 'target'")
    here, there = (plan.src, plan.dst) if direction == "source" else (plan.dst, plan.src)
    if here.pixels is None or there.pixels is None or here.grid_n is None:
        raise ValueError("plan is not attached to a pixel grid")
    n = here.grid_n
    flat = int(pixel[0]) * n + int(pixel[1])
    hits = np.flatnonzero(here.pixels == flat)
    if len(hits) == 0:
        raise ValueError(f"pixel {tuple(pixel)} is not in the {direction} support")
    idx = hits[0]
    own, other = (plan.src_index, plan.dst_index) if direction == "source" else (plan.dst_index, plan.src_index)
    sel = own == idx
    img = np.zeros(n * n)
    np.add.at(img, there.pixels[other[sel]], plan.mass[sel])
    return SignedGridMeasure(n, img)


def trace_mean_distance(trace: SignedGridMeasure, pixel: tuple[int, int]) -> float:
    """Mass-weighted mean torus distance from ``pixel`` to the trace."""
    n = trace.n
    pts = pixel_centers(n)
    origin = (np.asarray(pixel, dtype=np.float64) + 0.5) / n
    w = trace.flat
    d = np.array([toroidal_distance(origin, q) for q in pts[w > 0]])
    return float(np.dot(w[w > 0], d) / w.sum())
