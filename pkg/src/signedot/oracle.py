"""Independent reference solver: integer min-cost flow by successive shortest paths.

Shares no code with the network simplex path in :mod:`signedot.solver`; used
only to cross-check it on small supports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import DiscreteMeasure
from .metric import TORUS_DIAMETER

MAX_ORACLE_POINTS = 64


@dataclass(frozen=True)
class OracleResult:
    value: float
    cost_p: float
    error_bound: float


def _quantize(weights: np.ndarray, total: int, scale: int) -> np.ndarray:
    q = np.rint(weights * scale).astype(np.int64)
    q[np.argmax(weights)] += total - int(q.sum())
    if np.any(q < 0):
        raise ValueError("scale too small to represent the weights")
    return q


def _torus_costs(x: np.ndarray, y: np.ndarray, p: int) -> np.ndarray:
    c = np.empty((len(x), len(y)))
    for i, (xi, yi) in enumerate(x):
        for j, (xj, yj) in enumerate(y):
            dx = abs(xi - xj)
            dy = abs(yi - yj)
            dx = min(dx, 1.0 - dx)
            dy = min(dy, 1.0 - dy)
            c[i, j] = math.sqrt(dx * dx + dy * dy) ** p
    return c


def min_cost_flow(supply: np.ndarray, demand: np.ndarray, cost: np.ndarray) -> np.ndarray:
    """Optimal integer transportation flow by successive shortest paths.

    Node layout: 0 = super source, 1..k sources, k+1..k+l sinks, last = super
    sink. Dijkstra runs on reduced costs with Johnson potentials.
    """
    k, l = cost.shape
    V = k + l + 2
    s, t = 0, V - 1
    total = int(supply.sum())
    cap = np.zeros((V, V), dtype=np.int64)
    w = np.zeros((V, V))
    cap[s, 1 : k + 1] = supply
    cap[k + 1 : k + l + 1, t] = demand
    cap[1 : k + 1, k + 1 : k + l + 1] = total
    w[1 : k + 1, k + 1 : k + l + 1] = cost
    w[k + 1 : k + l + 1, 1 : k + 1] = -cost.T
    flow = np.zeros((V, V), dtype=np.int64)
    h = np.zeros(V)
    shipped = 0
    while shipped < total:
        resid = cap - flow
        dist = np.full(V, np.inf)
        prev = np.full(V, -1)
        done = np.zeros(V, dtype=bool)
        dist[s] = 0.0
        for _ in range(V):
            cand = np.where(done, np.inf, dist)
            u = int(np.argmin(cand))
            if not np.isfinite(cand[u]):
                break
            done[u] = True
            arcs = resid[u] > 0
            rc = np.maximum(w[u] + h[u] - h, 0.0)
            nd = dist[u] + rc
            better = arcs & ~done & (nd < dist)
            dist[better] = nd[better]
            prev[better] = u
        if not np.isfinite(dist[t]):
            raise RuntimeError("no augmenting path; supplies and demands disagree")
        h = h + np.minimum(dist, dist[t])
        path = [t]
        while path[-1] != s:
            path.append(int(prev[path[-1]]))
        path.reverse()
        push = total - shipped
        for u, v in zip(path, path[1:]):
            push = min(push, int(resid[u, v]))
        for u, v in zip(path, path[1:]):
            flow[u, v] += push
            flow[v, u] -= push
        shipped += push
    return np.maximum(flow[1 : k + 1, k + 1 : k + l + 1], 0)


def lp_oracle(
    src: DiscreteMeasure, dst: DiscreteMeasure, p: int, scale: int = 10**6
) -> OracleResult:
    """``W_p`` of the weight-quantized problem, with its quantization bound.

    Weights are rounded to multiples of ``1/scale``; the rounding residual of
    each side is absorbed by its largest weight. ``error_bound`` bounds
    ``|cost_p - exact W_p^p|``.
    """
    if scale < 1:
        raise ValueError("scale must be >= 1")
    if len(src) > MAX_ORACLE_POINTS or len(dst) > MAX_ORACLE_POINTS:
        raise ValueError(f"oracle supports at most {MAX_ORACLE_POINTS} points per side")
    if len(src) == 0 or len(dst) == 0:
        raise ValueError("oracle requires non-empty supports")
    total = int(round(src.total_mass * scale))
    a = _quantize(src.weights, total, scale)
    b = _quantize(dst.weights, total, scale)
    c = _torus_costs(src.points, dst.points, p)
    F = min_cost_flow(a, b, c)
    cost_p = float((F * c).sum()) / scale
    bound = TORUS_DIAMETER**p * (len(src) + len(dst)) / scale
    return OracleResult(cost_p ** (1.0 / p), cost_p, bound)
