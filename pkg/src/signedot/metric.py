"""Ground metric on the flat unit torus and transport cost matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import DiscreteMeasure

TORUS_DIAMETER = math.sqrt(2.0) / 2.0


def toroidal_distance(a, b) -> float:
    """Euclidean distance on [0,1)^2 with both axes wrapping."""
    d = np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))
    d = np.minimum(d, 1.0 - d)
    return float(math.hypot(d[0], d[1]))


def pairwise_toroidal(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Distance matrix between point sets of shape ``(k, 2)`` and ``(l, 2)``."""
    d = np.abs(x[:, None, :] - y[None, :, :])
    d = np.minimum(d, 1.0 - d)
    return np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2)


@dataclass(frozen=True)
class CostMatrix:
    entries: np.ndarray
    p: int

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


def cost_matrix(src: DiscreteMeasure, dst: DiscreteMeasure, p: int) -> CostMatrix:
    if int(p) != p or p < 1:
        raise ValueError(f"p must be an integer >= 1, got {p!r}")
    p = int(p)
    d = pairwise_toroidal(src.points, dst.points)
    if p > 1:
        d = d**p
    d.setflags(write=False)
    return CostMatrix(d, p)
