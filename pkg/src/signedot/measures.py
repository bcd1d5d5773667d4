"""Signed measures on an n x n toroidal pixel grid.

An image is a real array of shape ``(n, n)`` indexed ``(row i, column j)``;
pixel ``(i, j)`` carries a point mass at ``((i + 1/2)/n, (j + 1/2)/n)`` on the
unit torus. Negative pixels are allowed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MASS_RTOL = 1e-9


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SignedGridMeasure:
    """Real-valued image identified with a signed discrete measure.

    ``values`` may be given flat (row-major, length n**2) or as an ``(n, n)``
    array; it is stored as a read-only ``(n, n)`` float array.
    """

    n: int
    values: np.ndarray

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"grid side must be a positive integer, got {self.n!r}")
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.size != self.n * self.n:
            raise ValueError(
                f"expected {self.n * self.n} values for n={self.n}, got {vals.size}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "values", _frozen(vals.reshape(self.n, self.n)))

    @classmethod
    def from_array(cls, arr) -> "SignedGridMeasure":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square 2-D array, got shape {arr.shape}")
        return cls(arr.shape[0], arr)

    @classmethod
    def zeros(cls, n: int) -> "SignedGridMeasure":
        return cls(n, np.zeros((n, n)))

    @classmethod
    def point_mass(cls, n: int, pixel: tuple[int, int], mass: float = 1.0):
        arr = np.zeros((n, n))
        arr[pixel] = mass
        return cls(n, arr)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.values.ravel())

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.values >= 0.0))

    def scaled(self, factor: float) -> "SignedGridMeasure":
        return SignedGridMeasure(self.n, self.values * factor)

    def __add__(self, other: "SignedGridMeasure") -> "SignedGridMeasure":
        _check_same_grid(self, other)
        return SignedGridMeasure(self.n, self.values + other.values)

    def __sub__(self, other: "SignedGridMeasure") -> "SignedGridMeasure":
        _check_same_grid(self, other)
        return SignedGridMeasure(self.n, self.values - other.values)

    def __neg__(self) -> "SignedGridMeasure":
        return SignedGridMeasure(self.n, -self.values)

    def __eq__(self, other):
        if not isinstance(other, SignedGridMeasure):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely supported non-negative measure on the unit torus.

    ``pixels`` (flat row-major indices) and ``grid_n`` are set when the
    measure was extracted from a grid image, so transport plans can be
    mapped back onto pixels.
    """

    points: np.ndarray
    weights: np.ndarray
    pixels: np.ndarray | None = None
    grid_n: int | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        w = np.asarray(self.weights, dtype=np.float64).ravel()
        if len(pts) != len(w):
            raise ValueError("points and weights must have the same length")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(pts))):
            raise ValueError("points and weights must be finite")
        if np.any(w <= 0.0):
            raise ValueError("weights must be strictly positive")
        if np.any(pts < 0.0) or np.any(pts >= 1.0):
            raise ValueError("points must lie in [0, 1)^2")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("support points must be pairwise distinct")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))
        if self.pixels is not None:
            pix = np.array(self.pixels, dtype=np.int64).ravel()
            if len(pix) != len(w):
                raise ValueError("pixels and weights must have the same length")
            pix.setflags(write=False)
            object.__setattr__(self, "pixels", pix)

    def __len__(self):
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.weights)


@dataclass(frozen=True)
class SplitPair:
    """Non-negative pair ``(S, T)`` built from two signed measures."""

    S: SignedGridMeasure
    T: SignedGridMeasure
    C_S: float
    C_T: float
    normalized: bool = field(default=False)

    def __post_init__(self):
        if not (self.S.is_nonnegative() and self.T.is_nonnegative()):
            raise ValueError("split parts must be non-negative")


def pixel_centers(n: int) -> np.ndarray:
    """Torus coordinates of all pixels, shape ``(n*n, 2)`` in row-major order."""
    c = (np.arange(n) + 0.5) / n
    ii, jj = np.meshgrid(c, c, indexing="ij")
    return np.stack([ii.ravel(), jj.ravel()], axis=1)


def _check_same_grid(mu: SignedGridMeasure, nu: SignedGridMeasure) -> None:
    if mu.n != nu.n:
        raise ValueError(f"grid-size mismatch: {mu.n} vs {nu.n}")


def jordan_decompose(mu: SignedGridMeasure):
    """Return ``(mu_plus, mu_minus)`` with disjoint supports."""
    v = mu.values
    return (
        SignedGridMeasure(mu.n, np.maximum(v, 0.0)),
        SignedGridMeasure(mu.n, np.maximum(-v, 0.0)),
    )


def mainini_split(mu: SignedGridMeasure, nu: SignedGridMeasure) -> SplitPair:
    """Balanced pair ``S = mu+ + nu-``, ``T = nu+ + mu-`` and their masses."""
    _check_same_grid(mu, nu)
    mu_p, mu_m = jordan_decompose(mu)
    nu_p, nu_m = jordan_decompose(nu)
    S = SignedGridMeasure(mu.n, mu_p.values + nu_m.values)
    T = SignedGridMeasure(mu.n, nu_p.values + mu_m.values)
    return SplitPair(S, T, S.total_mass, T.total_mass)


def normalize_pair(split: SplitPair, tol_rel: float = MASS_RTOL) -> SplitPair:
    """Rescale ``S`` and ``T`` to unit mass unless their masses already agree.

    Masses within ``tol_rel * max(C_S, C_T)`` of each other are treated as
    equal and the split is returned as is.
    """
    c_s, c_t = split.C_S, split.C_T
    if not (c_s > 0.0 and c_t > 0.0):
        raise ValueError(
            f"degenerate split: masses C_S={c_s!r}, C_T={c_t!r} must be positive"
        )
    if abs(c_s - c_t) <= tol_rel * max(c_s, c_t):
        return split
    S = split.S.scaled(1.0 / c_s)
    T = split.T.scaled(1.0 / c_t)
    return SplitPair(S, T, S.total_mass, T.total_mass, normalized=True)


def l2_distance(mu: SignedGridMeasure, nu: SignedGridMeasure) -> float:
    _check_same_grid(mu, nu)
    return float(np.sqrt(np.sum((mu.values - nu.values) ** 2)))


def to_support(mu: SignedGridMeasure, weight_floor: float = 0.0):
    """Sparse support of a non-negative grid measure.

    Returns ``(measure, dropped_mass)``. The measure is ``None`` when no pixel
    exceeds ``weight_floor``.
    """
    if not mu.is_nonnegative():
        raise ValueError("to_support requires a non-negative measure")
    flat = mu.flat
    keep = flat > weight_floor
    dropped = math.fsum(flat[~keep])
    if not np.any(keep):
        return None, dropped
    idx = np.flatnonzero(keep)
    pts = pixel_centers(mu.n)[idx]
    return DiscreteMeasure(pts, flat[idx], pixels=idx, grid_n=mu.n), dropped
