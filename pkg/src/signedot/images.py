"""Synthetic unit-mass test images on the n x n torus grid."""

from __future__ import annotations

import math

import numpy as np

from .measures import SignedGridMeasure, pixel_centers


def _normalized(arr: np.ndarray) -> SignedGridMeasure:
    total = arr.sum()
    if not total > 0:
        raise ValueError("generator produced an image with no mass")
    return SignedGridMeasure.from_array(arr / total)


def _wrapped_offsets(n: int, center) -> tuple[np.ndarray, np.ndarray]:
    pts = pixel_centers(n)
    d = pts - np.asarray(center, dtype=np.float64)
    d -= np.round(d)
    return d[:, 0].reshape(n, n), d[:, 1].reshape(n, n)


def gaussian_bump(n: int, center, width: float, aspect: float = 1.0, angle: float = 0.0):
    """Unnormalized anisotropic Gaussian, wrapped on the torus."""
    dx, dy = _wrapped_offsets(n, center)
    c, s = math.cos(angle), math.sin(angle)
    u = c * dx + s * dy
    v = -s * dx + c * dy
    return np.exp(-0.5 * ((u / (width * aspect)) ** 2 + (v / width) ** 2))


def white_noise(n: int, seed: int = 0) -> SignedGridMeasure:
    rng = np.random.default_rng(seed)
    return _normalized(np.abs(rng.standard_normal((n, n))))


def smooth_blobs(n: int, seed: int = 0, count: int = 3) -> SignedGridMeasure:
    """Sum of a few smooth Gaussian bumps, a stand-in for microscopy images."""
    rng = np.random.default_rng(seed)
    img = np.zeros((n, n))
    for _ in range(count):
        center = rng.random(2)
        width = rng.uniform(0.05, 0.12)
        img += rng.uniform(0.5, 1.5) * gaussian_bump(
            n, center, width, aspect=rng.uniform(1.0, 2.0), angle=rng.uniform(0, math.pi)
        )
    return _normalized(img)


def two_squares(n: int, size: int | None = None) -> SignedGridMeasure:
    """Two equal squares centred on opposite quadrants."""
    size = size or max(1, n // 8)
    img = np.zeros((n, n))
    for c in (n // 4, 3 * n // 4):
        lo = c - size // 2
        img[lo : lo + size, lo : lo + size] = 1.0
    return _normalized(img)


def point_mass(n: int, pixel: tuple[int, int]) -> SignedGridMeasure:
    return SignedGridMeasure.point_mass(n, tuple(pixel))


def rotating_blob_sequence(
    n: int, frames: int, shift: float = 0.0, seed: int = 0
) -> list[SignedGridMeasure]:
    """Asymmetric two-lobe particle rotated through half a turn.

    Frame t is rotated by ``pi * t / frames``; with ``shift > 0`` each frame is
    also translated by a random offset of at most ``shift``.
    """
    rng = np.random.default_rng(seed)
    out = []
    for t in range(frames):
        theta = math.pi * t / frames
        offset = rng.uniform(-shift, shift, size=2) if shift > 0 else np.zeros(2)
        center = np.array([0.5, 0.5]) + offset
        arm = 0.14 * np.array([math.cos(theta), math.sin(theta)])
        img = gaussian_bump(n, center, 0.06, aspect=2.5, angle=theta)
        img += 0.6 * gaussian_bump(n, center + arm, 0.05)
        out.append(_normalized(img))
    return out


GENERATORS = {
    "white": white_noise,
    "blobs": smooth_blobs,
    "squares": lambda n, seed=0: two_squares(n),
}


def make_image(name: str, n: int, seed: int = 0) -> SignedGridMeasure:
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    return gen(n, seed=seed)
