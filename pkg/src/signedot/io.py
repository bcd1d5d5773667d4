"""Image files (CSV grids, PGM P2/P5) and experiment record CSVs."""

from __future__ import annotations

import csv
import os
import re

import numpy as np

from .measures import SignedGridMeasure

RECORD_HEADER = ("sigma", "trial", "metric", "pair", "value", "bound")


def fmt_real(x: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return "%.17g" % x


def _square(arr: np.ndarray, path) -> np.ndarray:
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{path}: non-square image of shape {arr.shape}")
    return arr


def read_csv_grid(path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: cannot parse {row!r} as numbers")
    if not rows:
        raise ValueError(f"{path}: empty file")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: rows have different lengths")
    return _square(np.array(rows, dtype=np.float64), path)


_PGM_TOKEN = re.compile(rb"(#[^\n]*\n?)|(\S+)")


def read_pgm(path) -> np.ndarray:
    """Grayscale P2/P5 image scaled to [0, 1] by its maxval."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a P2/P5 PGM file")
    header, pos = [], 2
    for m in _PGM_TOKEN.finditer(data, 2):
        if m.group(2) is None:
            continue
        header.append(m.group(2))
        pos = m.end()
        if len(header) == 3:
            break
    if len(header) < 3:
        raise ValueError(f"{path}: truncated PGM header")
    try:
        width, height, maxval = (int(t) for t in header)
    except ValueError:
        raise ValueError(f"{path}: malformed PGM header")
    if not 0 < maxval <= 65535:
        raise ValueError(f"{path}: maxval {maxval} outside 1..65535")
    count = width * height
    if magic == b"P2":
        tokens = [m.group(2) for m in _PGM_TOKEN.finditer(data, pos) if m.group(2)]
        if len(tokens) < count:
            raise ValueError(f"{path}: expected {count} samples, found {len(tokens)}")
        try:
            vals = np.array([int(t) for t in tokens[:count]], dtype=np.float64)
        except ValueError:
            raise ValueError(f"{path}: non-integer sample")
    else:
        raster = data[pos + 1 :]  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        if len(raster) < count * dtype.itemsize:
            raise ValueError(f"{path}: raster too short")
        vals = np.frombuffer(raster, dtype=dtype, count=count).astype(np.float64)
    if np.any(vals > maxval):
        raise ValueError(f"{path}: sample exceeds maxval")
    return _square(vals.reshape(height, width) / maxval, path)


def write_pgm(path, arr: np.ndarray, maxval: int = 255, binary: bool = True) -> None:
    """Write a [0, 1] array as PGM (values are clipped and quantized)."""
    q = np.rint(np.clip(arr, 0.0, 1.0) * maxval).astype(np.int64)
    h, w = q.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n" if binary else b"P2\n")
        fh.write(f"{w} {h}\n{maxval}\n".encode())
        if binary:
            fh.write(q.astype(">u2" if maxval > 255 else "u1").tobytes())
        else:
            for row in q:
                fh.write((" ".join(map(str, row)) + "\n").encode())


def load_image(path, fmt: str | None = None, normalize: bool = False) -> SignedGridMeasure:
    """Read a square image as a grid measure, optionally rescaled to unit mass."""
    if fmt is None:
        ext = os.path.splitext(str(path))[1].lower()
        fmt = {".csv": "csv", ".txt": "csv", ".pgm": "pgm"}.get(ext)
        if fmt is None:
            raise ValueError(f"{path}: cannot infer format from extension {ext!r}")
    if fmt == "csv":
        arr = read_csv_grid(path)
    elif fmt == "pgm":
        arr = read_pgm(path)
    else:
        raise ValueError(f"unknown image format {fmt!r}")
    img = SignedGridMeasure.from_array(arr)
    if normalize:
        total = img.total_mass
        if not total > 0.0:
            raise ValueError(f"{path}: cannot normalize an image with total mass {total!r}")
        img = img.scaled(1.0 / total)
    return img


def write_grid_csv(img: SignedGridMeasure, path) -> None:
    with open(path, "w", newline="") as fh:
        for row in img.values:
            fh.write(",".join(fmt_real(v) for v in row) + "\n")


def write_records(records, path) -> None:
    """Byte-stable CSV of experiment records sorted by (sigma, trial, metric, pair)."""
    rows = sorted(records, key=lambda r: (r.sigma, r.trial, r.metric, r.pair))
    keys = [(r.sigma, r.trial, r.metric, r.pair) for r in rows]
    if len(set(keys)) != len(keys):
        raise ValueError("records are not uniquely keyed by (sigma, trial, metric, pair)")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_HEADER)
        for r in rows:
            w.writerow(
                [
                    fmt_real(r.sigma),
                    r.trial,
                    r.metric,
                    r.pair,
                    fmt_real(r.value),
                    "" if r.bound is None else fmt_real(r.bound),
                ]
            )


def read_records(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        out = []
        for row in reader:
            out.append(
                {
                    "sigma": float(row["sigma"]),
                    "trial": int(row["trial"]),
                    "metric": row["metric"],
                    "pair": row["pair"],
                    "value": float(row["value"]),
                    "bound": float(row["bound"]) if row["bound"] else None,
                }
            )
    return out
