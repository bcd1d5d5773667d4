"""Command-line interface.

Image arguments are file paths (``.csv`` or ``.pgm``) or synthetic specs
``gen:NAME[:SEED]`` with NAME one of ``white``, ``blobs``, ``squares``, or
``point:I:J`` for a unit mass at pixel (I, J).
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import bounds as B
from .dyadic import build_partition, certified_multiscale_bound, multiscale_bound
from .experiments import (
    METRICS,
    ExperimentConfig,
    exp_bound_overlay,
    exp_dip,
    exp_matrix,
    exp_ratio,
    exp_scaling,
    flow_trace,
    signed_distances,
)
from .images import make_image, rotating_blob_sequence
from .io import fmt_real, load_image, write_grid_csv, write_records
from .measures import SignedGridMeasure
from .noise import NoiseModel, add_noise, sample_zero_sum
from .solver import grid_wasserstein, signed_wasserstein

log = logging.getLogger("signedot")

DEFAULT_SEED = 0


def resolve_image(spec: str, n: int, normalize: bool = True) -> SignedGridMeasure:
    if spec.startswith("gen:"):
        parts = spec.split(":")[1:]
        if parts[0] == "point":
            if len(parts) != 3:
                raise ValueError("point generator needs gen:point:I:J")
            return SignedGridMeasure.point_mass(n, (int(parts[1]), int(parts[2])))
        seed = int(parts[1]) if len(parts) > 1 else 0
        return make_image(parts[0], n, seed=seed)
    return load_image(spec, normalize=normalize)


def sigma_grid(args) -> tuple:
    if args.sigmas:
        return tuple(sorted(args.sigmas))
    if args.sigma_count < 1:
        raise ValueError("--sigma-count must be >= 1")
    if args.linear:
        return tuple(np.linspace(args.sigma_min, args.sigma_max, args.sigma_count))
    if not args.sigma_min > 0:
        raise ValueError("log-spaced sweep needs --sigma-min > 0")
    return tuple(np.logspace(np.log10(args.sigma_min), np.log10(args.sigma_max), args.sigma_count))


def _config(args, metrics=None) -> ExperimentConfig:
    return ExperimentConfig(
        n=args.n,
        sigmas=sigma_grid(args),
        trials=args.trials,
        metrics=tuple(metrics or args.metrics),
        seed=args.seed,
        workers=args.workers,
    )


def _images(args, count=None):
    imgs = [resolve_image(s, args.n, not args.raw) for s in args.images]
    if count is not None and len(imgs) != count:
        raise ValueError(f"expected {count} image(s), got {len(imgs)}")
    ns = {im.n for im in imgs}
    if len(ns) > 1:
        raise ValueError(f"mixed grid sizes: {sorted(ns)}")
    if imgs:
        args.n = imgs[0].n
    return imgs


def _print_stats(stats: dict) -> None:
    for (s, m), st in sorted(stats.items()):
        line = f"sigma={fmt_real(s)} {m} mean={st.mean:.6g} se={st.se:.3g}"
        if st.bound is not None:
            line += f" bound={st.bound:.6g} ok={st.within_bound}"
        print(line)


def cmd_dist(args) -> int:
    a, b = _images(args, 2)
    d = signed_distances(a, b, METRICS)
    for m in METRICS:
        print(f"{m} {fmt_real(d[m])}")
    if args.sigma is not None:
        for rep in B.all_bounds(a.n, args.sigma, max(args.p), w1_clean=d["W1"]):
            print(f"bound {rep.name} p={rep.p} {fmt_real(rep.value)}")
    return 0


def cmd_noise(args) -> int:
    (img,) = _images(args, 1)
    eps = sample_zero_sum(NoiseModel(img.n, args.sigma, args.seed), args.trial)
    write_grid_csv(add_noise(img, eps), args.output)
    return 0


def cmd_bound(args) -> int:
    for p in args.p:
        print(f"w1_self n={args.n} sigma={args.sigma} {fmt_real(B.bound_w1_self(args.n, args.sigma))}")
        print(f"w1_pair n={args.n} sigma={args.sigma} {fmt_real(B.bound_w1_pair(args.n, args.sigma))}")
        if p >= 2:
            print(f"wp_self p={p} {fmt_real(B.bound_wp_self(args.n, args.sigma, p))}")
        print(f"wp_pair p={p} w1_clean={args.w1_clean} "
              f"{fmt_real(B.bound_wp_pair(args.w1_clean, args.n, args.sigma, p))}")
    return 0


def cmd_dyadic(args) -> int:
    a, b = _images(args, 2)
    part = build_partition(a.n, args.k_star)
    for p in args.p:
        print(f"multiscale p={p} k*={part.k_star} {fmt_real(multiscale_bound(a, b, p, part))}")
        print(f"certified p={p} {fmt_real(certified_multiscale_bound(a, b, p, part))}")
        if args.exact:
            print(f"exact W_p^p p={p} {fmt_real(grid_wasserstein(a, b, p, power=True))}")
    return 0


def cmd_scaling(args) -> int:
    (img,) = _images(args, 1)
    res = exp_scaling(img, _config(args))
    write_records(res.records, args.output)
    _print_stats(res.stats)
    for m, s in res.slopes.items():
        print(f"slope {m} {s:.4f}")
    if args.svg:
        from .plot import loglog_svg

        sig = sorted({s for s, _ in res.stats})
        loglog_svg({m: (sig, [res.stats[(s, m)].mean for s in sig]) for m in res.slopes}, args.svg)
    return 0


def cmd_ratio(args) -> int:
    a, b = _images(args, 2)
    res = exp_ratio(a, b, _config(args))
    write_records(res.records, args.output)
    for m in res.excluded:
        print(f"excluded {m}: zero clean distance")
    _print_stats(res.stats)
    return 0


def cmd_overlay(args) -> int:
    a, b = _images(args, 2)
    res = exp_bound_overlay(a, b, _config(args, ["W1"]), orders=tuple(args.p))
    write_records(res.records, args.output)
    print(f"w1_clean {fmt_real(res.w1_clean)}")
    _print_stats(res.stats)
    return 0


def cmd_matrix(args) -> int:
    if args.images:
        imgs = _images(args)
    else:
        imgs = rotating_blob_sequence(args.n, args.frames, shift=args.shift, seed=args.seed)
    res = exp_matrix(imgs, _config(args))
    write_records(res.records, args.output)
    for s, by_metric in res.rank_correlation.items():
        for m, r in by_metric.items():
            print(f"sigma={fmt_real(s)} {m} spearman={r:.4f}")
    if args.svg:
        from .plot import heatmap_svg

        s = max(res.noisy)
        for m in res.clean:
            heatmap_svg(res.clean[m].entries, f"{args.svg}_{m}_clean.svg", title=f"{m} clean")
            heatmap_svg(res.noisy[s][m].entries, f"{args.svg}_{m}_noisy.svg", title=f"{m} sigma={s:g}")
    return 0


def cmd_dip(args) -> int:
    res = exp_dip(_config(args, ["W1"]), pixels=(tuple(args.source), tuple(args.target)), orders=tuple(args.p))
    write_records(res.records, args.output)
    print(f"clean {fmt_real(res.clean)}")
    _print_stats(res.stats)
    for p, flag in res.dip.items():
        print(f"dip p={p} {flag} argmin_sigma={fmt_real(res.argmin[p])}")
    return 0


def cmd_trace(args) -> int:
    n = args.n
    a = SignedGridMeasure.point_mass(n, tuple(args.source))
    b = SignedGridMeasure.point_mass(n, tuple(args.target))
    if args.sigma > 0:
        model = NoiseModel(n, args.sigma, args.seed)
        a = a + sample_zero_sum(model, args.trial, stream=0)
        b = b + sample_zero_sum(model, args.trial, stream=1)
    res = signed_wasserstein(a, b, args.p[0])
    pixel = tuple(args.source if args.direction == "source" else args.target)
    trace = flow_trace(res.plan, pixel, args.direction)
    write_grid_csv(trace, args.output)
    print(f"W{args.p[0]} {fmt_real(res.value)} traced_mass {fmt_real(trace.total_mass)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="signedot", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, images=True, sweep=False, out=True):
        p.add_argument("--n", type=int, default=32, help="grid side for synthetic images")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--p", type=int, nargs="+", default=[1, 2, 3])
        if images:
            p.add_argument("images", nargs="*")
            p.add_argument("--raw", action="store_true", help="do not normalize input files to unit mass")
        if sweep:
            p.add_argument("--sigma-min", type=float, default=1e-4)
            p.add_argument("--sigma-max", type=float, default=1e-1)
            p.add_argument("--sigma-count", type=int, default=8)
            p.add_argument("--sigmas", type=float, nargs="+")
            p.add_argument("--linear", action="store_true", help="linear instead of log spacing")
            p.add_argument("--trials", type=int, default=100)
            p.add_argument("--metrics", nargs="+", default=["L2", "W1", "W2"], choices=METRICS)
            p.add_argument("--workers", type=int, default=1)
        if out:
            p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("dist", help="signed distances between two images")
    common(p, out=False)
    p.add_argument("--sigma", type=float, help="also print the closed-form bounds at this noise level")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("noise", help="write a noisy copy of an image")
    common(p)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--trial", type=int, default=0)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("bound", help="evaluate the closed-form bounds")
    common(p, images=False, out=False)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--w1-clean", type=float, default=0.0)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("dyadic", help="multiscale bound for a pair of probability images")
    common(p, out=False)
    p.add_argument("--k-star", type=int)
    p.add_argument("--exact", action="store_true", help="also solve W_p^p exactly")
    p.set_defaults(func=cmd_dyadic)

    for name, fn, helptext in (
        ("scaling", cmd_scaling, "self-distance noise scaling"),
        ("ratio", cmd_ratio, "noisy/clean distance ratios"),
        ("overlay", cmd_overlay, "noisy distances against two-image bounds"),
        ("matrix", cmd_matrix, "pairwise distance matrices"),
    ):
        p = sub.add_parser(name, help=helptext)
        common(p, sweep=True)
        p.set_defaults(func=fn)
        if name in ("scaling", "matrix"):
            p.add_argument("--svg", help="write SVG plot(s) with this path/prefix")
        if name == "matrix":
            p.add_argument("--frames", type=int, default=10)
            p.add_argument("--shift", type=float, default=0.0)

    p = sub.add_parser("dip", help="two point masses under growing noise")
    common(p, images=False, sweep=True)
    p.add_argument("--source", type=int, nargs=2, default=[8, 8])
    p.add_argument("--target", type=int, nargs=2, default=[24, 24])
    p.set_defaults(func=cmd_dip, sigma_min=1e-3)

    p = sub.add_parser("trace", help="flow trace of one pixel in a noisy two-point problem")
    common(p, images=False)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--source", type=int, nargs=2, default=[8, 8])
    p.add_argument("--target", type=int, nargs=2, default=[24, 24])
    p.add_argument("--direction", choices=["source", "target"], default="source")
    p.set_defaults(func=cmd_trace, p=[2])
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
