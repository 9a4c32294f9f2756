"""Batch command-line harness.

Subcommands: gen, ingest, persist, distance, lifetimes, optimize, exp1,
exp2. Every run is fully determined by its flags (plus an optional
key=value config file; flags win on conflict), and every output file
embeds the resolved configuration in a header or comment field, so
repeated runs are byte-identical.

Exit codes: 0 success, 1 configuration error, 2 input/IO error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import svg
from .distance import bottleneck, sinkhorn, wasserstein_exact
from .filtration import build_rips
from .ingest import (
    CropRegion,
    CropSpec,
    IdxFormatError,
    ImageSet,
    crop_to_cloud,
    read_idx,
    shuffle_pixels,
)
from .persistence import (
    PersistenceDiagram,
    boundary_matrix,
    diagram,
    lifetime_stats,
    load_diagram,
    reduce as reduce_pairs,
    save_diagram,
)
from .pointcloud import (
    PointCloud,
    gen_circle,
    gen_disk_with_holes,
    gen_gaussian_blob,
    load_cloud_csv,
    pairwise_distances,
    save_cloud_csv,
)
from .synth import structured_center_images
from .topoopt import TotalPersistence, WassersteinToTarget, optimize

__all__ = ["main"]


class ConfigError(Exception):
    """Invalid flags or parameter combinations (exit code 1)."""


class InputError(Exception):
    """Unreadable or malformed input files (exit code 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise ConfigError(message)


def _child_seed(master: int, *path: int) -> int:
    """Deterministic child seed derived from the master seed and a path."""
    ss = np.random.SeedSequence([int(master), *[int(p) for p in path]])
    return int(ss.generate_state(1)[0])


def _parse_radius(text: str) -> float | None:
    if text.lower() == "auto":
        return None
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"--max-radius must be a number or 'auto', got {text!r}")
    return value


def _load_input(loader, path: str):
    try:
        return loader(path)
    except (OSError, ValueError) as exc:
        raise InputError(str(exc)) from exc


# ----------------------------------------------------------------------
# Cloud sources shared by gen / persist / optimize
# ----------------------------------------------------------------------

_SHAPES = ("circle", "blob", "disk")


def _add_cloud_source(p: argparse.ArgumentParser, with_input: bool) -> None:
    if with_input:
        p.add_argument("--input", help="point-cloud CSV file")
        p.add_argument("--gen", choices=_SHAPES, help="generate the input cloud instead")
    else:
        p.add_argument("--shape", choices=_SHAPES, required=True)
    p.add_argument("--n", type=int, default=60, help="number of points")
    p.add_argument("--radius", type=float, default=1.0, help="circle radius")
    p.add_argument("--noise-sd", type=float, default=0.0, help="circle noise sd")
    p.add_argument("--dim", type=int, default=2, help="blob ambient dimension")
    p.add_argument("--sd", type=float, default=1.0, help="blob standard deviation")
    p.add_argument(
        "--holes",
        default="",
        help="disk holes as 'cx,cy,r;cx,cy,r;...' (empty for none)",
    )


def _parse_holes(text: str) -> list[tuple[tuple[float, float], float]]:
    holes = []
    for part in filter(None, (s.strip() for s in text.split(";"))):
        fields = part.split(",")
        if len(fields) != 3:
            raise ConfigError(f"hole spec {part!r} must be cx,cy,r")
        cx, cy, r = (float(v) for v in fields)
        holes.append(((cx, cy), r))
    return holes


def _make_cloud(shape: str, args: argparse.Namespace) -> PointCloud:
    if shape == "circle":
        return gen_circle(args.n, args.radius, args.noise_sd, args.seed)
    if shape == "blob":
        return gen_gaussian_blob(args.n, args.dim, args.sd, args.seed)
    return gen_disk_with_holes(args.n, _parse_holes(args.holes), args.seed)


def _resolve_cloud(args: argparse.Namespace) -> PointCloud:
    if getattr(args, "input", None):
        if args.gen:
            raise ConfigError("--input and --gen are mutually exclusive")
        return _load_input(load_cloud_csv, args.input)
    if not getattr(args, "gen", None):
        raise ConfigError("one of --input or --gen is required")
    return _make_cloud(args.gen, args)


def _cloud_source_config(args: argparse.Namespace) -> dict:
    if getattr(args, "input", None):
        return {"input": args.input}
    return {
        "gen": getattr(args, "gen", None) or getattr(args, "shape", None),
        "n": args.n,
        "radius": args.radius,
        "noise_sd": args.noise_sd,
        "dim": args.dim,
        "sd": args.sd,
        "holes": args.holes,
    }


def _persistence_of(cloud: PointCloud, max_dim: int, max_radius: float | None):
    dm = pairwise_distances(cloud)
    f = build_rips(dm, max_dim=max_dim, max_radius=max_radius)
    pairs = reduce_pairs(boundary_matrix(f), f)
    return dm, f, pairs


def _diagram_for_output(pairs, dim: int, max_dim: int) -> PersistenceDiagram:
    """Reported diagram: essential classes kept except at the top dimension,
    where unpaired creators are truncation artifacts (no dim+1 simplices)."""
    return diagram(pairs, dim, include_zero=False, include_essential=dim < max_dim)


def _config_comment(config: dict) -> str:
    return "config: " + json.dumps(config, sort_keys=True)


def _write_csv(path: str, config: dict, header: str, rows: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# " + _config_comment(config) + "\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def _stats_row(stats) -> str:
    hist = ";".join(str(c) for c in stats.histogram)
    return ",".join(
        [
            str(stats.dim),
            str(stats.count),
            str(stats.essential_count),
            repr(stats.mean_lifetime),
            repr(stats.max_lifetime),
            repr(stats.bin_width),
            hist,
        ]
    )


_STATS_HEADER = "dim,count,essential_count,mean_lifetime,max_lifetime,bin_width,histogram"


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> int:
    cloud = _make_cloud(args.shape, args)
    config = {"subcommand": "gen", "seed": args.seed, **_cloud_source_config(args)}
    out = os.path.join(args.out_dir, args.out)
    save_cloud_csv(cloud, out, header_lines=[_config_comment(config)])
    print(f"wrote {out} ({cloud.n} points in R^{cloud.dim})")
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    images = _load_input(read_idx, args.idx)
    region = CropRegion.CENTER if args.region == "center" else CropRegion.CORNER_TOP_LEFT
    spec = CropSpec(region, args.size)
    cloud = crop_to_cloud(images, spec, args.sample_n, args.noise_sd, args.seed)
    if args.shuffle:
        cloud = shuffle_pixels(cloud, _child_seed(args.seed, 1))
    config = {
        "subcommand": "ingest",
        "idx": args.idx,
        "region": args.region,
        "size": args.size,
        "sample_n": args.sample_n,
        "noise_sd": args.noise_sd,
        "shuffle": bool(args.shuffle),
        "seed": args.seed,
    }
    out = os.path.join(args.out_dir, args.out)
    save_cloud_csv(cloud, out, header_lines=[_config_comment(config)])
    print(f"wrote {out} ({cloud.n} points in R^{cloud.dim})")
    return 0


def cmd_persist(args: argparse.Namespace) -> int:
    cloud = _resolve_cloud(args)
    max_radius = _parse_radius(args.max_radius)
    config = {
        "subcommand": "persist",
        "seed": args.seed,
        "max_dim": args.max_dim,
        "max_radius": args.max_radius,
        "bins": args.bins,
        "bin_width": args.bin_width,
        **_cloud_source_config(args),
    }
    _, f, pairs = _persistence_of(cloud, args.max_dim, max_radius)
    rows = []
    for k in range(args.max_dim + 1):
        d = _diagram_for_output(pairs, k, args.max_dim)
        path = os.path.join(args.out_dir, f"diagram_dim{k}.json")
        save_diagram(d, path, extra={"config": config})
        rows.append(_stats_row(lifetime_stats(d, args.bins, args.bin_width)))
        print(f"wrote {path} ({len(d)} points)")
    stats_path = os.path.join(args.out_dir, "lifetimes.csv")
    _write_csv(stats_path, config, _STATS_HEADER, rows)
    print(f"wrote {stats_path}")
    return 0


def cmd_distance(args: argparse.Namespace) -> int:
    d1 = _load_input(load_diagram, args.diagram_a)
    d2 = _load_input(load_diagram, args.diagram_b)
    if d1.dim != d2.dim:
        raise ConfigError(f"diagram dimensions differ: {d1.dim} vs {d2.dim}")
    config = {
        "subcommand": "distance",
        "diagram_a": args.diagram_a,
        "diagram_b": args.diagram_b,
        "method": args.method,
        "alpha": args.alpha,
        "max_iters": args.max_iters,
        "tol": args.tol,
        "essential_cap": args.essential_cap,
        "ground": args.ground,
    }
    converged = True
    iters = 0
    if args.method == "exact":
        dist, _ = wasserstein_exact(
            d1, d2, essential_cap=args.essential_cap, ground=args.ground
        )
    elif args.method == "bottleneck":
        dist = bottleneck(d1, d2, essential_cap=args.essential_cap, ground=args.ground)
    else:
        dist, plan = sinkhorn(
            d1,
            d2,
            alpha=args.alpha,
            max_iters=args.max_iters,
            tol=args.tol,
            essential_cap=args.essential_cap,
            ground=args.ground,
        )
        converged = plan.converged
        iters = plan.iters
    record = {
        "method": args.method,
        "dim": d1.dim,
        "distance": dist,
        "converged": converged,
        "iters": iters,
        "config": config,
    }
    out = os.path.join(args.out_dir, args.out)
    _write_json(out, record)
    print(json.dumps({k: record[k] for k in ("method", "dim", "distance", "converged", "iters")}))
    return 0


def cmd_lifetimes(args: argparse.Namespace) -> int:
    d = _load_input(load_diagram, args.diagram)
    config = {
        "subcommand": "lifetimes",
        "diagram": args.diagram,
        "bins": args.bins,
        "bin_width": args.bin_width,
    }
    stats = lifetime_stats(d, args.bins, args.bin_width)
    out = os.path.join(args.out_dir, args.out)
    _write_csv(out, config, _STATS_HEADER, [_stats_row(stats)])
    print(f"wrote {out}")
    return 0


def _build_functionals(args: argparse.Namespace):
    dims = [int(s) for s in str(args.fdim).split(",")]
    weights = (
        [float(s) for s in args.dim_weights.split(",")]
        if args.dim_weights
        else [1.0] * len(dims)
    )
    if len(weights) != len(dims):
        raise ConfigError("--dim-weights must match --fdim in length")
    specs = []
    if args.functional == "total":
        for d, w in zip(dims, weights):
            specs.append(
                (
                    TotalPersistence(
                        dim=d, p=args.p, q=args.q, i0=args.i0, direction=args.direction
                    ),
                    w,
                )
            )
    else:
        targets = [t for t in str(args.target or "").split(",") if t]
        if len(targets) != len(dims):
            raise ConfigError("--target must list one diagram file per --fdim entry")
        alpha = None if args.alpha_opt.lower() == "exact" else float(args.alpha_opt)
        for d, w, t in zip(dims, weights, targets):
            tgt = _load_input(load_diagram, t)
            if tgt.dim != d:
                raise ConfigError(f"target {t} has dim {tgt.dim}, expected {d}")
            specs.append(
                (
                    WassersteinToTarget(
                        target=tgt,
                        dim=d,
                        alpha=alpha,
                        ground=args.ground,
                        direction=args.direction,
                    ),
                    w,
                )
            )
    return specs


def cmd_optimize(args: argparse.Namespace) -> int:
    cloud = _resolve_cloud(args)
    specs = _build_functionals(args)
    max_radius = _parse_radius(args.max_radius)
    max_dim = args.max_dim if args.max_dim > 0 else None
    config = {
        "subcommand": "optimize",
        "seed": args.seed,
        "functional": args.functional,
        "fdim": args.fdim,
        "dim_weights": args.dim_weights,
        "p": args.p,
        "q": args.q,
        "i0": args.i0,
        "target": args.target,
        "alpha": args.alpha_opt,
        "ground": args.ground,
        "direction": args.direction,
        "lr": args.lr,
        "steps": args.steps,
        "record_every": args.record_every,
        "max_dim": args.max_dim,
        "max_radius": args.max_radius,
        **_cloud_source_config(args),
    }
    traj = optimize(
        cloud,
        specs,
        lr=args.lr,
        steps=args.steps,
        record_every=args.record_every,
        max_dim=max_dim,
        max_radius=max_radius,
    )
    traj_path = os.path.join(args.out_dir, "trajectory.csv")
    rows = [f"{r.step},{r.value!r}" for r in traj.records]
    _write_csv(traj_path, config, "step,value", rows)
    if args.snapshots:
        snap_dir = os.path.join(args.out_dir, "snapshots")
        os.makedirs(snap_dir, exist_ok=True)
        for r in traj.records:
            save_cloud_csv(
                r.cloud,
                os.path.join(snap_dir, f"step_{r.step:06d}.csv"),
                header_lines=[_config_comment(config)],
            )
    curve = svg.line_chart(
        [r.step for r in traj.records],
        [r.value for r in traj.records],
        title="objective value per step",
        comment=_config_comment(config),
    )
    svg_path = os.path.join(args.out_dir, "value_curve.svg")
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write(curve)
    print(f"wrote {traj_path} ({len(traj.records)} records)")
    if traj.diverged:
        print("optimization diverged; partial trajectory preserved", file=sys.stderr)
        return 3
    return 0


def _load_experiment_images(args: argparse.Namespace) -> ImageSet:
    if args.idx:
        return _load_input(read_idx, args.idx)
    return structured_center_images(args.synthetic_count, seed=_child_seed(args.seed, 99))


_EXP_DIMS = (0, 1, 2)


def _exp_diagrams(cloud: PointCloud, max_dim: int, max_radius: float | None):
    _, _, pairs = _persistence_of(cloud, max_dim, max_radius)
    return {
        k: _diagram_for_output(pairs, k, max_dim) if k <= max_dim else PersistenceDiagram(k, ())
        for k in _EXP_DIMS
    }


def cmd_exp1(args: argparse.Namespace) -> int:
    images = _load_experiment_images(args)
    if args.n > images.count:
        raise ConfigError(
            f"dataset has {images.count} images; need at least n={args.n} per repeat"
        )
    max_radius = _parse_radius(args.max_radius)
    config = {
        "subcommand": "exp1",
        "idx": args.idx,
        "synthetic_count": args.synthetic_count,
        "n": args.n,
        "crop_size": args.crop_size,
        "noise_sd": args.noise_sd,
        "repeats": args.repeats,
        "seed": args.seed,
        "max_dim": args.max_dim,
        "max_radius": args.max_radius,
        "bins": args.bins,
        "bin_width": args.bin_width,
    }
    conditions = {
        "center": CropSpec(CropRegion.CENTER, args.crop_size),
        "corner": CropSpec(CropRegion.CORNER_TOP_LEFT, args.crop_size),
    }
    repeats = []
    hist_sums = {(c, k): np.zeros(args.bins, dtype=np.int64) for c in conditions for k in _EXP_DIMS}
    for r in range(args.repeats):
        seed_r = _child_seed(args.seed, r)
        row: dict = {"repeat": r, "conditions": {}}
        for cname, spec in conditions.items():
            # Same seed for both crops: the same sampled, noised images are
            # cropped at the two regions.
            cloud = crop_to_cloud(images, spec, args.n, args.noise_sd, seed_r)
            diags = _exp_diagrams(cloud, args.max_dim, max_radius)
            per_dim = {}
            for k in _EXP_DIMS:
                stats = lifetime_stats(diags[k], args.bins, args.bin_width)
                hist_sums[(cname, k)] += np.array(stats.histogram, dtype=np.int64)
                per_dim[str(k)] = {
                    "count": stats.count,
                    "essential_count": stats.essential_count,
                    "mean_lifetime": stats.mean_lifetime,
                    "max_lifetime": stats.max_lifetime,
                    "histogram": list(stats.histogram),
                }
            row["conditions"][cname] = per_dim
        repeats.append(row)

    aggregate: dict = {}
    for cname in conditions:
        aggregate[cname] = {}
        for k in _EXP_DIMS:
            means = [rep["conditions"][cname][str(k)]["mean_lifetime"] for rep in repeats]
            aggregate[cname][str(k)] = {
                "mean_lifetime_mean": float(np.mean(means)),
                "mean_lifetime_std": float(np.std(means, ddof=1)) if len(means) > 1 else 0.0,
            }
    report = {"config": config, "repeats": repeats, "aggregate": aggregate}
    report_path = os.path.join(args.out_dir, "exp1_report.json")
    _write_json(report_path, report)
    for cname in conditions:
        for k in _EXP_DIMS:
            chart = svg.bar_chart(
                hist_sums[(cname, k)].tolist(),
                args.bin_width,
                title=f"{cname} crop: dim-{k} lifetime frequency",
                comment=_config_comment(config),
            )
            path = os.path.join(args.out_dir, f"exp1_{cname}_dim{k}.svg")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(chart)
    print(f"wrote {report_path}")
    for k in _EXP_DIMS:
        c = aggregate["center"][str(k)]["mean_lifetime_mean"]
        o = aggregate["corner"][str(k)]["mean_lifetime_mean"]
        print(f"dim {k}: mean lifetime center={c!r} corner={o!r}")
    return 0


def cmd_exp2(args: argparse.Namespace) -> int:
    images = _load_experiment_images(args)
    if 2 * args.n > images.count:
        raise ConfigError(
            f"dataset has {images.count} images; need 2n={2 * args.n} distinct "
            "images per repeat"
        )
    conditions = [c.strip() for c in args.conditions.split(",") if c.strip()]
    for c in conditions:
        if c not in ("center", "corner", "shuffle"):
            raise ConfigError(f"unknown condition {c!r}")
    max_radius = _parse_radius(args.max_radius)
    config = {
        "subcommand": "exp2",
        "idx": args.idx,
        "synthetic_count": args.synthetic_count,
        "n": args.n,
        "crop_size": args.crop_size,
        "noise_sd": args.noise_sd,
        "conditions": args.conditions,
        "repeats": args.repeats,
        "seed": args.seed,
        "method": args.method,
        "alpha": args.alpha,
        "same_sample": bool(args.same_sample),
        "max_dim": args.max_dim,
        "max_radius": args.max_radius,
    }

    def crop_spec(cond: str) -> CropSpec:
        region = CropRegion.CORNER_TOP_LEFT if cond == "corner" else CropRegion.CENTER
        return CropSpec(region, args.crop_size)

    repeats = []
    for r in range(args.repeats):
        rng = np.random.default_rng(_child_seed(args.seed, r))
        perm = rng.permutation(images.count)
        idx_a = np.sort(perm[: args.n])
        idx_b = idx_a if args.same_sample else np.sort(perm[args.n : 2 * args.n])
        row: dict = {"repeat": r, "conditions": {}}
        for cond in conditions:
            spec = crop_spec(cond)
            dists = {}
            clouds = []
            for half, idx in enumerate((idx_a, idx_b)):
                noise_seed = _child_seed(args.seed, r, 0 if args.same_sample else half)
                subset = ImageSet(images.pixels[idx])
                cloud = crop_to_cloud(subset, spec, args.n, args.noise_sd, noise_seed)
                if cond == "shuffle":
                    shuffle_seed = _child_seed(
                        args.seed, r, 10 + (0 if args.same_sample else half)
                    )
                    cloud = shuffle_pixels(cloud, shuffle_seed)
                clouds.append(cloud)
            diags_a = _exp_diagrams(clouds[0], args.max_dim, max_radius)
            diags_b = _exp_diagrams(clouds[1], args.max_dim, max_radius)
            for k in _EXP_DIMS:
                # Distances compare finite classes only.
                da = PersistenceDiagram(
                    k, tuple(p for p in diags_a[k].points if math.isfinite(p[1]))
                )
                db = PersistenceDiagram(
                    k, tuple(p for p in diags_b[k].points if math.isfinite(p[1]))
                )
                if args.method == "sinkhorn":
                    dist, _ = sinkhorn(da, db, alpha=args.alpha)
                else:
                    dist, _ = wasserstein_exact(da, db)
                dists[str(k)] = dist
            row["conditions"][cond] = dists
        repeats.append(row)

    aggregate: dict = {}
    for cond in conditions:
        aggregate[cond] = {}
        for k in _EXP_DIMS:
            vals = [rep["conditions"][cond][str(k)] for rep in repeats]
            aggregate[cond][str(k)] = {
                "distance_mean": float(np.mean(vals)),
                "distance_std": float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0,
            }
    report = {"config": config, "repeats": repeats, "aggregate": aggregate}
    report_path = os.path.join(args.out_dir, "exp2_report.json")
    _write_json(report_path, report)
    print(f"wrote {report_path}")
    for cond in conditions:
        print(
            f"{cond}: "
            + " ".join(
                f"dim{k}={aggregate[cond][str(k)]['distance_mean']!r}" for k in _EXP_DIMS
            )
        )
    return 0


# ----------------------------------------------------------------------
# Parser assembly
# ----------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-dim", type=int, default=2)
    p.add_argument("--max-radius", default="auto", help="number or 'auto'")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--config", help="key=value config file; flags win on conflict")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="topocloud", description=__doc__)
    sub = top.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic point cloud CSV")
    _add_common(p)
    _add_cloud_source(p, with_input=False)
    p.add_argument("--out", default="cloud.csv")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("ingest", help="IDX images -> point-cloud CSV")
    _add_common(p)
    p.add_argument("--idx", required=True, help="IDX unsigned-byte image file")
    p.add_argument("--region", choices=("center", "corner"), default="center")
    p.add_argument("--size", type=int, default=10)
    p.add_argument("--sample-n", type=int, default=200)
    p.add_argument("--noise-sd", type=float, default=0.0)
    p.add_argument("--shuffle", action="store_true")
    p.add_argument("--out", default="cloud.csv")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("persist", help="compute persistence diagrams + lifetime stats")
    _add_common(p)
    _add_cloud_source(p, with_input=True)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--bin-width", type=float, default=0.05)
    p.set_defaults(func=cmd_persist)

    p = sub.add_parser("distance", help="distance between two diagram files")
    _add_common(p)
    p.add_argument("diagram_a")
    p.add_argument("diagram_b")
    p.add_argument("--method", choices=("exact", "sinkhorn", "bottleneck"), default="exact")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--max-iters", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--essential-cap", type=float, default=None)
    p.add_argument("--ground", choices=("linf", "l2"), default="linf")
    p.add_argument("--out", default="distance.json")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("lifetimes", help="lifetime statistics of a diagram file")
    _add_common(p)
    p.add_argument("diagram")
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--bin-width", type=float, default=0.05)
    p.add_argument("--out", default="lifetimes.csv")
    p.set_defaults(func=cmd_lifetimes)

    p = sub.add_parser("optimize", help="gradient descent on a diagram functional")
    _add_common(p)
    _add_cloud_source(p, with_input=True)
    p.add_argument("--functional", choices=("total", "wasserstein"), default="total")
    p.add_argument("--fdim", default="1", help="homology dimension(s), comma-separated")
    p.add_argument("--dim-weights", default="", help="weights per dimension, default 1")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--i0", type=int, default=0)
    p.add_argument("--target", default="", help="target diagram file(s), comma-separated")
    p.add_argument("--alpha-opt", default="exact", help="'exact' or a Sinkhorn alpha")
    p.add_argument("--ground", choices=("linf", "l2"), default="linf")
    p.add_argument("--direction", choices=("minimize", "maximize"), default="minimize")
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--snapshots", action="store_true", help="write per-record cloud CSVs")
    p.set_defaults(func=cmd_optimize, max_dim=0)

    p = sub.add_parser("exp1", help="center-vs-corner lifetime comparison")
    _add_common(p)
    p.add_argument("--idx", default="", help="IDX dataset; omit for synthetic images")
    p.add_argument("--synthetic-count", type=int, default=400)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--crop-size", type=int, default=10)
    p.add_argument("--noise-sd", type=float, default=0.05)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--bin-width", type=float, default=0.05)
    p.set_defaults(func=cmd_exp1)

    p = sub.add_parser("exp2", help="diagram stability across disjoint samples")
    _add_common(p)
    p.add_argument("--idx", default="", help="IDX dataset; omit for synthetic images")
    p.add_argument("--synthetic-count", type=int, default=400)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--crop-size", type=int, default=10)
    p.add_argument("--noise-sd", type=float, default=0.05)
    p.add_argument("--conditions", default="center,corner,shuffle")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--method", choices=("exact", "sinkhorn"), default="exact")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument(
        "--same-sample",
        action="store_true",
        help="test hook: use the same sample for both sides (distances become 0)",
    )
    p.set_defaults(func=cmd_exp2)

    return top


def _apply_config_file(argv: list[str]) -> list[str]:
    """Expand --config key=value files into flags placed before the user's
    own flags, so explicit flags win on conflict."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None or not argv:
        return argv
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InputError(str(exc)) from exc
    extra: list[str] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        extra.extend(["--" + key.replace("_", "-"), value])
    return [argv[0], *extra, *argv[1:]]


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        argv = _apply_config_file(argv)
        args = build_parser().parse_args(argv)
        if args.out_dir != ".":
            os.makedirs(args.out_dir, exist_ok=True)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except IdxFormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
