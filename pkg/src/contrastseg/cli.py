"""Command-line front end.

Subcommands: contrast, segment, baseline, losses, eval, synth, render.
Every flag mirrors a config-file key one-to-one with precedence
CLI > config file > built-in default; the resolved configuration is
echoed into a manifest written alongside the outputs.  Exit codes:
0 success, 1 I/O error, 2 validation error, 3 internal error.
"""

import argparse
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import InternalError, ValidationError
from .fields import field_stats, normalize_minmax, threshold
from .io import (read_annotations, read_array, read_json, read_mask_png,
                 write_annotations, write_array, write_heatmap_png, write_json,
                 write_mask_png, write_metrics_report)
from .correlation import build_contrast_set
from .metrics import evaluate
from .selective import (DistanceConstraint, euclidean_distance_map,
                        geodesic_distance_map, solve_selective)
from .supervision import labels_from_annotations, total_loss
from .synth import SynthSpec, generate
from .variational import SolverConfig, run_cvm, solve_cvm

__all__ = ["main", "entry"]

_CONFIG_DEFAULTS = {
    "lambda": 5.0,
    "iota": 1000.0,
    "tau": 0.25,
    "max_iters": 200,
    "tol": 1e-4,
    "grad_reg": 1e-4,
    "gamma": 0.5,
    "eta": 0.6,
    "theta": 0.0,
    "speed_eps": 1e-3,
    "speed_beta": 1000.0,
}


def _add_config_flags(parser):
    parser.add_argument("--config", help="JSON file with flat config keys")
    parser.add_argument("--lambda", dest="lam", type=float, default=None,
                        help="fidelity weight")
    parser.add_argument("--iota", type=float, default=None,
                        help="edge detector coefficient")
    parser.add_argument("--tau", type=float, default=None, help="AOS time step")
    parser.add_argument("--max-iters", type=int, default=None,
                        help="iteration cap")
    parser.add_argument("--tol", type=float, default=None,
                        help="convergence threshold on max |du|")
    parser.add_argument("--grad-reg", type=float, default=None,
                        help="curvature regularizer added to |grad u|")
    parser.add_argument("--gamma", type=float, default=None,
                        help="mask threshold level")
    parser.add_argument("--eta", type=float, default=None,
                        help="contrast strength")
    parser.add_argument("--theta", type=float, default=None,
                        help="distance constraint weight")
    parser.add_argument("--speed-eps", type=float, default=None,
                        help="base slowness for fast marching")
    parser.add_argument("--speed-beta", type=float, default=None,
                        help="edge slowness for fast marching")


_FLAG_DESTS = {
    "lambda": "lam", "iota": "iota", "tau": "tau", "max_iters": "max_iters",
    "tol": "tol", "grad_reg": "grad_reg", "gamma": "gamma", "eta": "eta",
    "theta": "theta", "speed_eps": "speed_eps", "speed_beta": "speed_beta",
}


def _resolve_config(args):
    resolved = dict(_CONFIG_DEFAULTS)
    if getattr(args, "config", None):
        raw = read_json(args.config)
        if not isinstance(raw, dict):
            raise ValidationError("config file must hold a JSON object")
        unknown = set(raw) - set(_CONFIG_DEFAULTS)
        if unknown:
            raise ValidationError("unknown config keys: %s" % sorted(unknown))
        resolved.update(raw)
    for key, dest in _FLAG_DESTS.items():
        val = getattr(args, dest, None)
        if val is not None:
            resolved[key] = val
    try:
        resolved["max_iters"] = int(resolved["max_iters"])
        for key in resolved:
            if key != "max_iters":
                resolved[key] = float(resolved[key])
    except (TypeError, ValueError) as exc:
        raise ValidationError("non-numeric config value: %s" % exc) from exc
    return resolved


def _solver_config(resolved):
    return SolverConfig.from_mapping(resolved)


def _write_manifest(out_dir, subcommand, resolved, inputs, outputs, started):
    manifest = {
        "subcommand": subcommand,
        "version": __version__,
        "config": resolved,
        "inputs": {k: str(v) for k, v in inputs.items() if v is not None},
        "outputs": sorted(outputs),
        "wall_time_s": time.perf_counter() - started,
    }
    write_json(manifest, os.path.join(out_dir, "manifest.json"))


def _out_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _corr_png(s):
    # Correlation maps live in [-1, 1]; shift to [0, 1] for rendering.
    return (s + 1.0) / 2.0


def cmd_contrast(args):
    started = time.perf_counter()
    resolved = _resolve_config(args)
    features = read_array(args.features)
    ann = read_annotations(args.points)
    cset = build_contrast_set(features, ann, eta=resolved["eta"])
    out = _out_dir(args.out_dir)
    written = []

    def emit(arr, name, png=None):
        write_array(arr, os.path.join(out, name + ".npy"))
        written.append(name + ".npy")
        if png is not None:
            write_heatmap_png(png, os.path.join(out, name + ".png"))
            written.append(name + ".png")

    for i, s_p in enumerate(cset.corr_in):
        emit(s_p, "S_p%03d" % i, png=_corr_png(s_p))
        for j, c_pq in enumerate(cset.maps[i]):
            emit(c_pq, "C_p%03d_q%03d" % (i, j))
        emit(cset.means[i], "z_p%03d" % i, png=cset.means[i])
    _write_manifest(out, "contrast", resolved,
                    {"features": args.features, "points": args.points},
                    written, started)
    return 0


def _write_solution(out, u, gamma, reports, extra_report):
    written = []
    write_array(u, os.path.join(out, "u.npy"))
    written.append("u.npy")
    write_heatmap_png(u, os.path.join(out, "u.png"))
    written.append("u.png")
    write_mask_png(threshold(u, gamma), os.path.join(out, "mask.png"))
    written.append("mask.png")
    report = dict(extra_report)
    report["solves"] = [r.to_mapping() for r in reports]
    write_json(report, os.path.join(out, "report.json"))
    written.append("report.json")
    return written


def cmd_segment(args):
    started = time.perf_counter()
    resolved = _resolve_config(args)
    cfg = _solver_config(resolved)
    out = _out_dir(args.out_dir)
    if args.features:
        if not args.points:
            raise ValidationError("--features requires --points")
        features = read_array(args.features)
        ann = read_annotations(args.points)
        u, per_point, reports = run_cvm(features, ann, cfg,
                                        eta=resolved["eta"], jobs=args.jobs)
        stats = field_stats(u)
        extra = {"aggregate": {"min": stats[0], "max": stats[1], "mean": stats[2]},
                 "eta": resolved["eta"]}
        written = _write_solution(out, u, resolved["gamma"], reports, extra)
        for i, u_p in enumerate(per_point):
            name = "u_p%03d.npy" % i
            write_array(u_p, os.path.join(out, name))
            written.append(name)
    else:
        z = read_array(args.image)
        if z.ndim != 2:
            raise ValidationError("--image must name a 2-D array file")
        u, report = solve_cvm(z, cfg)
        written = _write_solution(out, u, resolved["gamma"], [report], {})
    _write_manifest(out, "segment", resolved,
                    {"features": args.features, "image": args.image,
                     "points": args.points},
                    written, started)
    return 0


def cmd_baseline(args):
    started = time.perf_counter()
    resolved = _resolve_config(args)
    cfg = _solver_config(resolved)
    image = read_array(args.image)
    if image.ndim != 2:
        raise ValidationError("--image must name a 2-D array file")
    ann = read_annotations(args.points)
    markers, _ = ann.field_points()
    if not markers:
        raise ValidationError("baseline needs at least one in-target point")
    if args.distance == "euclidean":
        dmap = euclidean_distance_map(markers, image.shape)
    else:
        dmap = geodesic_distance_map(image, markers,
                                     speed_eps=resolved["speed_eps"],
                                     speed_beta=resolved["speed_beta"])
    constraint = DistanceConstraint(kind=args.distance, map=dmap,
                                    theta=resolved["theta"]).validate()
    u, report = solve_selective(image, constraint, cfg)
    out = _out_dir(args.out_dir)
    written = _write_solution(out, u, resolved["gamma"], [report],
                              {"distance": args.distance,
                               "theta": resolved["theta"]})
    write_array(dmap, os.path.join(out, "distance.npy"))
    written.append("distance.npy")
    write_heatmap_png(dmap, os.path.join(out, "distance.png"))
    written.append("distance.png")
    _write_manifest(out, "baseline", resolved,
                    {"image": args.image, "points": args.points},
                    written, started)
    return 0


def _emit_report(obj, out_path):
    if out_path:
        write_json(obj, out_path)
    else:
        import json
        sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_losses(args):
    pred = read_array(args.pred)
    if pred.ndim != 2:
        raise ValidationError("--pred must name a 2-D array file")
    sup = read_array(args.supervision)
    if sup.ndim != 2:
        raise ValidationError("--supervision must name a 2-D array file")
    ann = read_annotations(args.points)
    labels = labels_from_annotations(ann, pred.shape, expand=args.expand)
    total, pce, wkl = total_loss(pred, labels, sup)
    _emit_report({"total": total, "pce": pce, "wkl": wkl}, args.out)
    return 0


def cmd_eval(args):
    pred = read_mask_png(args.pred)
    gt = read_mask_png(args.gt)
    scores = read_array(args.scores) if args.scores else None
    if scores is not None and scores.ndim != 2:
        raise ValidationError("--scores must name a 2-D array file")
    report = evaluate(pred, gt, scores=scores)
    if args.out:
        write_metrics_report(report, args.out)
    else:
        _emit_report(report, None)
    return 0


def cmd_synth(args):
    started = time.perf_counter()
    raw = read_json(args.spec)
    if not isinstance(raw, dict):
        raise ValidationError("synth spec must be a JSON object")
    spec = SynthSpec.from_mapping(raw)
    inst = generate(spec)
    out = _out_dir(args.out_dir)
    written = []
    write_array(inst.features, os.path.join(out, "features.npy"))
    written.append("features.npy")
    write_array(inst.image, os.path.join(out, "image.npy"))
    written.append("image.npy")
    write_mask_png(inst.gt, os.path.join(out, "gt.png"))
    written.append("gt.png")
    write_annotations(inst.annotations, os.path.join(out, "annotations.json"))
    written.append("annotations.json")
    if inst.novel is not None:
        write_mask_png(inst.novel, os.path.join(out, "novel.png"))
        written.append("novel.png")
    write_json(spec.to_mapping(), os.path.join(out, "spec.json"))
    written.append("spec.json")
    _write_manifest(out, "synth", spec.to_mapping(),
                    {"spec": args.spec}, written, started)
    return 0


def cmd_render(args):
    field = read_array(args.field)
    if field.ndim != 2:
        raise ValidationError("--field must name a 2-D array file")
    if args.normalize:
        field = normalize_minmax(field)
    write_heatmap_png(field, args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="contrastseg",
        description="Contrast-based variational segmentation toolkit")
    parser.add_argument("--version", action="version",
                        version="contrastseg %s" % __version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("contrast", help="correlation and contrast maps")
    p.add_argument("--features", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--out-dir", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_contrast)

    p = sub.add_parser("segment", help="variational segmentation")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--features")
    src.add_argument("--image")
    p.add_argument("--points")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel per-point solves")
    _add_config_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("baseline", help="distance-constrained baseline")
    p.add_argument("--image", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--distance", choices=("euclidean", "geodesic"),
                   default="euclidean")
    p.add_argument("--out-dir", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("losses", help="supervision loss report")
    p.add_argument("--pred", required=True)
    p.add_argument("--supervision", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--expand", action="store_true",
                   help="expand each labeled point to its 3x3 neighborhood")
    p.add_argument("--out")
    p.set_defaults(func=cmd_losses)

    p = sub.add_parser("eval", help="metrics report")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--scores")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="synthetic instance")
    p.add_argument("--spec", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("render", help="field to heatmap PNG")
    p.add_argument("--field", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--normalize", action="store_true",
                   help="min-max normalize before rendering")
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("i/o error: %s" % exc, file=sys.stderr)
        return 1
    except InternalError as exc:
        print("internal error: %s" % exc, file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print("internal error: %r" % exc, file=sys.stderr)
        return 3


def entry():
    sys.exit(main())
