"""Command-line interface: ``trwopt {synth,mask,complete,decompose,metrics}``.

Exit codes: 0 success, 2 validation error, 3 I/O error, 4 numerical abort.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .masks import gen_mask_block, gen_mask_lines, gen_mask_random, missing_rate
from .metrics import mse, psnr, rse
from .ring import normalize_ranks, reconstruct_full
from .synthetic import DEFAULT_SCALE, FORMS, synthetic_tensor
from .tensorize import detensorize_visual, parse_plan, tensorize_visual
from .wopt import NumericalAbort, OptimizerConfig, complete, optimize

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERICAL = 0, 2, 3, 4

log = logging.getLogger("trwopt")


def _int_list(text):
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _rate(text):
    r = float(text)
    if not 0 <= r <= 1:
        raise argparse.ArgumentTypeError(f"missing rate must lie in [0, 1], got {r}")
    return r


def _load(path):
    """Read a TRT1 tensor or a P6 image; returns (data, is_image)."""
    if io.is_ppm(path):
        return io.read_ppm(path), True
    return io.read_tensor(path), False


def _optimizer_config(args):
    return OptimizerConfig(max_iters=args.max_iters, rel_tol=args.tol, seed=args.seed)


def _json_float(x):
    return None if x is None else float(x)


# subcommands ---------------------------------------------------------------


def cmd_synth(args):
    dims = args.dims
    if args.length is not None and args.length != int(np.prod(dims)):
        raise ValueError(f"--length {args.length} does not match prod(dims) = {int(np.prod(dims))}")
    x = synthetic_tensor(dims, scale=args.scale, form=args.synth_form)
    io.write_tensor(args.output, x)
    log.info("wrote %s with shape %s", args.output, x.shape)
    return EXIT_OK


def cmd_mask(args):
    if args.like is not None:
        dims = _load(args.like)[0].shape
    elif args.dims is not None:
        dims = tuple(args.dims)
    else:
        raise ValueError("mask needs --like or --dims")
    kinds = [args.missing_rate is not None, args.block is not None, args.lines is not None]
    if sum(kinds) != 1:
        raise ValueError("give exactly one of --missing-rate, --block, --lines")
    if args.missing_rate is not None:
        w = gen_mask_random(dims, args.missing_rate, args.seed)
    elif args.block is not None:
        origin, size = _parse_block(args.block)
        w = gen_mask_block(dims, origin, size)
    else:
        axis, idx = _parse_lines(args.lines)
        w = gen_mask_lines(dims, axis, idx)
    io.write_mask(args.output, w)
    log.info("wrote mask %s, missing rate %.4f", args.output, missing_rate(w))
    return EXIT_OK


def _parse_block(text):
    try:
        o, s = text.split("/")
        return _int_list(o), _int_list(s)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise ValueError(f"bad --block {text!r}, expected 'o1,o2,.../s1,s2,...'") from exc


def _parse_lines(text):
    try:
        axis, idx = text.split(":")
        return int(axis), ([] if not idx.strip() else _int_list(idx))
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise ValueError(f"bad --lines {text!r}, expected 'axis:i1,i2,...'") from exc


def _resolve_mask(args, shape):
    if (args.mask is None) == (args.missing_rate is None):
        raise ValueError("give exactly one of --mask or --missing-rate")
    if args.mask is not None:
        w = io.read_mask(args.mask)
        if w.shape != shape:
            raise ValueError(f"mask shape {w.shape} does not match input shape {shape}")
        return w
    return gen_mask_random(shape, args.missing_rate, args.seed)


def _fit(data, w, is_image, args):
    """Run the optimizer on (optionally tensorized, rescaled) data; return X in input layout."""
    plan = None
    if args.plan and args.plan != "none":
        if not is_image and data.ndim != 3:
            raise ValueError("--plan applies to U x V x C data only")
        plan = parse_plan(args.plan, channels=data.shape[2])
        plan.check(data.shape)
    scale = 255.0 if is_image else 1.0
    T = np.where(w != 0, data, 0.0) / scale
    W = w
    if plan is not None:
        T, W = tensorize_visual(T, plan), tensorize_visual(w, plan)
    ranks = normalize_ranks(args.ranks, T.ndim)
    log.info("optimizing shape %s with ranks %s", T.shape, ranks[:-1])
    cores, report = optimize(T, W, ranks, _optimizer_config(args))
    X = reconstruct_full(cores) * scale
    if plan is not None:
        X = detensorize_visual(X, plan)
    return cores, report, X, ranks


def _final_metrics(data, Y, is_image):
    est = np.clip(Y, 0, 255) if is_image else Y
    try:
        r = rse(data, Y)
    except ValueError:
        r = None
    return {"rse": r, "psnr": psnr(data, est), "mse": mse(data, est)}


def cmd_complete(args):
    data, is_image = _load(args.input)
    w = _resolve_mask(args, data.shape)
    out = Path(args.output)
    mask_out = Path(args.mask_out) if args.mask_out else out.with_suffix(".mask.trt")
    report_out = Path(args.report) if args.report else out.with_suffix(".report.json")
    io.write_mask(mask_out, w)

    cores, report, X, ranks = _fit(data, w, is_image, args)
    # observed entries are copied from the input itself, never rescaled
    Y = np.where(w != 0, data, X)
    io.write_tensor(out, Y)
    if is_image or args.output_image:
        img_out = Path(args.output_image) if args.output_image else out.with_suffix(".ppm")
        io.write_ppm(img_out, Y)
    if args.cores_out:
        io.write_cores(args.cores_out, cores)

    final = _final_metrics(data, Y, is_image)
    final.update(stop_reason=report.stop_reason, fit_rse=report.rse)
    doc = report.to_dict()
    doc["final"] = final
    doc["run"] = {
        "command": "complete",
        "input": str(args.input),
        "shape": list(data.shape),
        "ranks": list(ranks),
        "plan": args.plan,
        "missing_rate": missing_rate(w),
        "seed": args.seed,
        "max_iters": args.max_iters,
        "tol": args.tol,
    }
    io.write_json(report_out, doc)
    log.info("rse %s  psnr %.3f  stop %s", final["rse"], final["psnr"], report.stop_reason)
    return EXIT_OK


def cmd_decompose(args):
    data, is_image = _load(args.input)
    w = np.ones(data.shape)
    cores, report, X, ranks = _fit(data, w, is_image, args)
    io.write_cores(args.output, cores)
    doc = report.to_dict()
    doc["final"] = {"rse": rse(data, X), "stop_reason": report.stop_reason}
    doc["run"] = {
        "command": "decompose",
        "input": str(args.input),
        "shape": list(data.shape),
        "ranks": list(ranks),
        "plan": args.plan,
        "seed": args.seed,
        "max_iters": args.max_iters,
        "tol": args.tol,
    }
    report_out = Path(args.report) if args.report else Path(args.output).with_suffix(".report.json")
    io.write_json(report_out, doc)
    log.info("fit rse %.3e  stop %s", doc["final"]["rse"], report.stop_reason)
    return EXIT_OK


def cmd_metrics(args):
    real = _load(args.real)[0]
    est = _load(args.estimate)[0]
    if real.shape != est.shape:
        raise ValueError(f"shape mismatch: {real.shape} vs {est.shape}")
    try:
        r = rse(real, est)
    except ValueError:
        r = None
    doc = {"rse": r, "psnr": psnr(real, est), "mse": mse(real, est)}
    print(json.dumps(doc, sort_keys=True))
    return EXIT_OK


# parser --------------------------------------------------------------------


def _add_opt_flags(p):
    p.add_argument("--ranks", type=_int_list, required=True,
                   help="uniform rank 'R', or 'R1,...,RN' (optionally with R_{N+1}=R1 appended)")
    p.add_argument("--plan", default=None,
                   help="image tensorization 'u1,u2,.../v1,v2,...' or 'none'")
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None, help="JSON report path")


def build_parser():
    parser = argparse.ArgumentParser(prog="trwopt", description="Tensor-ring completion by weighted optimization.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic oscillating tensor")
    p.add_argument("--dims", type=_int_list, default=[16, 16, 16, 16])
    p.add_argument("--length", type=int, default=None, help="expected number of entries")
    p.add_argument("--scale", type=float, default=DEFAULT_SCALE, help="sampling domain [0, scale)")
    p.add_argument("--synth-form", choices=FORMS, default="literal")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mask", help="write an observation mask")
    p.add_argument("--like", default=None, help="take dims from this TRT1 or PPM file")
    p.add_argument("--dims", type=_int_list, default=None)
    p.add_argument("--missing-rate", type=_rate, default=None)
    p.add_argument("--block", default=None, help="'o1,o2,.../s1,s2,...' (1-based origin / extent)")
    p.add_argument("--lines", default=None, help="'axis:i1,i2,...' (1-based)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("complete", help="fill missing entries of a tensor or image")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="completed tensor (TRT1)")
    p.add_argument("--mask", default=None)
    p.add_argument("--missing-rate", type=_rate, default=None)
    p.add_argument("--mask-out", default=None, help="where to persist the mask used")
    p.add_argument("--output-image", default=None, help="completed image (PPM)")
    p.add_argument("--cores-out", default=None)
    _add_opt_flags(p)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("decompose", help="fit tensor-ring cores to a fully observed tensor")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="core file (TRT1 records)")
    _add_opt_flags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("metrics", help="print RSE/PSNR/MSE of an estimate")
    p.add_argument("real")
    p.add_argument("estimate")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except NumericalAbort as exc:
        print(f"trwopt: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (io.FormatError, OSError) as exc:
        print(f"trwopt: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"trwopt: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
