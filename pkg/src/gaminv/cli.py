"""``gaminv`` command line interface.

Exit codes: 0 ok, 2 bad input, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from gaminv import analytic, fileio
from gaminv.error_metrics import THRESHOLDS, error_report, reliable_points
from gaminv.invariants import gamma_correct, invariant_map, prefilter
from gaminv.kernels import DERIVATIVE_ORDERS, gaussian_kernel
from gaminv.matching import apply_thread_cap, correlation_accuracy
from gaminv.pipeline import PipelineError, RunConfig, run_pipeline

log = logging.getLogger("gaminv")

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3


class InputError(Exception):
    pass


def _open_out(path):
    return open(path, "w", newline="") if path and path != "-" else sys.stdout


def cmd_oracle(args) -> int:
    f = analytic.SineRamp(args.a, args.b, args.c)
    if args.gamma != 1.0:
        f = f.gamma_corrected(args.gamma)
    if args.alpha != 1.0:
        f = f.scaled(args.alpha)
    fn = analytic.INVARIANTS[args.invariant]
    xs = np.linspace(args.start, args.stop, args.num)
    d = f.derivatives(xs)
    rows = []
    for i, x in enumerate(xs):
        try:
            v = fn(f, x)
        except analytic.PoleError:
            v = float("nan")
        rows.append([repr(float(x))] + [repr(float(c[i])) for c in d] + [repr(float(v))])
    out = _open_out(args.out)
    try:
        fileio.write_csv(out, ["x", "f", "f1", "f2", "f3", "value"], rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_kernels(args) -> int:
    orders = [(0, 0), *DERIVATIVE_ORDERS]
    out = _open_out(args.out)
    try:
        for order in orders:
            k = gaussian_kernel(args.sigma, args.size, order)
            out.write(f"# {k.name} sigma={args.sigma:g} size={args.size}\n")
            for row in k.taps:
                out.write(",".join(repr(float(v)) for v in row) + "\n")
            out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_gamma(args) -> int:
    img = fileio.load_image(args.input)
    out = gamma_correct(img, args.gamma, args.white, requantize=not args.no_requantize)
    if args.map:
        fileio.save_map(args.map, out)
    fileio.save_pgm(args.output, out)
    return EXIT_OK


def cmd_invariant(args) -> int:
    img = fileio.load_image(args.input)
    if args.gamma is not None:
        img = gamma_correct(img, args.gamma, requantize=args.requantize)
    m = invariant_map(img, args.kind, sigma_der=args.sigma_der, sigma_pre=args.sigma_pre,
                      size=args.kernel_size, method=args.method)
    vals = m.values.values()
    if vals.size and np.abs(vals).max() > 1.0:
        log.error("invariant map leaves [-1, 1]")
        return EXIT_INTERNAL
    stem = Path(args.output)
    fileio.save_map(stem.with_suffix(".ginv"), m)
    fileio.save_pgm(stem.with_suffix(".pgm"), fileio.invariant_to_gray(m))
    return EXIT_OK


def cmd_errors(args) -> int:
    test, ref = fileio.load_map(args.test), fileio.load_map(args.reference)
    if test.shape != ref.shape:
        raise InputError(f"map sizes differ: {test.shape} vs {ref.shape}")
    rep = error_report(test, ref, args.epsilon)
    rows = [[f"{e:g}", f"{rep.prp[e]:.4f}"] for e in args.epsilon]
    rows += [["mean_delta", f"{rep.mean_abs:.6g}"], ["median_delta", f"{rep.median_abs:.6g}"],
             ["n_valid", str(rep.n_valid)]]
    out = _open_out(args.out)
    try:
        fileio.write_csv(out, ["epsilon", "prp"], rows)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.delta_pgm:
        fileio.save_pgm(args.delta_pgm, fileio.scaled_to_gray(rep.abs_err, 2.0))
    if args.rp_prefix:
        for e in args.epsilon:
            rp, _ = reliable_points(rep.rel_err, e)
            fileio.save_pgm(f"{args.rp_prefix}{e:g}.pgm", fileio.mask_to_gray(rp, on=0))
    return EXIT_OK


def cmd_match(args) -> int:
    src_img = fileio.load_image(args.input)
    if args.target:
        tgt_img = fileio.load_image(args.target)
    else:
        tgt_img = gamma_correct(src_img, args.gamma, requantize=True)
    if tgt_img.shape != src_img.shape:
        raise InputError("source and target images differ in size")
    if args.representation == "intensity":
        src = prefilter(src_img, args.sigma_pre, args.kernel_size)
        tgt = prefilter(tgt_img, args.sigma_pre, args.kernel_size)
    else:
        kw = dict(sigma_der=args.sigma_der, sigma_pre=args.sigma_pre, size=args.kernel_size)
        src = invariant_map(src_img, args.kind, **kw).values
        tgt = invariant_map(tgt_img, args.kind, **kw).values
    tn, tm = args.template_size
    surface_at = tuple(args.surface) if args.surface else None
    rep = correlation_accuracy(src, tgt, tn, tm, margin=args.margin, surface_at=surface_at)
    out = _open_out(args.out)
    try:
        fileio.write_csv(out, ["anchor_x", "anchor_y", "best_x", "best_y", "score", "is_cmcp"],
                         ([ax, ay, bx, by, f"{s:.9g}", int(ok)] for ax, ay, bx, by, s, ok in rep.rows()))
        out.write(f"# CA={rep.ca:.4f} n={rep.n} correct={rep.n_correct} degenerate={rep.n_degenerate}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    if args.mask_pgm:
        fileio.save_pgm(args.mask_pgm, fileio.mask_to_gray(rep.cmcp_mask, on=255))
    if args.surface_pgm and rep.correlation_surface is not None:
        fileio.save_pgm(args.surface_pgm, fileio.scaled_to_gray(rep.correlation_surface, 1.0))
    return EXIT_OK


def cmd_pipeline(args) -> int:
    cfg = RunConfig.from_json(args.config) if args.config else RunConfig()
    if args.image:
        cfg.images = list(args.image)
    if args.synth:
        cfg.synthetic = list(args.synth)
    if args.out_dir:
        cfg.out_dir = args.out_dir
    if args.gamma is not None:
        cfg.gamma = args.gamma
    files = run_pipeline(cfg, dry_run=args.dry_run)
    if args.dry_run:
        print("plan:")
    for f in files:
        print(f)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaminv", description="Differential invariants under gamma correction.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common_filters(sp):
        sp.add_argument("--sigma-der", type=float, default=1.0)
        sp.add_argument("--sigma-pre", type=float, default=0.0)
        sp.add_argument("--kernel-size", type=int, default=7)
        sp.add_argument("--kind", choices=["m12g", "m123g"], default="m12g")

    s = sub.add_parser("oracle", help="evaluate an invariant on the analytic test signal")
    s.add_argument("--invariant", choices=sorted(analytic.INVARIANTS), default="m12g")
    s.add_argument("--a", type=float, default=3.0)
    s.add_argument("--b", type=float, default=30.0)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--start", type=float, default=0.0)
    s.add_argument("--stop", type=float, default=2.0)
    s.add_argument("--num", type=int, default=201)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("kernels", help="dump the Gaussian (derivative) kernels as CSV blocks")
    s.add_argument("--dump", action="store_true", required=True)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--size", type=int, default=7)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_kernels)

    s = sub.add_parser("gamma", help="synthetic gamma correction of an 8-bit image")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--gamma", type=float, default=0.6)
    s.add_argument("--white", type=float, default=255.0)
    s.add_argument("--no-requantize", action="store_true",
                   help="keep float values (PGM output is still rounded; use --map for exact values)")
    s.add_argument("--map", help="also write the float result as a GINV map")
    s.set_defaults(func=cmd_gamma)

    s = sub.add_parser("invariant", help="compute an invariant map")
    s.add_argument("input")
    s.add_argument("output", help="output stem; writes <stem>.ginv and <stem>.pgm")
    common_filters(s)
    s.add_argument("--gamma", type=float, help="apply synthetic gamma correction first")
    s.add_argument("--requantize", action="store_true")
    s.add_argument("--method", choices=["log", "raw"], default="log")
    s.set_defaults(func=cmd_invariant)

    s = sub.add_parser("errors", help="absolute/relative errors between two maps")
    s.add_argument("test", help="map of the gamma-corrected image")
    s.add_argument("reference", help="map of the uncorrected image")
    s.add_argument("--epsilon", type=float, nargs="+", default=list(THRESHOLDS))
    s.add_argument("--out", default="-")
    s.add_argument("--delta-pgm")
    s.add_argument("--rp-prefix", help="write reliable-point masks to <prefix><eps>.pgm")
    s.set_defaults(func=cmd_errors)

    s = sub.add_parser("match", help="all-anchors template location experiment")
    s.add_argument("input")
    s.add_argument("--target", help="second image of the same scene (default: synthetic gamma of input)")
    s.add_argument("--template-size", type=int, nargs=2, metavar=("TN", "TM"), default=[6, 8])
    s.add_argument("--representation", choices=["intensity", "invariant"], default="invariant")
    s.add_argument("--gamma", type=float, default=0.6)
    s.add_argument("--margin", type=int, default=0)
    common_filters(s)
    s.add_argument("--out", default="-")
    s.add_argument("--mask-pgm")
    s.add_argument("--surface", type=int, nargs=2, metavar=("X", "Y"))
    s.add_argument("--surface-pgm")
    s.set_defaults(func=cmd_match)

    s = sub.add_parser("pipeline", help="run the full experiment over a corpus")
    s.add_argument("--config", help="JSON RunConfig")
    s.add_argument("--image", action="append", help="corpus image (repeatable)")
    s.add_argument("--synth", action="append", help="synthetic corpus entry kind:seed (repeatable)")
    s.add_argument("--out-dir")
    s.add_argument("--gamma", type=float)
    s.add_argument("--dry-run", action="store_true")
    s.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    apply_thread_cap()
    try:
        return args.func(args)
    except PipelineError as e:
        log.error("%s", e)
        return e.exit_code
    except (InputError, ValueError, OSError) as e:
        log.error("[%s] %s", args.command, e)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
