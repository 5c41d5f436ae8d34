"""Command line front end: correct, simulate, evaluate, sweep.

Exit codes: 0 success, 1 runtime/data error, 2 usage/config error.
"""

import argparse
import json
import os
import sys

from . import __version__
from .errors import ConfigError, HAdaInError
from .hadain import DEFAULT_LEVELS, DEFAULT_OVERLAP, HAdaInConfig, hadain_correct
from .image_core import check_same_shape, load_image, save_image
from .metrics import metric_report
from .patch_grid import make_grid
from .shift_sim import KIND_ALIASES, KINDS, RetouchLabel, ShiftSpec, apply_shift, random_spec
from .sweep import load_plan, run_sweep, write_outputs, format_table

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

SMALL_PATCH_WARNING = 4


class UsageError(Exception):
    pass


def _threads_default():
    raw = os.environ.get("HADAIN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _load(path):
    try:
        return load_image(path)
    except FileNotFoundError:
        raise HAdaInError(f"{path}: no such file") from None
    except (OSError, HAdaInError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise HAdaInError(f"{path}: {exc}") from None


def _write_json(path, doc):
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def cmd_correct(args):
    if args.adain_only:
        args.levels, args.overlap = 1, 0.0
    cfg = HAdaInConfig(args.levels, args.overlap, args.eps, clamp_output=not args.no_clamp)
    x = _load(args.reference)
    y = _load(args.generated)
    try:
        check_same_shape(x, y)
    except HAdaInError:
        raise HAdaInError(
            f"{args.generated}: size {y.shape[2]}x{y.shape[1]} does not match reference "
            f"{args.reference} ({x.shape[2]}x{x.shape[1]})"
        ) from None
    finest = make_grid(x.shape[1], x.shape[2], cfg.levels, cfg.gamma)
    if min(finest.patch_h, finest.patch_w) < SMALL_PATCH_WARNING:
        print(
            f"warning: finest level patches are {finest.patch_h}x{finest.patch_w} pixels; "
            "tiny patches copy reference content instead of correcting color",
            file=sys.stderr,
        )
    out = hadain_correct(x, y, cfg, threads=args.threads)
    save_image(out, args.out)
    if args.report:
        _write_json(args.report, metric_report(out, x))
    return EXIT_OK


def cmd_simulate(args):
    img = _load(args.input)
    _, h, w = img.shape
    if args.spec_in:
        try:
            spec = ShiftSpec.load(args.spec_in)
        except FileNotFoundError:
            raise HAdaInError(f"{args.spec_in}: no such file") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.spec_in}: invalid JSON: {exc}") from None
    else:
        if args.kind is None or args.seed is None or args.magnitude is None:
            raise UsageError("simulate needs --kind, --seed and --magnitude (or --spec-in)")
        spec = random_spec(args.kind, h, w, args.seed, args.magnitude, grid=args.grid)
    if args.label is not None:
        spec = ShiftSpec(spec.kind, spec.gains, spec.biases, spec.seed, spec.magnitude,
                         RetouchLabel.from_list(args.label))
    save_image(apply_shift(img, spec), args.out)
    if args.spec_out:
        spec.save(args.spec_out)
    return EXIT_OK


def cmd_evaluate(args):
    if (args.grid_level is None) != (args.grid_overlap is None):
        raise UsageError("--grid-level and --grid-overlap must be given together")
    a = _load(args.a)
    b = _load(args.b)
    try:
        check_same_shape(a, b)
    except HAdaInError:
        raise HAdaInError(f"{args.b}: size does not match {args.a}") from None
    grid = None
    if args.grid_level is not None:
        grid = make_grid(a.shape[1], a.shape[2], args.grid_level, args.grid_overlap)
    report = metric_report(a, b, grid)
    _write_json(args.out, report)
    return EXIT_OK


def cmd_sweep(args):
    try:
        plan = load_plan(args.plan)
    except FileNotFoundError:
        raise HAdaInError(f"{args.plan}: no such file") from None
    result = run_sweep(plan, threads=args.threads)
    write_outputs(result, args.out_dir, plan=plan, dump_grids=args.dump_grids)
    sys.stdout.write(format_table(result))
    for err in result.errors:
        print(f"error: {err['entry']}: {err['error']}", file=sys.stderr)
    return EXIT_OK if result.complete else EXIT_RUNTIME


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="hadain", description="Hierarchical AdaIN color correction.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    threads = argparse.ArgumentParser(add_help=False)
    threads.add_argument("--threads", type=_positive_int, default=_threads_default(),
                         help="worker threads; results are identical for any value (default: $HADAIN_THREADS or 1)")

    c = sub.add_parser("correct", parents=[threads], help="correct the colors of a generated image")
    c.add_argument("--reference", required=True, help="image whose colors are trusted")
    c.add_argument("--generated", required=True, help="image to correct")
    c.add_argument("--out", required=True)
    c.add_argument("--levels", type=int, default=DEFAULT_LEVELS, help="hierarchical level L (default 30)")
    c.add_argument("--overlap", type=float, default=DEFAULT_OVERLAP, help="overlap ratio in [0, 1) (default 0.7)")
    c.add_argument("--eps", type=float, default=1e-6, help="std threshold for flat patches")
    c.add_argument("--no-clamp", action="store_true", help="skip the final clamp to [0, 1]")
    c.add_argument("--adain-only", action="store_true", help="global AdaIN, same as --levels 1 --overlap 0")
    c.add_argument("--report", help="write a JSON metric report of output vs reference")
    c.set_defaults(func=cmd_correct)

    s = sub.add_parser("simulate", help="apply a synthetic color shift")
    s.add_argument("--input", required=True)
    s.add_argument("--kind", choices=sorted(KIND_ALIASES) + list(KINDS))
    s.add_argument("--seed", type=int)
    s.add_argument("--magnitude", type=float, help="shift strength in (0, 1]")
    s.add_argument("--grid", type=int, nargs=2, metavar=("ROWS", "COLS"), help="block grid / lattice size")
    s.add_argument("--label", type=int, nargs=3, metavar=("EYE", "FACE", "SMOOTH"),
                   help="retouching degrees stored as metadata")
    s.add_argument("--spec-in", help="apply this saved spec instead of drawing a random one")
    s.add_argument("--out", required=True)
    s.add_argument("--spec-out", help="where to write the spec JSON")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("evaluate", help="compare two images")
    e.add_argument("--a", required=True)
    e.add_argument("--b", required=True)
    e.add_argument("--grid-level", type=int)
    e.add_argument("--grid-overlap", type=float)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_evaluate)

    w = sub.add_parser("sweep", parents=[threads], help="run a (levels, overlap) ablation")
    w.add_argument("--plan", required=True)
    w.add_argument("--out-dir", required=True)
    w.add_argument("--dump-grids", action="store_true", help="also write patch geometry to grids.json")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"hadain {args.command}: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (HAdaInError, OSError) as exc:
        print(f"hadain {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
