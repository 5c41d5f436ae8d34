"""Ablation over (L, gamma) on a synthetic corpus, mirroring the cells of the original table.

    python scripts/run_ablation.py --kind smooth --fixtures 5 --seeds 1 2 --out-dir runs/ablation
"""

import argparse
import time

from hadain.sweep import default_plan, format_table, run_sweep, write_outputs


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--kind", default="smooth", help="global | block | smooth")
    p.add_argument("--fixtures", type=int, default=5)
    p.add_argument("--seeds", type=int, nargs="+", default=[1, 2])
    p.add_argument("--magnitude", type=float, default=0.5)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out-dir", default="runs/ablation")
    args = p.parse_args()

    plan = default_plan(args.fixtures, args.seeds, args.kind, args.magnitude, args.size)
    t0 = time.perf_counter()
    result = run_sweep(plan, threads=args.threads)
    write_outputs(result, args.out_dir, plan=plan, dump_grids=True)
    print(format_table(result), end="")
    print(f"{len(result.entries)} images x {len(result.cells)} cells in {time.perf_counter() - t0:.1f} s"
          f" -> {args.out_dir}")


if __name__ == "__main__":
    main()
