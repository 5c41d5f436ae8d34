"""Time hadain_correct at the default operating point (L=30, gamma=0.7)."""

import argparse
import statistics
import time

from hadain.hadain import HAdaInConfig, hadain_correct, total_patches
from hadain.shift_sim import apply_shift, fixture_image, random_spec


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--levels", type=int, default=30)
    p.add_argument("--overlap", type=float, default=0.7)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    x = fixture_image(0, args.size, args.size)
    y = apply_shift(x, random_spec("smooth", args.size, args.size, 1, 0.8))
    cfg = HAdaInConfig(args.levels, args.overlap)
    times = []
    for _ in range(args.repeat):
        t0 = time.perf_counter()
        hadain_correct(x, y, cfg, threads=args.threads)
        times.append(time.perf_counter() - t0)
    n = total_patches(cfg, args.size, args.size)
    print(f"{args.size}x{args.size} L={args.levels} gamma={args.overlap}: {n} patches, "
          f"median {statistics.median(times):.2f} s over {args.repeat} runs (threads={args.threads})")


if __name__ == "__main__":
    main()
