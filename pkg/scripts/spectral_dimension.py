"""Classical return probability at one stage, fitted over several windows.

    python3 scripts/spectral_dimension.py --stage 7 --steps 20000

Log-periodic wiggles on the carpet make d_s depend somewhat on the window;
this prints the spread.
"""

import argparse

from fracsearch.analysis import fit_series, spectral_dimension_from_fit
from fracsearch.classical import ClassicalConfig, return_series
from fracsearch.lattice import build_lattice

WINDOWS = [(100, 10_000), (300, 3_000), (1_000, 10_000), (100, 1_000)]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--stage", type=int, default=6)
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--rule", default="stay", choices=["stay", "neighbor"])
    ap.add_argument("--method", default="exact", choices=["exact", "mc"])
    ap.add_argument("--walkers", type=int, default=1_000_000)
    args = ap.parse_args()

    cfg = ClassicalConfig(args.stage, args.steps, method=args.method, walkers=args.walkers, rule=args.rule)
    series = return_series(cfg, build_lattice(args.stage, (0, 0)))
    for lo, hi in WINDOWS:
        if hi > args.steps:
            continue
        d_s, err = spectral_dimension_from_fit(fit_series(series, lo, hi))
        print(f"window [{lo:>5}, {hi:>6}]  d_s = {d_s:.4f} +/- {err:.4f}")


if __name__ == "__main__":
    main()
