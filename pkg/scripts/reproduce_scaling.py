"""Run the full search pipeline and print the scaling fits.

    python3 scripts/reproduce_scaling.py --stages 1-5 --out runs/desk
    python3 scripts/reproduce_scaling.py --stages 1-7 --classical-stage 7 --out runs/long

Stages above 6 need several GiB and hours; check memory first.
"""

import argparse
import json
from pathlib import Path

from fracsearch.cli import parse_stages
from fracsearch.pipeline import ClassicalSpec, PipelineSpec, run_pipeline


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--stages", default="1-5")
    ap.add_argument("--classical-stage", type=int, default=6)
    ap.add_argument("--classical-steps", type=int, default=20_000)
    ap.add_argument("--marked", default=None, help="hole (default), corner, or i,j")
    ap.add_argument("--out", type=Path, default=Path("runs/scaling"))
    ap.add_argument("--force", action="store_true")
    args = ap.parse_args()

    spec = PipelineSpec(
        stages=parse_stages(args.stages),
        out=args.out,
        marked=args.marked,
        classical=ClassicalSpec(stage=args.classical_stage, steps=args.classical_steps),
        force=args.force,
    )
    summary = run_pipeline(spec, quiet=False)
    print(f"{'S':>2} {'N':>9} {'steps':>7} {'Q':>9} {'P':>8}")
    for r in summary["stages"]:
        print(f"{r['stage']:>2} {r['N']:>9} {r['steps']:>7} {r['period']['period_Q']:>9.2f} "
              f"{r['mean_peak_probability']:>8.4f}")
    print("Q fit:", summary["q_fit"]["prefactor_str"], "N^", summary["q_fit"]["exponent_str"])
    print("P fit:", summary["p_fit"]["prefactor_str"], "N^", summary["p_fit"]["exponent_str"])
    print("d_s:", round(summary["classical"]["d_s"], 4))
    print(json.dumps(summary["hypothesis"], indent=2))


if __name__ == "__main__":
    main()
