"""Nine subject/reference category combinations for each method (bar-chart data).

    python scripts/run_gender_dependent.py --clamp 500 --methods baseline,mse,bayes
"""

import argparse
import sys
from pathlib import Path

from affine_vtln.cli import main as cli

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pnb", default=str(ROOT / "data" / "pnb.csv"))
    ap.add_argument("--hil", default=None)
    ap.add_argument("--clamp", default="500")
    ap.add_argument("--methods", default=None, help="comma list (default all)")
    ap.add_argument("--out", default=str(ROOT / "results" / "gender_dependent.csv"))
    args = ap.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    argv = ["vowel-eval", "--pnb", args.pnb, "--clamp", args.clamp, "--mode", "gd", "--out", args.out]
    if args.hil:
        argv += ["--hil", args.hil]
    if args.methods:
        argv += ["--methods", args.methods]
    return cli(argv)


if __name__ == "__main__":
    sys.exit(main())
