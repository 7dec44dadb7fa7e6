"""Gender-independent vowel recognition for every method (table of accuracies).

    python scripts/run_recognition_gi.py --clamp 500 [--hil data/hil.csv]

Writes results/recognition_gi.csv plus one confusion matrix per method. Bayesian
estimation runs a hyperparameter search and a Gibbs chain per speaker, which
takes several minutes on PnB.
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
    ap.add_argument("--clamp", default="500", help="kappa clamp L in Hz for the adjusted methods")
    ap.add_argument("--out-dir", default=str(ROOT / "results"))
    ap.add_argument("--fit-classes-on", default="raw", choices=["raw", "normalized"])
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    argv = ["vowel-eval", "--pnb", args.pnb, "--clamp", args.clamp, "--mode", "gi",
            "--fit-classes-on", args.fit_classes_on,
            "--out", str(out / "recognition_gi.csv"), "--confusion-dir", str(out / "confusion")]
    if args.hil:
        argv += ["--hil", args.hil]
    return cli(argv)


if __name__ == "__main__":
    sys.exit(main())
