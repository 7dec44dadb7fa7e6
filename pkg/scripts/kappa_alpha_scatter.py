"""Pairwise kappa_ij against alpha_ij from least-squares pair fits.

Shows how kappa_ij scatters as alpha_ij approaches 1.

    python scripts/kappa_alpha_scatter.py [--criterion mae] [--png]
"""

import argparse
from pathlib import Path

import numpy as np

from affine_vtln.classical import estimate_all_pairs
from affine_vtln.data_io import build_formant_vectors, load_database

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", default=str(ROOT / "data" / "pnb.csv"))
    ap.add_argument("--criterion", default="mse", choices=["mse", "mae"])
    ap.add_argument("--out", default=str(ROOT / "results" / "kappa_vs_alpha.csv"))
    ap.add_argument("--png", action="store_true", help="also draw the scatter (needs matplotlib)")
    args = ap.parse_args()
    vecs = build_formant_vectors(load_database(args.data, "pnb").complete_speakers())
    pairs = estimate_all_pairs(vecs, vecs, args.criterion)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(f"# kappa_ij against alpha_ij, {args.criterion} pair fits on {args.data}\n")
        fh.write("subject,reference,alpha_ij,kappa_ij,kappa_unreliable\n")
        for pe in pairs:
            fh.write(f"{pe.subject_id},{pe.reference_id},{pe.alpha_ij!r},{pe.kappa_ij!r},{int(pe.kappa_unreliable)}\n")
    a = np.array([p.alpha_ij for p in pairs])
    k = np.array([p.kappa_ij for p in pairs])
    for lo, hi in ((0.0, 0.02), (0.02, 0.05), (0.05, 0.1), (0.1, np.inf)):
        sel = k[(np.abs(a - 1) >= lo) & (np.abs(a - 1) < hi)]
        if sel.size:
            q1, q3 = np.percentile(sel, [25, 75])
            print(f"|alpha-1| in [{lo}, {hi}): {sel.size:5d} pairs, kappa IQR {q3 - q1:10.1f} Hz")
    if args.png:
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 4))
        ax.scatter(a, k, s=3)
        ax.set_xlabel("alpha_ij")
        ax.set_ylabel("kappa_ij (Hz)")
        ax.set_ylim(np.percentile(k, [1, 99]))
        fig.tight_layout()
        fig.savefig(out.with_suffix(".png"), dpi=150)
    print(f"wrote {len(pairs)} pairs to {out}")


if __name__ == "__main__":
    main()
