"""Write the Peterson-Barney vowel table in the common formant CSV layout.

Praat ships the 1952 table; praat-parselmouth exposes it from Python
(``pip install praat-parselmouth``). Each speaker said every vowel twice,
so the repetition column counts 1 and 2 in file order.

    python scripts/convert_pnb_praat.py data/pnb.csv
"""

import argparse
import collections

from parselmouth.praat import call

CATEGORY = {"m": "M", "w": "F", "c": "C"}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", help="output CSV path")
    args = ap.parse_args()
    table = call("Create formant table (Peterson & Barney 1952)")
    rows = int(call(table, "Get number of rows"))
    seen = collections.Counter()
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("speaker_id,category,vowel,repetition,F1,F2,F3\n")
        for i in range(1, rows + 1):
            kind, speaker, vowel, f1, f2, f3 = (call(table, "Get value", i, c)
                                                for c in ("Type", "Speaker", "Vowel", "F1", "F2", "F3"))
            seen[(speaker, vowel)] += 1
            fh.write(f"pb{int(speaker):02d},{CATEGORY[kind]},{vowel},{seen[(speaker, vowel)]},{f1},{f2},{f3}\n")
    print(f"wrote {rows} rows to {args.out}")


if __name__ == "__main__":
    main()
