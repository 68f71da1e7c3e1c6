"""Hofstadter butterfly data: hull spectra of the almost Mathieu operator over a Farey grid.

Writes ``t,lo,hi`` rows (one per band) for plotting.

    python scripts/butterfly.py --qmax 40 --mu 1.0 --out butterfly.csv
"""

import argparse
import csv
import sys
import time

from specfield.analysis import fmt_param
from specfield.models import almost_mathieu, farey
from specfield.operators import spectrum


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qmax", type=int, default=30)
    ap.add_argument("--mu", type=float, default=1.0)
    ap.add_argument("--out", default="butterfly.csv")
    args = ap.parse_args()

    start = time.perf_counter()
    grid = farey(0, 1, args.qmax)
    n_bands = 0
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "lo", "hi"])
        for t in grid:
            F = spectrum(almost_mathieu(args.mu, None, t))
            for lo, hi in F.intervals:
                w.writerow([fmt_param(t), repr(lo), repr(hi)])
            n_bands += len(F)
    print(f"{len(grid)} rationals, {n_bands} bands -> {args.out} ({time.perf_counter() - start:.1f} s)", file=sys.stderr)


if __name__ == "__main__":
    main()
