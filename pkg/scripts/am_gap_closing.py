"""Width of the central almost Mathieu gap as t approaches 1/2, and its power law.

    python scripts/am_gap_closing.py --qmax 96 --mu 1.0
"""

import argparse
from fractions import Fraction

from specfield.analysis import fit_loglog, log_abs, sweep, track_gaps
from specfield.models import OperatorField, ParameterSpace, almost_mathieu


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qmin", type=int, default=16)
    ap.add_argument("--qmax", type=int, default=64)
    ap.add_argument("--qstep", type=int, default=4)
    ap.add_argument("--mu", type=float, default=1.0)
    args = ap.parse_args()

    half = Fraction(1, 2)
    left = [half - Fraction(1, 2 * q) for q in range(args.qmin, args.qmax + 1, args.qstep)]
    grid = ParameterSpace(tuple(left) + (half,))
    fld = OperatorField(lambda t: almost_mathieu(args.mu, None, t))
    trace = sweep(fld, grid, merge_tol=1e-8)
    tracks = track_gaps(trace)
    central = [tr for tr in tracks if tr.status == "closed" and abs(float(tr.tip[1])) < 1e-3]
    if not central:
        raise SystemExit("no central gap closing at t = 1/2 on this grid")
    tr = max(central, key=lambda tr: len(tr.samples))

    print(f"{'t':>10}  {'|t - 1/2|':>12}  {'width':>12}  {'center':>12}")
    for _, t, g in tr.samples:
        print(f"{str(t):>10}  {float(abs(t - half)):12.5e}  {float(g.width):12.5e}  {float(g.center):12.4e}")
    est = fit_loglog([grid.log_distance(t, half) for _, t, _ in tr.samples], [log_abs(g.width) for _, _, g in tr.samples])
    print(f"tip c = {float(tr.tip[1]):.3e}; width ~ {est.C:.4g} |t - 1/2|^{est.alpha:.4f} (r^2 = {est.r_squared:.5f})")


if __name__ == "__main__":
    main()
