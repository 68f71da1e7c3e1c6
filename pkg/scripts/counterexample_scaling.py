"""Measured exponents of the slow-closing family for several kappa.

The width exponent should follow alpha / (2 kappa) and the Hausdorff exponent alpha / 2.

    python scripts/counterexample_scaling.py --kappas 2 2.5 3 --N 10
"""

import argparse

from specfield.analysis import fit_loglog, log_abs
from specfield.hyperspace import gaps, hausdorff
from specfield.models import INF, CounterexampleConfig, counterexample_family


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kappas", type=float, nargs="+", default=[2.0, 2.5, 3.0])
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--N", type=int, default=10)
    args = ap.parse_args()

    print(f"{'kappa':>6}  {'width exp':>10}  {'predicted':>10}  {'d_H exp':>9}  {'predicted':>10}")
    for kappa in args.kappas:
        cfg = CounterexampleConfig(kappa=kappa, alpha=args.alpha, N=args.N)
        try:
            fam = counterexample_family(cfg)
        except ValueError as exc:
            print(f"{kappa:6.2f}  skipped: {exc}")
            continue
        sp = cfg.space()
        widths = [g.width for g in gaps(fam[INF])]
        w = fit_loglog([sp.log_distance(n, INF) for n in range(1, cfg.N + 1)], [log_abs(x) for x in widths])
        h = fit_loglog([sp.log_distance(n, INF) for n in range(cfg.N)], [log_abs(hausdorff(fam[n], fam[INF])) for n in range(cfg.N)])
        print(f"{kappa:6.2f}  {w.alpha:10.4f}  {args.alpha / (2 * kappa):10.4f}  {h.alpha:9.4f}  {args.alpha / 2:10.4f}")


if __name__ == "__main__":
    main()
