"""Run ``specfield verify`` on every built-in preset and summarise the exit codes.

    python scripts/verify_presets.py --out out/presets
"""

import argparse
import json
import time
from pathlib import Path

from specfield.cli import main as cli_main
from specfield.presets import PRESETS


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/presets")
    args = ap.parse_args()

    worst = 0
    for name in sorted(PRESETS):
        start = time.perf_counter()
        code = cli_main(["verify", "--preset", name, "--out", args.out, "--quiet"])
        rep = json.loads((Path(args.out) / f"{PRESETS[name]['output']['prefix']}_verify.json").read_text())
        print(f"{name:16s} exit {code}  violations {rep['n_violations']:3d}  ({time.perf_counter() - start:.1f} s)")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
