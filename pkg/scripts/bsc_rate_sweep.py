"""Rate versus average blocklength on BSC(0.11) at epsilon = 1e-3.

Compares the simulated SED encoder against the refined BSC bound, the BAC
bound, the two-stage bound, Naghshvar et al.'s bound and the converse.

    python3 scripts/bsc_rate_sweep.py --kmax 12 --trials 100000 -o results/bsc.csv
"""

import argparse
import csv
import sys
from pathlib import Path

from sedvlf.cli import run

COLS = ["bound_thm6", "bound_thm3", "bound_cor1", "bound_thm1", "converse"]
LABELS = ["thm6", "thm3", "cor1", "thm1", "converse"]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--kmax", type=int, default=12)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("-o", "--output", default="results/bsc.csv")
    args = ap.parse_args(argv)

    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    status = run(["sweep", "--p0", "0.11", "--p1", "0.11", "--k", f"1..{args.kmax}",
                  "--epsilon", "1e-3", "--trials", str(args.trials), "--seed", str(args.seed),
                  "-o", str(out)])
    if status:
        return status
    print(f"{'k':>3} {'E[tau]':>9} {'rate':>7} " + " ".join(f"{c:>8}" for c in LABELS))
    with out.open() as fh:
        for row in csv.DictReader(fh):
            k = int(row["k"])
            rates = " ".join(f"{k / float(row[c]):>8.4f}" for c in COLS)
            print(f"{k:>3} {float(row['avg_tau']):>9.3f} {float(row['rate']):>7.4f} {rates}")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
