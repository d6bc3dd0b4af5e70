"""Noise-robustness sweep: mean relative error of C_43 over blur size and SNR, printed as CSV."""

import argparse
import csv
import sys

from blurinv.experiments import mre_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    w = csv.writer(sys.stdout)
    w.writerow(["blur_size", "snr_db", "mre"])
    for row in mre_sweep(size=a.size, trials=a.trials, seed=a.seed):
        w.writerow([row.blur_size, row.snr_db, f"{row.mre:.6g}"])


if __name__ == "__main__":
    main()
