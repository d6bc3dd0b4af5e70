"""Shift and rotation registration of differently blurred synthetic frames."""

import argparse
import math

from blurinv import RADIAL, register_shift, register_shift_rotation
from blurinv.synth import registration_pairs


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=25)
    ap.add_argument("--rotation-deg", type=float, default=5.0)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    good = 0
    for p in registration_pairs(a.pairs, seed=a.seed):
        res = register_shift(p.reference, p.moving, RADIAL)
        good += abs(res.dx - p.shift[0]) <= 1 and abs(res.dy - p.shift[1]) <= 1
    print(f"shift within 1 px: {good}/{a.pairs}")
    errs = []
    for p in registration_pairs(a.pairs, rotation_deg=a.rotation_deg, seed=a.seed + 1):
        res = register_shift_rotation(p.reference, p.moving, RADIAL)
        errs.append(abs(math.degrees(res.theta) - a.rotation_deg))
    print(f"rotation {a.rotation_deg} deg: max error {max(errs):.2f} deg, within 1 deg {sum(e <= 1 for e in errs)}/{len(errs)}")


if __name__ == "__main__":
    main()
