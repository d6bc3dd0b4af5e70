"""Nearest-neighbour recognition accuracy on the synthetic 10-class corpus."""

import argparse

from blurinv import CENTRO, Gallery, classify_nn
from blurinv.synth import recognition_corpus

SETTINGS = [("disk 5-15 px, SNR 50", dict(blur_diameters=(5, 15), snr_db=50.0)),
            ("disk 31 px, SNR 5", dict(blur_diameters=(31, 31), snr_db=5.0))]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--r", type=int, default=7)
    a = ap.parse_args()
    for seed in a.seeds:
        for name, kw in SETTINGS:
            c = recognition_corpus(seed=seed, **kw)
            g = Gallery.build(c.gallery, CENTRO, a.r, c.L)
            preds = [classify_nn(g, q, CENTRO, a.r, c.L) for q in c.queries]
            acc = sum(p.label == t for p, t in zip(preds, c.truth)) / len(preds)
            print(f"seed {seed}  {name:22s} accuracy {acc:.0%}")


if __name__ == "__main__":
    main()
