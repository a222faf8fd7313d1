"""Bad sets of long horocycles on SL(2, Z) against the closed-form cusp excursions.

Through diag(s, 1/s) the horocycle enters the cusp near multiples of s^2 with
half-width sqrt(delta s^2 / 2 - 1).  The excursion near k s^2 is produced
by a conjugate of a word of length 2k + 1, so the word radius grows with
T / s^2.  Prints computed and predicted measures for a range of s^2.
"""
import argparse
import math

import numpy as np

from qndlab.catalog import sl2z
from qndlab.flow_lab import TrajectorySpec, bad_set
from qndlab.lie_core import algebra


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--T", type=float, default=100.0)
    args = p.parse_args()
    E = algebra("sl2r").named("E")
    print(f"{'s^2':>6} {'measure':>12} {'predicted':>12} {'components':>10} {'radius':>6}")
    for s2 in (25.0, 40.0, 60.0, 90.0):
        s = math.sqrt(s2)
        tr = TrajectorySpec(E, np.diag([s, 1 / s]), args.T, args.delta, allow_large_delta=True)
        radius = 2 * math.ceil(args.T / s2) + 1
        res = bad_set(sl2z(radius), tr)
        w2 = args.delta * s2 / 2 - 1
        w = math.sqrt(w2) if w2 > 0 else 0.0
        centres = np.arange(0.0, args.T + w + s2, s2)
        pred = sum(max(0.0, min(c + w, args.T) - max(c - w, 0.0)) for c in centres)
        print(f"{s2:6.1f} {res.measure:12.6f} {pred:12.6f} {len(res.intervals):10d} {radius:6d}")


if __name__ == "__main__":
    main()
