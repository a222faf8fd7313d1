"""Bad set of a diagonal Sanov trajectory in SL(2,R) x SL(2,R) next to its factors.

Shows that the product bad set is the intersection of the factor bad sets and
can be strictly smaller than either when the cusp excursions are offset.
"""
import argparse
import math

import numpy as np

from qndlab.catalog import sanov, sanov_diagonal
from qndlab.flow_lab import TrajectorySpec, bad_set, product_bad_set, product_trajectory
from qndlab.lie_core import algebra


def horocycle(s2, shift, T, delta):
    E = algebra("sl2r").named("E")
    s = math.sqrt(s2)
    g = np.array([[1.0, -shift], [0.0, 1.0]]) @ np.diag([s, 1 / s])
    return TrajectorySpec(E, g, T, delta, allow_large_delta=True)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--delta", type=float, default=0.4)
    p.add_argument("--T", type=float, default=10.0)
    args = p.parse_args()
    for shift2 in (5.0, 5.25, 5.5, 6.0, 7.0):
        trs = [horocycle(20.0, 5.0, args.T, args.delta), horocycle(20.0 * 89 / 55, shift2, args.T, args.delta)]
        singles = [bad_set(sanov(), t).intervals for t in trs]
        prod = product_bad_set(sanov_diagonal(), product_trajectory(trs)).intervals
        print(f"shift {shift2:4.2f}: factors {singles[0].measure:.4f}, {singles[1].measure:.4f}; "
              f"product {prod.measure:.4f} {prod.to_list()}")


if __name__ == "__main__":
    main()
