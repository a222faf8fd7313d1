"""How tight is the lattice bound?  Measured proportion over bound for random lattices.

For each dimension, draws random unimodular lattices and unipotent flows,
sweeps eps as a fraction of rho and prints the largest measured/bound ratio.
"""
import argparse

import numpy as np

from qndlab.km_engine import check_km_bound, rho
from qndlab.lattice_geometry import LatticeBasis


def random_lattice(rng, k):
    while True:
        A = rng.normal(size=(k, k))
        d = abs(np.linalg.det(A))
        if d > 0.2:
            return LatticeBasis(A / d ** (1 / k))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    fractions = (0.1, 0.3, 0.6, 0.9)
    print(f"{'k':>2} " + " ".join(f"{f'eps={f}rho':>12}" for f in fractions))
    for k in (2, 3, 4):
        rng = np.random.default_rng([args.seed, k])
        worst = np.zeros(len(fractions))
        for _ in range(args.count):
            lat = random_lattice(rng, k).scaled(float(rng.uniform(0.1, 1.0)))
            N = np.triu(rng.uniform(-1, 1, size=(k, k)), 1)
            B = (0.0, float(rng.uniform(0.5, 3.0)))
            r = rho(lat, N, B)
            for j, f in enumerate(fractions):
                rep = check_km_bound(lat, N, B, f * r.rho, rho_result=r)
                worst[j] = max(worst[j], rep.measured / rep.bound)
        print(f"{k:2d} " + " ".join(f"{w:12.3e}" for w in worst))


if __name__ == "__main__":
    main()
