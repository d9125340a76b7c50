"""Haar mass of the two-SQiSW region and the cost histogram."""
import argparse

import numpy as np

from sqisw import matcore as mc
from sqisw import weyl


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args()

    rng = np.random.default_rng(a.seed)
    costs = np.array([weyl.sqisw_cost(mc.haar_random_unitary(4, rng)) for _ in range(a.samples)])
    hist = np.bincount(costs, minlength=4)
    f = hist[:3].sum() / a.samples
    se = np.sqrt(f * (1 - f) / a.samples)
    print(f"cost histogram {hist.tolist()}")
    print(f"fraction with cost <= 2: {f:.4f} +- {se:.4f}")


if __name__ == "__main__":
    main()
