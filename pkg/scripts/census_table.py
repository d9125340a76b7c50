"""Closure census for N = 1..max and both closed forms of the pruned-space size."""
import argparse

from sqisw import prune


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max-N", dest="max_n", type=int, default=12)
    a = p.parse_args()

    print(f"{'N':>3} {'3^N':>9} {'c3':>3} {'c6':>6} {'c12':>8} {'pruned':>8} {'statement':>11} {'proof':>11}")
    for n in range(1, a.max_n + 1):
        c = prune.closure_census(n)
        assert c.covers_space() and c == prune.predicted_census(n)
        st = prune.theorem3_prediction(n, prune.STATEMENT)
        pf = prune.theorem3_prediction(n, prune.PROOF)
        print(f"{n:3d} {3 ** n:9d} {c.count3:3d} {c.count6:6d} {c.count12:8d} {c.pruned_size:8d} "
              f"{float(st):11.1f} {float(pf):11.1f}")


if __name__ == "__main__":
    main()
