"""SQiSW counts from QSD against the implemented bound and the closed-form reference."""
import argparse
import time

import numpy as np

from sqisw import matcore as mc
from sqisw import qsd
from sqisw.circuit import evaluate


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max-qubits", type=int, default=4)
    p.add_argument("--instances", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args()

    rng = np.random.default_rng(a.seed)
    variants = {"both": qsd.QSDOptions(), "no-cz": qsd.QSDOptions(cz_absorption=False),
                "no-diag": qsd.QSDOptions(diagonal_absorption=False),
                "none": qsd.QSDOptions(False, False)}
    print(f"{'n':>2} {'variant':>8} {'min':>5} {'max':>5} {'bound':>6} {'worst E':>9} {'s/inst':>7}")
    for n in range(2, a.max_qubits + 1):
        us = [mc.haar_random_unitary(2 ** n, rng) for _ in range(a.instances)]
        for name, opts in variants.items():
            t = time.perf_counter()
            counts, errs = [], []
            for u in us:
                c, ledger = qsd.qsd_synthesize(u, opts)
                counts.append(ledger.sqisw_used)
                errs.append(mc.error_metric(evaluate(c), u))
            dt = (time.perf_counter() - t) / a.instances
            print(f"{n:2d} {name:>8} {min(counts):5d} {max(counts):5d} {ledger.bound:6d} {max(errs):9.1e} {dt:7.2f}")
    for n in range(3, a.max_qubits + 1):
        print(f"closed-form reference n={n}: {qsd.paper_bound(n)}; recursion without absorption: "
              f"{qsd.recursion_bound(n)}")


if __name__ == "__main__":
    main()
