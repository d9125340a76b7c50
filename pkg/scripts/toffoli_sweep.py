"""Best Toffoli error per gate count over the pruned structure space."""
import argparse
import sys
import time

from sqisw import numopt
from sqisw.errors import NotFound


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--min-gates", type=int, default=5)
    p.add_argument("--max-gates", type=int, default=7)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--report", help="JSON lines output")
    a = p.parse_args()

    cfg = numopt.OptimizerConfig(restarts=a.restarts, seed=a.seed, threads=a.threads)
    t = time.perf_counter()
    try:
        rep = numopt.toffoli_search(a.min_gates, a.max_gates, cfg)
        found = rep.found
    except NotFound as exc:
        rep, found = exc.args[0], None
    print(rep.table())
    if found:
        print(f"found N={found.n_gates} {list(found.structure)} E={found.best_error:.3e}")
    else:
        print("no structure reached epsilon")
    print(f"{time.perf_counter() - t:.1f} s", file=sys.stderr)
    if a.report:
        with open(a.report, "w") as fh:
            fh.write(rep.json_lines() + "\n")


if __name__ == "__main__":
    main()
