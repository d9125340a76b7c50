"""Mean best-of-restarts error over Haar 3-qubit targets per gate count."""
import argparse

from sqisw import numopt
from sqisw.errors import NotFound


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--min-gates", type=int, default=5)
    p.add_argument("--max-gates", type=int, default=6)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    a = p.parse_args()

    cfg = numopt.OptimizerConfig(restarts=a.restarts, seed=a.seed, haar_samples=a.samples,
                                 threads=a.threads)
    try:
        rep = numopt.average_error_search(a.min_gates, a.max_gates, cfg)
    except NotFound as exc:
        rep = exc.args[0]
    print(rep.table())


if __name__ == "__main__":
    main()
