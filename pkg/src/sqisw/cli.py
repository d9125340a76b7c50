"""Command-line entry point: ``sqisw <subcommand> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 search exhausted without success.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import circuit as circ
from . import matcore as mc
from . import numopt, prune, qsd, synth2q, toffoli, weyl
from .errors import ConvergenceFailure, NonUnitaryError, NotFound

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NOT_FOUND = 0, 1, 2, 3
DEFAULT_TOL = 1e-9


class InputError(Exception):
    """Unreadable or malformed input; maps to exit code 2."""


NAMED = {
    "i2": mc.I2, "x": mc.X, "y": mc.Y, "z": mc.Z, "h": mc.H,
    "cnot": mc.CNOT, "cz": mc.CZ, "swap": mc.SWAP, "iswap": mc.ISWAP, "sqisw": mc.SQISW,
    "b": mc.B_GATE, "toffoli": mc.TOFFOLI,
}


def matrix_to_dict(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"dim": m.shape[0], "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_dict(d, raw: bool = False) -> np.ndarray:
    if not isinstance(d, dict):
        raise InputError("matrix file: top level must be an object with 'dim', 're', 'im'")
    for key in ("dim", "re", "im"):
        if key not in d:
            raise InputError(f"matrix file: missing field '{key}'")
    dim = d["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise InputError("matrix file: field 'dim' must be a positive integer")
    parts = []
    for key in ("re", "im"):
        try:
            a = np.array(d[key], dtype=float)
        except (TypeError, ValueError):
            raise InputError(f"matrix file: field '{key}' must be a {dim}x{dim} array of numbers") from None
        if a.shape != (dim, dim):
            raise InputError(f"matrix file: field '{key}' has shape {a.shape}, expected ({dim}, {dim})")
        if not np.all(np.isfinite(a)):
            raise InputError(f"matrix file: field '{key}' has non-finite entries")
        parts.append(a)
    m = parts[0] + 1j * parts[1]
    if not raw:
        try:
            mc.as_unitary(m)
        except NonUnitaryError as exc:
            raise InputError(f"matrix file: fields 're'/'im' are not unitary ({exc}); pass --raw to skip") from None
    return m


def load_matrix(spec: str, raw: bool = False) -> np.ndarray:
    """A named matrix, ``haar:<n>:<seed>``, or a JSON matrix file."""
    key = spec.lower()
    if key in NAMED:
        return NAMED[key].copy()
    if key.startswith("haar:"):
        parts = key.split(":")
        try:
            _, n, seed = parts
            n, seed = int(n), int(seed)
        except ValueError:
            raise InputError(f"bad random spec {spec!r}; expected haar:<qubits>:<seed>") from None
        if not 1 <= n <= 12:
            raise InputError("haar qubit count must be within 1..12")
        return mc.haar_random_unitary(2 ** n, seed)
    path = Path(spec)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read matrix file {spec!r}: {exc.strerror}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"matrix file {spec!r} is not valid JSON: {exc.msg} at line {exc.lineno}") from None
    return matrix_from_dict(d, raw)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _fmt(v: float) -> str:
    return "0" if abs(v) < 1e-12 else f"{v:.12g}"


# -- subcommands --------------------------------------------------------------

def cmd_weyl(a) -> int:
    u = load_matrix(a.matrix, a.raw)
    if u.shape != (4, 4):
        raise InputError(f"weyl needs a 4x4 matrix, got {u.shape[0]}x{u.shape[1]}")
    k = weyl.interaction_coefficients(u)
    print(" ".join(_fmt(v) for v in k))
    print(f"w_prime {'yes' if weyl.in_w_prime(k) else 'no'}")
    print(f"cost {weyl.cost_of_coefficients(k)}")
    return EXIT_OK


def cmd_synth2(a) -> int:
    u = load_matrix(a.matrix, a.raw)
    if u.shape != (4, 4):
        raise InputError(f"synth2 needs a 4x4 matrix, got {u.shape[0]}x{u.shape[1]}")
    print(f"seed: {a.seed}", file=sys.stderr)
    try:
        res = synth2q.synthesize_two_qubit(u, a.seed, a.tol)
    except ConvergenceFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    err = mc.error_metric(circ.evaluate(res.circuit), u)
    _emit(circ.dumps(res.circuit), a.out)
    print(f"sqisw {res.sqisw_count} error {err:.3e}", file=sys.stderr)
    return EXIT_OK if err <= a.tol else EXIT_VERIFY


def cmd_synth(a) -> int:
    u = load_matrix(a.matrix, a.raw)
    try:
        mc.num_qubits(u.shape[0])
    except mc.DimensionError as exc:
        raise InputError(str(exc)) from None
    if u.shape[0] < 4:
        raise InputError("synth needs at least two qubits")
    opts = qsd.QSDOptions(not a.no_cz_absorb, not a.no_diag_absorb, a.seed, a.tol)
    print(f"seed: {a.seed}", file=sys.stderr)
    try:
        c, ledger = qsd.qsd_synthesize(u, opts)
    except (ConvergenceFailure, ArithmeticError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    err = mc.error_metric(circ.evaluate(c), u)
    report = {"circuit": circ.circuit_to_dict(c), "ledger": asdict(ledger), "residual_error": err}
    _emit(json.dumps(report), a.out)
    print(f"sqisw {ledger.sqisw_used} bound {ledger.bound} error {err:.3e}", file=sys.stderr)
    return EXIT_OK if err <= a.tol and ledger.within_bound() else EXIT_VERIFY


def cmd_toffoli(a) -> int:
    theta = toffoli.SOLUTION if a.theta is None else a.theta
    scheme = toffoli.build_toffoli_scheme(theta)
    if a.emit == "qasm":
        print(circ.to_qasm(scheme.circuit), end="")
    elif a.emit == "json":
        print(circ.dumps(scheme.circuit))
    else:
        print(f"theta1 {scheme.theta1!r} theta2 {scheme.theta2!r} theta3 {scheme.theta3!r}")
        print(f"structure {' '.join(f'({i},{j})' for i, j in toffoli.STRUCTURE)}")
        print(f"sqisw {scheme.circuit.count()}")
    if not a.verify:
        return EXIT_OK
    res = toffoli.exactness_residual(theta)
    rep = toffoli.verify_entry_formulas(theta)
    err = mc.error_metric(scheme.unitary(), mc.TOFFOLI)
    out = sys.stderr if a.emit else sys.stdout
    print(f"residual {res:.3e}", file=out)
    print(f"error {err:.3e}", file=out)
    print(f"entry formulas {rep.formula_residual:.3e} partners {rep.partner_residual:.3e} "
          f"off-pattern {rep.leakage_residual:.3e}", file=out)
    ok = res <= 1e-12 and rep.max_residual <= 1e-10
    print("verified" if ok else "NOT verified", file=out)
    return EXIT_OK if ok else EXIT_VERIFY


def _search_cfg(a) -> numopt.OptimizerConfig:
    return numopt.OptimizerConfig(restarts=a.restarts, max_iterations=a.max_iterations,
                                  epsilon=a.epsilon, seed=a.seed,
                                  haar_samples=getattr(a, "samples", 100), threads=a.threads)


def _run_search(a, fn) -> int:
    cfg = _search_cfg(a)
    print(f"seed: {cfg.seed}", file=sys.stderr)
    sink = open(a.report, "w") if a.report else sys.stdout
    try:
        try:
            report = fn(a.min_gates, a.max_gates, cfg,
                        progress=lambda rec: print(rec.to_json(), file=sink, flush=True))
            code = EXIT_OK
        except NotFound as exc:
            report, code = exc.args[0], EXIT_NOT_FOUND
    finally:
        if a.report:
            sink.close()
    print(report.table(), file=sys.stderr)
    if report.found is not None:
        f = report.found
        print(f"found N={f.n_gates} structure={list(f.structure)} E={f.best_error:.3e}", file=sys.stderr)
    else:
        print("not found", file=sys.stderr)
    return code


def cmd_search_toffoli(a) -> int:
    return _run_search(a, numopt.toffoli_search)


def cmd_search_3q(a) -> int:
    return _run_search(a, numopt.average_error_search)


def cmd_census(a) -> int:
    ns = list(range(1, a.max_n + 1))
    with ThreadPoolExecutor(a.threads) as pool:
        rows = list(pool.map(prune.closure_census, ns))
    head = f"{'N':>3} {'3^N':>9} {'pruned':>8} {'c3':>3} {'c6':>6} {'c12':>8}"
    if a.compare_formula:
        head += f" {'statement':>11} {'proof':>11} {'stmt':>5} {'proof':>5}"
    print(head)
    ok = True
    for n, c in zip(ns, rows):
        ok &= c.covers_space()
        line = f"{n:3d} {3 ** n:9d} {c.pruned_size:8d} {c.count3:3d} {c.count6:6d} {c.count12:8d}"
        if a.compare_formula:
            st, pr = (prune.theorem3_prediction(n, v) for v in (prune.STATEMENT, prune.PROOF))
            line += (f" {float(st):11.2f} {float(pr):11.2f}"
                     f" {'yes' if st == c.pruned_size else 'NO':>5} {'yes' if pr == c.pruned_size else 'NO':>5}")
        print(line)
    if a.compare_formula:
        print("note: the statement formula disagrees with the census for odd N; the proof's odd-N term matches")
    return EXIT_OK if ok else EXIT_VERIFY


# -- parser -----------------------------------------------------------------

def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sqisw", description="Circuit synthesis with SQiSW gates.")
    sub = p.add_subparsers(dest="command", required=True)

    def matrix_cmd(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("matrix", help="JSON matrix file, a named gate, or haar:<n>:<seed>")
        s.add_argument("--raw", action="store_true", help="skip the unitarity check on input")
        return s

    s = matrix_cmd("weyl", "interaction coefficients and SQiSW cost of a 2-qubit gate")
    s.set_defaults(fn=cmd_weyl)

    for name, fn, help_ in (("synth2", cmd_synth2, "2-qubit synthesis with the minimal SQiSW count"),
                            ("synth", cmd_synth, "n-qubit synthesis by Shannon decomposition")):
        s = matrix_cmd(name, help_)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL)
        s.add_argument("--out", help="write the circuit JSON here instead of stdout")
        if name == "synth":
            s.add_argument("--no-cz-absorb", action="store_true")
            s.add_argument("--no-diag-absorb", action="store_true")
        s.set_defaults(fn=fn)

    s = sub.add_parser("toffoli", help="the 8-SQiSW Toffoli scheme")
    s.add_argument("--emit", choices=("qasm", "json"))
    s.add_argument("--verify", action="store_true")
    s.add_argument("--theta", type=float, help="theta1 in radians (default: the exact solution)")
    s.set_defaults(fn=cmd_toffoli)

    for name, fn in (("search-toffoli", cmd_search_toffoli), ("search-3q", cmd_search_3q)):
        s = sub.add_parser(name, help="numerical structure search")
        s.add_argument("--max-gates", type=_positive_int, required=True)
        s.add_argument("--min-gates", type=_positive_int, default=5)
        s.add_argument("--restarts", type=_positive_int, default=10)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--threads", type=_positive_int, default=1)
        s.add_argument("--epsilon", type=_positive_float, default=1e-6)
        s.add_argument("--max-iterations", type=_positive_int, default=3000)
        s.add_argument("--report", help="write JSON lines here instead of stdout")
        if name == "search-3q":
            s.add_argument("--samples", type=_positive_int, required=True)
        s.set_defaults(fn=fn)

    s = sub.add_parser("census", help="closure census of 3-qubit structures")
    s.add_argument("--max-N", dest="max_n", type=_positive_int, required=True)
    s.add_argument("--compare-formula", action="store_true")
    s.add_argument("--threads", type=_positive_int, default=1)
    s.set_defaults(fn=cmd_census)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if getattr(a, "min_gates", 1) > getattr(a, "max_gates", 1):
        print("sqisw: error: --min-gates exceeds --max-gates", file=sys.stderr)
        return EXIT_USAGE
    try:
        return a.fn(a)
    except InputError as exc:
        print(f"sqisw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MemoryError as exc:
        print(f"sqisw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
