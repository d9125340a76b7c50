"""Exact two-qubit synthesis over SQiSW plus single-qubit gates.

The template is fixed by :func:`weyl.sqisw_cost`. Only the interior
single-qubit layers are searched: they are tuned until the SQiSW core has the
target's local invariants, after which the outer layers follow in closed form
from the two KAK decompositions.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import least_squares

from . import matcore as mc
from . import weyl
from .circuit import Circuit, evaluate, sqisw, u1, u1_matrix, u1_with_grads, zyz_decompose
from .errors import ConvergenceFailure

RESTARTS = 32
MAX_ITERATIONS = 2000
TOL = 1e-9
EXACT = 1e-12


@dataclass(frozen=True)
class TwoQubitSynthesis:
    circuit: Circuit
    sqisw_count: int
    residual_error: float


@dataclass(frozen=True)
class DiagonalRemainderSynthesis:
    circuit: Circuit
    delta: np.ndarray
    residual_error: float

    def reconstruct(self) -> np.ndarray:
        # delta is applied after the circuit
        return self.delta @ evaluate(self.circuit)


def makhlin_invariants(u: np.ndarray) -> np.ndarray:
    """(Re G1, Im G1, G2); equal exactly for locally equivalent gates."""
    ub = weyl.MAGIC_DAG @ u @ weyl.MAGIC
    m = ub.T @ ub
    det = np.linalg.det(u)
    tr = np.trace(m)
    g1 = tr * tr / (16 * det)
    g2 = (tr * tr - np.trace(m @ m)) / (4 * det)
    return np.array([g1.real, g1.imag, g2.real, g2.imag])


def _core(interior: np.ndarray) -> np.ndarray:
    """S · L_{c-1} · S ··· L_1 · S as a matrix; ``interior`` holds 6 angles per layer."""
    v = mc.SQISW
    for layer in interior.reshape(-1, 6):
        v = mc.SQISW @ np.kron(u1_matrix(*layer[:3]), u1_matrix(*layer[3:])) @ v
    return v


def _assemble(interior: np.ndarray, target: np.ndarray) -> tuple[list, np.ndarray]:
    """Layers (first to last) of 2x2 pairs wrapping the core onto ``target``."""
    core = _core(interior)
    ku, kv = weyl.kak_decompose(target), weyl.kak_decompose(core)
    first = (kv.b0.conj().T @ ku.b0, kv.b1.conj().T @ ku.b1)
    last = (ku.a0 @ kv.a0.conj().T, ku.a1 @ kv.a1.conj().T)
    mids = [(u1_matrix(*layer[:3]), u1_matrix(*layer[3:])) for layer in interior.reshape(-1, 6)]
    return [first, *mids, last], core


def _template_circuit(layers: list) -> Circuit:
    gates = []
    for n, (p, q) in enumerate(layers):
        if n:
            gates.append(sqisw(0, 1))
        gates += [u1(0, *zyz_decompose(p)[:3]), u1(1, *zyz_decompose(q)[:3])]
    return Circuit(2, gates)


def _with_phase(c: Circuit, target: np.ndarray) -> Circuit:
    phase = c.global_phase + float(np.angle(np.vdot(evaluate(c), target)))
    return Circuit(c.n_qubits, c.gates, phase)


def template_value_and_jac(x: np.ndarray) -> tuple[np.ndarray, list]:
    """Template matrix ``e^{i x[-1]} L_c S ··· S L_0`` and its partials.

    ``x`` holds six ZYZ angles per layer (qubit 0 then qubit 1) followed by a phase.
    """
    layers = x[:-1].reshape(-1, 6)
    mats, ders = [], []
    for layer in layers:
        m0, d0 = u1_with_grads(*layer[:3])
        m1, d1 = u1_with_grads(*layer[3:])
        mats.append(np.kron(m0, m1))
        ders.append([np.kron(d, m1) for d in d0] + [np.kron(m0, d) for d in d1])
    ops = []
    for n, m in enumerate(mats):
        if n:
            ops.append(mc.SQISW)
        ops.append(m)
    before = [np.eye(4, dtype=complex)]
    for o in ops:
        before.append(o @ before[-1])
    after = [np.eye(4, dtype=complex)]
    for o in reversed(ops):
        after.append(after[-1] @ o)
    after = after[::-1]
    ph = np.exp(1j * x[-1])
    jac = [ph * after[2 * n + 1] @ d @ before[2 * n] for n in range(len(mats)) for d in ders[n]]
    v = ph * before[-1]
    jac.append(1j * v)
    return v, jac


def _template_from_angles(x: np.ndarray) -> Circuit:
    gates = []
    for n, layer in enumerate(x[:-1].reshape(-1, 6)):
        if n:
            gates.append(sqisw(0, 1))
        gates += [u1(0, *layer[:3]), u1(1, *layer[3:])]
    return Circuit(2, gates, float(x[-1]))


def _polish(x0: np.ndarray, target: np.ndarray, max_nfev: int = MAX_ITERATIONS) -> np.ndarray:
    """Levenberg-Marquardt on every angle and the phase against ``target``."""
    def resid(x):
        d = (template_value_and_jac(x)[0] - target).ravel()
        return np.concatenate([d.real, d.imag])

    def jac(x):
        a = np.array([j.ravel() for j in template_value_and_jac(x)[1]]).T
        return np.vstack([a.real, a.imag])

    return least_squares(resid, x0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15,
                         gtol=1e-15, max_nfev=max_nfev).x


def _angles_of(c: Circuit) -> np.ndarray:
    return np.array([p for g in c.gates if g.kind == "u1" for p in g.params] + [c.global_phase])


def _solve_core(target: np.ndarray, cost: int, rng, restarts: int) -> Circuit:
    want = makhlin_invariants(target)
    best, best_err = None, np.inf
    for _ in range(restarts):
        x0 = rng.uniform(-np.pi, np.pi, 6 * (cost - 1))
        if cost > 1:
            x0 = least_squares(lambda x: makhlin_invariants(_core(x)) - want, x0,
                               method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                               max_nfev=200).x
        layers, _ = _assemble(x0, target)
        c = _with_phase(_template_circuit(layers), target)
        # E is quadratic in the gate error, so judge by entrywise distance
        err = mc.phase_aligned_distance(evaluate(c), target)
        if err > EXACT:
            # near chamber corners the invariants pin k only to ~sqrt(residual)
            c = _with_phase(_template_from_angles(_polish(_angles_of(c), target)), target)
            err = mc.phase_aligned_distance(evaluate(c), target)
        if err < best_err:
            best, best_err = c, err
        if best_err <= EXACT:
            break
    return best


def synthesize_fixed_count(u: np.ndarray, count: int, seed=0, tol: float = TOL,
                           restarts: int = RESTARTS) -> TwoQubitSynthesis:
    """Realize ``u`` with exactly ``count`` SQiSW gates (must be feasible)."""
    u = mc.as_unitary(u)
    if count == 0:
        c, a, b = weyl.kron_factor(u)
        circ = _with_phase(_template_circuit([(a, b)]), u)
    else:
        circ = _solve_core(u, count, np.random.default_rng(seed), restarts)
    err = mc.error_metric(evaluate(circ), u)
    if err > tol:
        raise ConvergenceFailure(
            f"{count}-SQiSW template reached E={err:.2e} > {tol:.0e} after {restarts} restarts")
    return TwoQubitSynthesis(circ, count, err)


def synthesize_two_qubit(u: np.ndarray, seed=0, tol: float = TOL) -> TwoQubitSynthesis:
    """Circuit with ``sqisw_cost(u)`` SQiSW gates reproducing ``u`` exactly (phase included)."""
    u = mc.as_unitary(u)
    return synthesize_fixed_count(u, weyl.sqisw_cost(u), seed, tol)


def _gamma_trace_terms(u: np.ndarray) -> tuple[complex, complex]:
    su = mc.to_special_unitary(u)
    yy = np.kron(mc.Y, mc.Y)
    gamma = su @ yy @ su.T @ yy
    return np.trace(gamma), np.trace(np.kron(mc.Z, mc.Z) @ gamma)


def diagonal_split(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``u = delta @ core`` with ``delta = exp(-i psi ZZ)`` and ``core`` in the z = 0 plane.

    ``tr(core YY coreᵀ YY)`` is made real, which puts ``core`` in the two-CNOT
    class; of the two solutions the one with the smaller |z| is kept.
    """
    a, b = _gamma_trace_terms(u)
    base = 0.5 * np.arctan2(-a.imag, b.real)
    best = None
    for psi in (base, base + np.pi / 2):
        core = np.diag(np.exp(1j * psi * np.array([1, -1, -1, 1]))) @ u
        z = abs(weyl.interaction_coefficients(core).z)
        if best is None or z < best[0]:
            best = (z, psi, core)
    _, psi, core = best
    delta = np.diag(np.exp(-1j * psi * np.array([1, -1, -1, 1])))
    return delta, core


def synthesize_with_diagonal(u: np.ndarray, seed=0, tol: float = TOL) -> DiagonalRemainderSynthesis:
    """Two SQiSW gates followed by a diagonal two-qubit remainder."""
    u = mc.as_unitary(u)
    delta, core = diagonal_split(u)
    if not weyl.in_w_prime(weyl.interaction_coefficients(core)):
        raise ConvergenceFailure("diagonal split left the core outside the two-SQiSW region")
    circ = synthesize_fixed_count(core, 2, seed, tol).circuit
    # fold the leftover phase and rounding into delta, then keep only its diagonal
    rest = u @ evaluate(circ).conj().T
    diag = np.diag(rest)
    delta = np.diag(diag / np.abs(diag))
    err = mc.error_metric(delta @ evaluate(circ), u)
    if err > tol:
        raise ConvergenceFailure(f"diagonal remainder synthesis reached E={err:.2e}")
    return DiagonalRemainderSynthesis(circ, delta, err)


def synthesize_diagonal(delta: np.ndarray, seed=0, tol: float = TOL) -> Circuit:
    """Diagonal two-qubit gate; locally an Rzz, so at most two SQiSW."""
    delta = mc.as_unitary(delta)
    if not mc.is_diagonal(delta):
        raise ValueError("expected a diagonal unitary")
    return synthesize_two_qubit(delta, seed, tol).circuit


@lru_cache(maxsize=None)
def cz_circuit() -> Circuit:
    """CZ on qubits (0, 1) with two SQiSW gates, computed once."""
    return synthesize_two_qubit(mc.CZ, seed=0).circuit
