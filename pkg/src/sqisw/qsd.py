"""n-qubit synthesis by Quantum Shannon Decomposition down to SQiSW circuits.

Each level splits a unitary on qubits ``q[0..m-1]`` into four unitaries on
``q[1:]`` separated by three multiplexed rotations targeting ``q[0]``:

    U = (V_L ⊕ V_L)·Rz·(W_L ⊕ W_L) · Ry · (V_R ⊕ V_R)·Rz·(W_R ⊕ W_R)

The recursion stops at two-qubit leaves, which go to :mod:`synth2q`. Two
optional savings are applied on top:

* the Ry multiplexor is built with CZ entanglers, and its trailing CZ is folded
  into the next multiplexor block before that block is demultiplexed;
* every leaf but the last is realized as two SQiSW plus a diagonal, and the
  diagonal is pushed through the following multiplexors (it sits on their
  controls) into the next leaf.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.linalg import cossin, schur

from . import matcore as mc
from . import synth2q
from .circuit import FIXED, SQISW, Circuit, GatePlacement, fixed, u1, zyz_decompose
from .errors import DimensionError

RECON_TOL = 1e-9
Y_AXIS, Z_AXIS = "y", "z"
CNOT_ENTANGLER, CZ_ENTANGLER = "cnot", "cz"


@dataclass(frozen=True)
class Multiplexor:
    """Block-diagonal unitary; block ``j`` acts on the data qubits when the controls read ``j``."""
    controls: int
    data_qubits: int
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(np.asarray(b, dtype=complex) for b in self.blocks))
        if len(self.blocks) != 2 ** self.controls:
            raise ValueError(f"{self.controls} controls need {2 ** self.controls} blocks")
        for b in self.blocks:
            mc.as_unitary(b)
            if b.shape != (2 ** self.data_qubits,) * 2:
                raise DimensionError(f"block shape {b.shape} vs {self.data_qubits} data qubits")

    def matrix(self) -> np.ndarray:
        d = 2 ** self.data_qubits
        out = np.zeros((d * len(self.blocks),) * 2, dtype=complex)
        for j, b in enumerate(self.blocks):
            out[j * d:(j + 1) * d, j * d:(j + 1) * d] = b
        return out


@dataclass(frozen=True)
class MultiplexedRotation:
    """Rotation of ``target`` about ``axis`` by ``angles[j]`` when ``controls`` read ``j``.

    ``controls[0]`` is the most significant bit of ``j``.
    """
    axis: str
    angles: tuple[float, ...]
    target: int = 0
    controls: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        object.__setattr__(self, "controls", tuple(self.controls))
        if self.axis not in (Y_AXIS, Z_AXIS):
            raise ValueError(f"axis must be 'y' or 'z', got {self.axis!r}")
        if len(self.angles) != 2 ** len(self.controls):
            raise ValueError(f"{len(self.controls)} controls need {2 ** len(self.controls)} angles")

    def rotation(self, angle: float) -> np.ndarray:
        return mc.ry(angle) if self.axis == Y_AXIS else mc.rz(angle)

    def matrix(self, n: int) -> np.ndarray:
        """Full ``2**n`` operator."""
        dim = 2 ** n
        out = np.zeros((dim, dim), dtype=complex)
        bit = lambda s, q: (s >> (n - 1 - q)) & 1
        for s in range(dim):
            j = 0
            for c in self.controls:
                j = 2 * j + bit(s, c)
            r = self.rotation(self.angles[j])
            for b in (0, 1):
                t = s & ~(1 << (n - 1 - self.target)) | (b << (n - 1 - self.target))
                out[t, s] = r[b, bit(s, self.target)]
        return out


@dataclass(frozen=True)
class QSDOptions:
    cz_absorption: bool = True
    diagonal_absorption: bool = True
    seed: int = 0
    tol: float = synth2q.TOL


@dataclass
class CountLedger:
    sqisw_used: int = 0
    cnot_equivalent_saved: int = 0
    bound: int = 0
    cz_absorbed: int = 0
    diagonals_absorbed: int = 0
    leaves: int = 0
    leaf_sqisw: int = 0
    multiplexor_sqisw: int = 0

    @property
    def sqisw_saved(self) -> int:
        # an absorbed CZ saves two SQiSW, an absorbed diagonal one
        return 2 * self.cz_absorbed + self.diagonals_absorbed

    def within_bound(self) -> bool:
        return self.sqisw_used <= self.bound


# -- decompositions --------------------------------------------------------

def _check(got: np.ndarray, want: np.ndarray, what: str):
    err = np.max(np.abs(got - want))
    if err > RECON_TOL:
        raise ArithmeticError(f"{what} reconstruction error {err:.2e}")


def cosine_sine_decompose(u: np.ndarray) -> tuple[Multiplexor, MultiplexedRotation, Multiplexor]:
    """``u = L · Ry · R`` with ``L, R`` multiplexed on qubit 0 and ``Ry`` targeting qubit 0."""
    u = mc.as_unitary(u)
    n = mc.num_qubits(u.shape[0])
    if n < 2:
        raise DimensionError("cosine-sine decomposition needs at least two qubits")
    h = u.shape[0] // 2
    (l1, l2), theta, (r1, r2) = cossin(u, p=h, q=h, separate=True)
    left, right = Multiplexor(1, n - 1, (l1, l2)), Multiplexor(1, n - 1, (r1, r2))
    ry = MultiplexedRotation(Y_AXIS, tuple(2 * theta), 0, tuple(range(1, n)))
    _check(left.matrix() @ ry.matrix(n) @ right.matrix(), u, "cosine-sine")
    return left, ry, right


def demultiplex(u1: np.ndarray, u2: np.ndarray) -> tuple[np.ndarray, MultiplexedRotation, np.ndarray]:
    """``u1 ⊕ u2 = (I ⊗ V) · Rz · (I ⊗ W)``, Rz on qubit 0 controlled by the rest.

    ``u1 u2† = V D² V†`` is diagonalized by a complex Schur form (exact for
    normal matrices, and any eigenbasis works when eigenvalues repeat).
    """
    u1, u2 = mc.as_unitary(u1), mc.as_unitary(u2)
    if u1.shape != u2.shape:
        raise DimensionError(f"block shapes differ: {u1.shape} vs {u2.shape}")
    t, v = schur(u1 @ u2.conj().T, output="complex")
    d = np.sqrt(np.diag(t))
    w = d[:, None] * (v.conj().T @ u2)
    m = mc.num_qubits(u1.shape[0])
    rz = MultiplexedRotation(Z_AXIS, tuple(-2 * np.angle(d)), 0, tuple(range(1, m + 1)))
    full = np.kron(mc.I2, v) @ rz.matrix(m + 1) @ np.kron(mc.I2, w)
    want = np.zeros_like(full)
    want[:u1.shape[0], :u1.shape[0]], want[u1.shape[0]:, u1.shape[0]:] = u1, u2
    _check(full, want, "demultiplex")
    return v, rz, w


def gray_code(i: int) -> int:
    return i ^ (i >> 1)


def gray_code_angles(angles: Sequence[float]) -> np.ndarray:
    """Circuit angles for the Gray-code staircase from the multiplexed angles.

    Rotation ``i`` meets the control pattern ``gray(i)``, so the state ``j``
    sees ``sum_i (-1)^{popcount(j & gray(i))} beta_i``; that sign matrix is
    orthogonal up to ``2^k``.
    """
    a = np.asarray(angles, dtype=float)
    k = len(a)
    signs = np.array([[(-1) ** bin(j & gray_code(i)).count("1") for i in range(k)] for j in range(k)])
    return signs.T @ a / k


def synthesize_multiplexed_rotation(m: MultiplexedRotation, n: int,
                                    entangler: str = CNOT_ENTANGLER) -> Circuit:
    """Alternate single-axis rotations with ``2^k`` entanglers (k = number of controls)."""
    if entangler == CZ_ENTANGLER and m.axis != Y_AXIS:
        raise ValueError("CZ entanglers only invert Y rotations")
    ent = {CNOT_ENTANGLER: mc.CNOT, CZ_ENTANGLER: mc.CZ}[entangler]
    k = len(m.controls)
    beta = gray_code_angles(m.angles)
    gates = []
    for i, b in enumerate(beta):
        gates.append(u1(m.target, b, 0, 0) if m.axis == Y_AXIS else u1(m.target, 0, b, 0))
        if k:
            changed = gray_code(i) ^ gray_code((i + 1) % len(beta))
            c = m.controls[k - changed.bit_length()]
            gates.append(fixed(ent, (c, m.target), entangler))
    return Circuit(n, gates)


def cz_from_cnot() -> np.ndarray:
    """CZ as the Ry(±pi/2)-conjugated CNOT on the target qubit."""
    return np.kron(mc.I2, mc.ry(-np.pi / 2)) @ mc.CNOT @ np.kron(mc.I2, mc.ry(np.pi / 2))


# -- lowering to SQiSW + u1 --------------------------------------------------

def _remap(c: Circuit, qubits: Sequence[int], n: int) -> Circuit:
    gates = []
    for g in c.gates:
        t = tuple(qubits[q] for q in g.targets)
        gates.append(GatePlacement(g.kind, t, g.params, g.matrix, g.label))
    return Circuit(n, gates, c.global_phase)


def _local(q: int, m: np.ndarray) -> tuple[GatePlacement, float]:
    theta, phi, lam, phase = zyz_decompose(m)
    return u1(q, theta, phi, lam), phase


def lower(c: Circuit, seed=0) -> Circuit:
    """Replace FIXED gates by SQiSW and u1 gates (CNOT via H·CZ·H, CZ from a cached circuit)."""
    gates, phase = [], c.global_phase
    for g in c.gates:
        if g.kind != FIXED:
            gates.append(g)
            continue
        if len(g.targets) == 1:
            p, ph = _local(g.targets[0], g.matrix)
            gates.append(p)
            phase += ph
            continue
        if len(g.targets) != 2:
            raise ValueError("only one- and two-qubit fixed gates can be lowered")
        if g.label in (CZ_ENTANGLER, CNOT_ENTANGLER):
            sub = synth2q.cz_circuit()
            if g.label == CNOT_ENTANGLER:
                h, ph = _local(1, mc.H)
                sub = Circuit(2, (h,) + sub.gates + (h,), sub.global_phase + 2 * ph)
        else:
            sub = synth2q.synthesize_two_qubit(g.matrix, seed).circuit
        sub = _remap(sub, g.targets, c.n_qubits)
        gates += sub.gates
        phase += sub.global_phase
    return merge_single_qubit(Circuit(c.n_qubits, gates, phase))


def merge_single_qubit(c: Circuit) -> Circuit:
    """Fuse runs of one-qubit gates per qubit into a single u1 (identities dropped)."""
    pending: dict[int, np.ndarray] = {}
    gates, phase = [], c.global_phase

    def flush(q):
        nonlocal phase
        m = pending.pop(q, None)
        if m is None:
            return
        g, ph = _local(q, m)
        phase += ph
        if np.max(np.abs(m - np.exp(1j * ph) * np.eye(2))) > 1e-15:
            gates.append(g)

    for g in c.gates:
        if len(g.targets) == 1:
            q = g.targets[0]
            pending[q] = g.unitary() @ pending.get(q, mc.I2)
            continue
        for q in g.targets:
            flush(q)
        gates.append(g)
    for q in sorted(pending):
        flush(q)
    return Circuit(c.n_qubits, gates, phase)


# -- recursion -------------------------------------------------------------

@dataclass
class _Leaf:
    matrix: np.ndarray
    qubits: tuple[int, int]


def _decompose(u: np.ndarray, qubits: tuple[int, ...], n: int, opts: QSDOptions,
               items: list, ledger: CountLedger):
    m = len(qubits)
    if m == 2:
        items.append(_Leaf(u, qubits))
        return
    left, ry, right = cosine_sine_decompose(u)
    ry = MultiplexedRotation(Y_AXIS, ry.angles, qubits[0], qubits[1:])
    l1, l2 = left.blocks
    if opts.cz_absorption:
        ry_circ = synthesize_multiplexed_rotation(ry, n, CZ_ENTANGLER)
        last = ry_circ.gates[-1]
        assert last.label == CZ_ENTANGLER and last.targets == (qubits[1], qubits[0])
        ry_circ = Circuit(n, ry_circ.gates[:-1])
        # CZ(q1, q0) then L is diag(L1, L2 · Z_{q1})
        l2 = l2 @ np.kron(mc.Z, np.eye(2 ** (m - 2)))
        ledger.cz_absorbed += 1
    else:
        ry_circ = synthesize_multiplexed_rotation(ry, n, CNOT_ENTANGLER)
    v_r, rz_r, w_r = demultiplex(*right.blocks)
    v_l, rz_l, w_l = demultiplex(l1, l2)
    place = lambda rz: MultiplexedRotation(Z_AXIS, rz.angles, qubits[0], qubits[1:])
    sub = qubits[1:]
    _decompose(w_r, sub, n, opts, items, ledger)
    items.append(synthesize_multiplexed_rotation(place(rz_r), n))
    _decompose(v_r, sub, n, opts, items, ledger)
    items.append(ry_circ)
    _decompose(w_l, sub, n, opts, items, ledger)
    items.append(synthesize_multiplexed_rotation(place(rz_l), n))
    _decompose(v_l, sub, n, opts, items, ledger)


def qsd_synthesize(u: np.ndarray, opts: QSDOptions | None = None) -> tuple[Circuit, CountLedger]:
    """Exact SQiSW circuit for ``u``; the ledger records counts and the implemented bound."""
    opts = opts or QSDOptions()
    u = mc.as_unitary(u)
    n = mc.num_qubits(u.shape[0])
    if n < 2:
        raise DimensionError("QSD needs at least two qubits")
    ledger = CountLedger(bound=implemented_bound(n, opts.cz_absorption, opts.diagonal_absorption))
    if n == 2:
        c = synth2q.synthesize_two_qubit(u, opts.seed, opts.tol).circuit
        ledger.sqisw_used = ledger.leaf_sqisw = c.count(SQISW)
        ledger.leaves = 1
        return c, ledger

    items: list = []
    _decompose(u, tuple(range(n)), n, opts, items, ledger)
    leaves = [i for i, it in enumerate(items) if isinstance(it, _Leaf)]
    pieces, carry = [], None
    for i, it in enumerate(items):
        if not isinstance(it, _Leaf):
            lowered = lower(it, opts.seed)
            ledger.multiplexor_sqisw += lowered.count(SQISW)
            pieces.append(lowered)
            continue
        mat = it.matrix if carry is None else it.matrix @ carry
        carry = None
        if opts.diagonal_absorption and i != leaves[-1]:
            res = synth2q.synthesize_with_diagonal(mat, opts.seed, opts.tol)
            # the diagonal commutes with the multiplexors between here and the next leaf
            carry = res.delta
            sub = res.circuit
            ledger.diagonals_absorbed += 1
        else:
            sub = synth2q.synthesize_two_qubit(mat, opts.seed, opts.tol).circuit
        ledger.leaf_sqisw += sub.count(SQISW)
        ledger.leaves += 1
        pieces.append(_remap(sub, it.qubits, n))
    circ = Circuit(n, (), 0.0)
    for p in pieces:
        circ = circ + p
    circ = merge_single_qubit(circ)
    ledger.sqisw_used = circ.count(SQISW)
    ledger.cnot_equivalent_saved = ledger.cz_absorbed
    if not ledger.within_bound():
        raise ArithmeticError(f"used {ledger.sqisw_used} SQiSW, above the bound {ledger.bound}")
    return circ, ledger


# -- counting ---------------------------------------------------------------

def implemented_bound(n: int, cz_absorption: bool = True, diagonal_absorption: bool = True) -> int:
    """Worst-case SQiSW count of :func:`qsd_synthesize` (recursion base at two qubits).

    A level on ``j`` qubits spends ``3 * 2^(j-1)`` entanglers at 2 SQiSW each,
    less one CZ when absorbed; ``4^(n-2)`` leaves cost 3 each, or 2 each plus
    3 for the last one when diagonals are absorbed.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    mux = sum(4 ** (n - j) * (3 * 2 ** j - (2 if cz_absorption else 0)) for j in range(3, n + 1))
    leaves = 4 ** (n - 2)
    leaf = 2 * (leaves - 1) + 3 if diagonal_absorption else 3 * leaves
    return mux + leaf


def recursion_bound(n: int, c2: int = 3) -> int:
    """``c_j = 4 c_{j-1} + 3 * 2^j`` without any absorption."""
    c = c2
    for j in range(3, n + 1):
        c = 4 * c + 3 * 2 ** j
    return c


def paper_bound(n: int) -> Fraction:
    """139/192 · 4^n − 3 · 2^n + 5/3, exactly."""
    if n < 3:
        raise ValueError("the closed form is stated for n >= 3")
    return Fraction(139, 192) * 4 ** n - 3 * 2 ** n + Fraction(5, 3)
