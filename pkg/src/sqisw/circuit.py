"""Circuit IR: gate placements, structures, slot layouts and evaluation.

Qubit 0 is the most significant bit of the basis-state index. Gates are listed
in temporal order, so ``evaluate`` multiplies later gates on the left.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import matcore as mc
from .errors import DimensionError

SQISW = "sqisw"
U1 = "u1"
FIXED = "fixed"

Pair = tuple[int, int]
Structure = tuple[Pair, ...]

THREE_QUBIT_PAIRS: tuple[Pair, ...] = ((0, 1), (0, 2), (1, 2))


def u1_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    """Rz(phi) Ry(theta) Rz(lam)."""
    return mc.rz(phi) @ mc.ry(theta) @ mc.rz(lam)


_DY = -0.5j * mc.Y
_DZ = -0.5j * mc.Z


def u1_with_grads(theta: float, phi: float, lam: float) -> tuple[np.ndarray, tuple]:
    """u1 matrix and its partials in (theta, phi, lam)."""
    a, b, c = mc.rz(phi), mc.ry(theta), mc.rz(lam)
    m = a @ b @ c
    return m, (a @ _DY @ b @ c, _DZ @ m, m @ _DZ)


def zyz_decompose(u: np.ndarray) -> tuple[float, float, float, float]:
    """Return ``(theta, phi, lam, phase)`` with ``u = e^{i phase} u1(theta, phi, lam)``."""
    v = u / np.sqrt(np.linalg.det(u) + 0j)
    a, b = v[0, 0], v[1, 0]
    theta = 2 * np.arctan2(abs(b), abs(a))
    plus = -2 * np.angle(a) if abs(a) > 1e-14 else 0.0
    minus = 2 * np.angle(b) if abs(b) > 1e-14 else 0.0
    phi, lam = (plus + minus) / 2, (plus - minus) / 2
    phase = float(np.angle(np.vdot(u1_matrix(theta, phi, lam), u)))
    return float(theta), float(phi), float(lam), phase


@dataclass(frozen=True)
class GatePlacement:
    kind: str
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()
    matrix: np.ndarray | None = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        t = tuple(int(q) for q in self.targets)
        object.__setattr__(self, "targets", t)
        if len(set(t)) != len(t):
            raise ValueError(f"repeated target in {t}")
        if self.kind == SQISW:
            if len(t) != 2:
                raise ValueError("sqisw needs two targets")
            # qubit-symmetric gate, so the order is normalized
            object.__setattr__(self, "targets", tuple(sorted(t)))
        elif self.kind == U1:
            if len(t) != 1 or len(self.params) != 3:
                raise ValueError("u1 needs one target and three angles")
            object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        elif self.kind == FIXED:
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (2 ** len(t), 2 ** len(t)):
                raise DimensionError(f"fixed gate matrix {m.shape} vs {len(t)} targets")
            object.__setattr__(self, "matrix", m)
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")

    def unitary(self) -> np.ndarray:
        if self.kind == SQISW:
            return mc.SQISW
        if self.kind == U1:
            return u1_matrix(*self.params)
        return self.matrix

    @property
    def is_multi_qubit(self) -> bool:
        return len(self.targets) > 1


def sqisw(i: int, j: int) -> GatePlacement:
    return GatePlacement(SQISW, (i, j))


def u1(q: int, theta: float, phi: float, lam: float) -> GatePlacement:
    return GatePlacement(U1, (q,), (theta, phi, lam))


def fixed(matrix: np.ndarray, targets: Sequence[int], label: str = "") -> GatePlacement:
    return GatePlacement(FIXED, tuple(targets), matrix=matrix, label=label)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[GatePlacement, ...] = ()
    global_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.targets) >= self.n_qubits or min(g.targets) < 0:
                raise ValueError(f"gate targets {g.targets} outside {self.n_qubits} qubits")

    def count(self, kind: str = SQISW) -> int:
        return sum(g.kind == kind for g in self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise DimensionError("qubit count mismatch")
        return Circuit(self.n_qubits, self.gates + other.gates,
                       self.global_phase + other.global_phase)


def apply_gate(mat: np.ndarray, gate: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Left-multiply ``mat`` (shape ``(2**n, k)``) by ``gate`` acting on ``targets``."""
    k = len(targets)
    t = mat.reshape((2,) * n + (-1,))
    g = gate.reshape((2,) * (2 * k))
    t = np.tensordot(g, t, axes=(list(range(k, 2 * k)), list(targets)))
    t = np.moveaxis(t, list(range(k)), list(targets))
    return t.reshape(mat.shape)


def embed(gate: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Full ``2**n`` operator of ``gate`` on ``targets`` (first target most significant)."""
    if len(set(targets)) != len(targets) or min(targets) < 0 or max(targets) >= n:
        raise ValueError(f"bad targets {tuple(targets)} for {n} qubits")
    return apply_gate(np.eye(2 ** n, dtype=complex), np.asarray(gate, dtype=complex), targets, n)


def embed_two_qubit(gate: np.ndarray, pair: Pair, n: int) -> np.ndarray:
    i, j = pair
    if not 0 <= i < j < n:
        raise ValueError(f"pair {pair} must satisfy 0 <= i < j < {n}")
    return embed(gate, (i, j), n)


def evaluate(c: Circuit) -> np.ndarray:
    m = np.eye(2 ** c.n_qubits, dtype=complex)
    for g in c.gates:
        m = apply_gate(m, g.unitary(), g.targets, c.n_qubits)
    return np.exp(1j * c.global_phase) * m


def structure_of(c: Circuit) -> Structure:
    return tuple(tuple(sorted(g.targets)) for g in c.gates if g.is_multi_qubit)


def slot_layout(structure: Structure, n_qubits: int = 3) -> tuple[tuple[int, int], ...]:
    """Single-qubit slots as ``(after_gate, qubit)``; ``after_gate == -1`` marks the opening layer."""
    slots = [(-1, q) for q in range(n_qubits)]
    for k, (i, j) in enumerate(structure):
        slots += [(k, i), (k, j)]
    return tuple(slots)


def num_params(structure: Structure, n_qubits: int = 3) -> int:
    return 3 * (n_qubits + 2 * len(structure))


def instantiate(structure: Structure, params: Sequence[float], n_qubits: int = 3,
                global_phase: float = 0.0) -> Circuit:
    """Interleave SQiSW gates at ``structure`` with ZYZ slots filled from ``params``."""
    params = np.asarray(params, dtype=float)
    if params.shape != (num_params(structure, n_qubits),):
        raise ValueError(f"expected {num_params(structure, n_qubits)} parameters, "
                         f"got {params.size}")
    blocks = params.reshape(-1, 3)
    gates = [u1(q, *blocks[q]) for q in range(n_qubits)]
    b = n_qubits
    for i, j in structure:
        if not 0 <= i < j < n_qubits:
            raise ValueError(f"bad position {(i, j)}")
        gates.append(sqisw(i, j))
        gates += [u1(i, *blocks[b]), u1(j, *blocks[b + 1])]
        b += 2
    return Circuit(n_qubits, gates, global_phase)


# -- circuit files -----------------------------------------------------------

def circuit_to_dict(c: Circuit) -> dict:
    gates = []
    for g in c.gates:
        if g.kind == SQISW:
            gates.append({"kind": SQISW, "targets": list(g.targets)})
        elif g.kind == U1:
            gates.append({"kind": U1, "target": g.targets[0], "params": list(g.params)})
        else:
            gates.append({"kind": FIXED, "targets": list(g.targets),
                          "re": g.matrix.real.tolist(), "im": g.matrix.imag.tolist(),
                          **({"label": g.label} if g.label else {})})
    return {"qubits": c.n_qubits, "gates": gates, "global_phase": c.global_phase}


def circuit_from_dict(d: dict) -> Circuit:
    try:
        n = int(d["qubits"])
        raw = d["gates"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"circuit file: missing or invalid field {exc}") from None
    gates = []
    for k, g in enumerate(raw):
        kind = g.get("kind")
        try:
            if kind == SQISW:
                gates.append(sqisw(*g["targets"]))
            elif kind == U1:
                gates.append(u1(int(g["target"]), *g["params"]))
            elif kind == FIXED:
                m = np.array(g["re"], dtype=float) + 1j * np.array(g["im"], dtype=float)
                gates.append(fixed(m, g["targets"], g.get("label", "")))
            else:
                raise ValueError(f"unknown kind {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"circuit file: gates[{k}]: {exc}") from None
    return Circuit(n, gates, float(d.get("global_phase", 0.0)))


def dumps(c: Circuit) -> str:
    return json.dumps(circuit_to_dict(c))


def loads(text: str) -> Circuit:
    return circuit_from_dict(json.loads(text))


# -- OpenQASM 3 export ---------------------------------------------------------

# Body of the sqisw definition, exp(i pi/8 (XX + YY)), as (gate, angle, qubits).
_T = np.pi / 8
SQISW_QASM_BODY: tuple[tuple[str, float | None, tuple[int, ...]], ...] = (
    ("h", None, (0,)), ("h", None, (1,)),
    ("cx", None, (0, 1)), ("rz", -2 * _T, (1,)), ("cx", None, (0, 1)),
    ("h", None, (0,)), ("h", None, (1,)),
    ("rx", -np.pi / 2, (0,)), ("rx", -np.pi / 2, (1,)),
    ("cx", None, (0, 1)), ("rz", -2 * _T, (1,)), ("cx", None, (0, 1)),
    ("rx", np.pi / 2, (0,)), ("rx", np.pi / 2, (1,)),
)


def to_qasm(c: Circuit) -> str:
    names = "ab"
    body = []
    for op, angle, qs in SQISW_QASM_BODY:
        args = ", ".join(names[q] for q in qs)
        body.append(f"  {op}({angle!r}) {args};" if angle is not None else f"  {op} {args};")
    lines = [
        "OPENQASM 3.0;",
        'include "stdgates.inc";',
        "// sqisw = [[1,0,0,0],[0,1/sqrt2,i/sqrt2,0],[0,i/sqrt2,1/sqrt2,0],[0,0,0,1]]",
        "gate sqisw a, b {",
        *body,
        "}",
        f"qubit[{c.n_qubits}] q;",
    ]
    if c.global_phase:
        lines.append(f"gphase({c.global_phase!r});")
    for g in c.gates:
        if g.kind == SQISW:
            i, j = g.targets
            lines.append(f"sqisw q[{i}], q[{j}];")
        elif g.kind == U1:
            theta, phi, lam = g.params
            q = g.targets[0]
            lines += [f"rz({lam!r}) q[{q}];", f"ry({theta!r}) q[{q}];", f"rz({phi!r}) q[{q}];"]
        else:
            raise ValueError("QASM export supports only sqisw and u1 gates; lower fixed gates first")
    return "\n".join(lines) + "\n"
