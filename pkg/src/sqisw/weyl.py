"""KAK decomposition and Weyl-chamber classification of two-qubit gates.

Every two-qubit unitary factors as

    U = e^{i phi} g (A0 ⊗ A1) exp(i (x XX + y YY + z ZZ)) (B0 ⊗ B1)

with ``A*, B*`` in SU(2) and ``g`` in {1, i}. The triple is reduced into the
chamber ``pi/4 >= x >= y >= |z|`` (``z >= 0`` on the ``x = pi/4`` face) by
shifting an entry by pi/2, negating two entries, or swapping two entries;
each move is mirrored onto the local factors so the factorization stays exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import matcore as mc

TOL = 1e-9
QUARTER = np.pi / 4

MAGIC = np.array([[1, 0, 0, 1j],
                  [0, 1j, 1, 0],
                  [0, 1j, -1, 0],
                  [1, 0, 0, -1j]]) / np.sqrt(2)
MAGIC_DAG = MAGIC.conj().T

_PAULIS = (mc.X, mc.Y, mc.Z)
# XX, YY, ZZ are diagonal in the magic basis; rows hold their +-1 diagonals.
_SIGMA_DIAG = np.array([np.diag(MAGIC_DAG @ np.kron(p, p) @ MAGIC).real for p in _PAULIS])
# theta_j = phase + x dx_j + y dy_j + z dz_j
_PHASE_SYSTEM = np.column_stack([np.ones(4), _SIGMA_DIAG.T])

_SQRT_MINUS_I = np.exp(-0.25j * np.pi)
# local C with C sigma_a C† = -sigma_a for the pair and fixes the third
_NEGATE = {(0, 1): 1j * mc.Z, (0, 2): 1j * mc.Y, (1, 2): 1j * mc.X}
# local c with (c⊗c) swapping sigma_a and sigma_b
_SWAP = {(0, 1): _SQRT_MINUS_I * mc.S, (1, 2): mc.rx(np.pi / 2), (0, 2): mc.ry(np.pi / 2)}


class InteractionCoefficients(NamedTuple):
    x: float
    y: float
    z: float

    def is_close(self, other, tol: float = TOL) -> bool:
        return bool(np.max(np.abs(np.subtract(self, other))) <= tol)


def canonical_gate(k) -> np.ndarray:
    """exp(i (x XX + y YY + z ZZ))."""
    phases = np.exp(1j * (np.asarray(k, dtype=float) @ _SIGMA_DIAG))
    return MAGIC @ np.diag(phases) @ MAGIC_DAG


@dataclass
class _Tracked:
    """Mutable factorization ``c (a0⊗a1) A(k) (b0⊗b1)`` edited move by move."""
    c: complex
    a0: np.ndarray
    a1: np.ndarray
    k: np.ndarray
    b0: np.ndarray
    b1: np.ndarray

    def shift(self, j: int, m: int):
        # A(k) = A(k - m pi/2 e_j) (i sigma_j)^m and i sigma_j = -i (iP ⊗ iP)
        if m == 0:
            return
        self.k[j] -= m * np.pi / 2
        p = 1j * _PAULIS[j] if m > 0 else -1j * _PAULIS[j]
        for _ in range(abs(m)):
            self.b0, self.b1 = p @ self.b0, p @ self.b1
            self.c *= -1j if m > 0 else 1j

    def negate(self, pair: tuple[int, int]):
        c0 = _NEGATE[pair]
        self.k[list(pair)] *= -1
        self.a0, self.b0 = self.a0 @ c0.conj().T, c0 @ self.b0

    def swap(self, pair: tuple[int, int]):
        if pair[0] == pair[1]:
            return
        pair = tuple(sorted(pair))
        c = _SWAP[pair]
        i, j = pair
        self.k[[i, j]] = self.k[[j, i]]
        self.a0, self.a1 = self.a0 @ c.conj().T, self.a1 @ c.conj().T
        self.b0, self.b1 = c @ self.b0, c @ self.b1


def _canonicalize_tracked(t: _Tracked, tol: float = TOL) -> None:
    for j in range(3):
        t.shift(j, int(np.round(t.k[j] / (np.pi / 2))))
    # selection sort on |k|, descending; stable for ties
    for i in range(3):
        j = i + int(np.argmax(np.abs(t.k[i:])))
        if abs(t.k[j]) > abs(t.k[i]):
            t.swap((i, j))
    if t.k[0] < 0:
        t.negate((0, 2))
    if t.k[1] < 0:
        t.negate((1, 2))
    if abs(t.k[0] - QUARTER) <= tol and t.k[2] < 0:
        t.negate((0, 2))
        t.shift(0, -1)


def canonicalize(v, tol: float = TOL) -> InteractionCoefficients:
    """Map any triple to its representative in the Weyl chamber."""
    t = _Tracked(1.0, mc.I2, mc.I2, np.array(v, dtype=float), mc.I2, mc.I2)
    _canonicalize_tracked(t, tol)
    return InteractionCoefficients(*(float(a) for a in t.k))


def in_chamber(k, tol: float = TOL) -> bool:
    x, y, z = k
    ok = QUARTER + tol >= x >= y - tol and y >= abs(z) - tol
    if abs(x - QUARTER) <= tol:
        ok = ok and z >= -tol
    return bool(ok)


def kron_factor(m: np.ndarray) -> tuple[complex, np.ndarray, np.ndarray]:
    """Split ``m ≈ c (a ⊗ b)`` with ``a, b`` in SU(2)."""
    r = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(r)
    a = np.sqrt(s[0]) * u[:, 0].reshape(2, 2)
    b = np.sqrt(s[0]) * vh[0].reshape(2, 2)
    a = a / np.sqrt(np.linalg.det(a) + 0j)
    b = b / np.sqrt(np.linalg.det(b) + 0j)
    c = np.vdot(np.kron(a, b), m) / 4
    return complex(c), a, b


def _real_eigenbasis(m: np.ndarray) -> np.ndarray:
    """Real orthogonal ``o`` (det +1) with ``o.T @ m @ o`` diagonal, for symmetric unitary ``m``."""
    re, im = m.real, m.imag
    best, best_off = None, np.inf
    for c in (0.6180339887498949, 1.4142135623730951, -2.718281828459045, 0.3183098861837907):
        _, o = np.linalg.eigh(re + c * im)
        d = o.T @ m @ o
        off = np.max(np.abs(d - np.diag(np.diag(d))))
        if off < best_off:
            best, best_off = o, off
        if off < 1e-12:
            break
    if np.linalg.det(best) < 0:
        best = best.copy()
        best[:, 0] *= -1
    return best


def _nearest_special_orthogonal(k: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(k)
    q = u @ vh
    if np.linalg.det(q) < 0:
        u[:, -1] *= -1
        q = u @ vh
    return q


@dataclass(frozen=True)
class KAKDecomposition:
    g: complex
    a0: np.ndarray
    a1: np.ndarray
    b0: np.ndarray
    b1: np.ndarray
    k: InteractionCoefficients
    global_phase: float = 0.0

    def reconstruct(self) -> np.ndarray:
        return (np.exp(1j * self.global_phase) * self.g * np.kron(self.a0, self.a1)
                @ canonical_gate(self.k) @ np.kron(self.b0, self.b1))


def _magic_factors(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``u = Q k1 Q† · e^{i s0} A(s[1:]) · Q k2 Q†`` with ``k1, k2`` in SO(4)."""
    ub = MAGIC_DAG @ u @ MAGIC
    o = _real_eigenbasis(ub.T @ ub)
    d = np.sqrt(np.diag(o.T @ ub.T @ ub @ o))
    k1 = ub @ o / d
    if np.linalg.det(k1.real) < 0:
        k1[:, 0] *= -1
    k1 = _nearest_special_orthogonal(k1.real)
    k2 = o.T
    # re-read the diagonal against the cleaned factors
    d = np.diag(k1.T @ ub @ k2.T)
    return k1, k2, np.linalg.solve(_PHASE_SYSTEM, np.angle(d))


def kak_decompose(u: np.ndarray, tol: float = TOL) -> KAKDecomposition:
    u = mc.as_unitary(u)
    if u.shape != (4, 4):
        raise mc.DimensionError("KAK needs a 4x4 unitary")
    k1, k2, sol = _magic_factors(u)
    c, a0, a1 = kron_factor(MAGIC @ k1 @ MAGIC_DAG)
    c2, b0, b1 = kron_factor(MAGIC @ k2 @ MAGIC_DAG)
    t = _Tracked(c * c2 * np.exp(1j * sol[0]), a0, a1, sol[1:].copy(), b0, b1)
    _canonicalize_tracked(t, tol)

    phase = float(np.angle(np.linalg.det(u)) / 4)
    g = t.c * np.exp(-1j * phase)
    quadrant = int(np.round(np.angle(g) / (np.pi / 2))) % 4
    a0 = -t.a0 if quadrant >= 2 else t.a0
    g = (1, 1j)[quadrant % 2]
    kak = KAKDecomposition(complex(g), a0, t.a1, t.b0, t.b1,
                           InteractionCoefficients(*(float(v) for v in t.k)), phase)
    err = np.max(np.abs(kak.reconstruct() - u))
    if err > 10 * tol:
        raise ArithmeticError(f"KAK reconstruction error {err:.2e}")
    return kak


def interaction_coefficients(u: np.ndarray) -> InteractionCoefficients:
    """Canonical chamber point of ``u``; local factors are not assembled."""
    u = mc.as_unitary(u)
    if u.shape != (4, 4):
        raise mc.DimensionError("interaction coefficients need a 4x4 unitary")
    return canonicalize(_magic_factors(u)[2][1:])


def in_w_prime(k, tol: float = TOL) -> bool:
    """Region reachable with two SQiSW gates: x >= y + |z|."""
    x, y, z = k
    return bool(x >= y + abs(z) - tol)


SQISW_POINT = InteractionCoefficients(np.pi / 8, np.pi / 8, 0.0)


def cost_of_coefficients(k, tol: float = TOL) -> int:
    if np.max(np.abs(k)) <= tol:
        return 0
    if np.max(np.abs(np.subtract(k, SQISW_POINT))) <= tol:
        return 1
    return 2 if in_w_prime(k, tol) else 3


def sqisw_cost(u: np.ndarray) -> int:
    """Minimal number of SQiSW gates realizing ``u`` up to single-qubit gates."""
    return cost_of_coefficients(interaction_coefficients(u))


def haar_w_prime_fraction(samples: int, seed=None) -> float:
    """Fraction of Haar-random two-qubit gates with ``sqisw_cost <= 2``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    hits = sum(sqisw_cost(mc.haar_random_unitary(4, rng)) <= 2 for _ in range(samples))
    return hits / samples
