"""Dense unitary arithmetic, named gates, the circuit error metric and Haar sampling.

Matrices are plain ``numpy`` complex arrays. :func:`as_unitary` is the checked
constructor; everything else accepts raw arrays.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError, NonUnitaryError

UNITARY_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)

CNOT = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1]], dtype=complex)
ISWAP = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1j, 0],
     [0, 1j, 0, 0],
     [0, 0, 0, 1]], dtype=complex)
_r = 1 / np.sqrt(2)
SQISW = np.array(
    [[1, 0, 0, 0],
     [0, _r, 1j * _r, 0],
     [0, 1j * _r, _r, 0],
     [0, 0, 0, 1]], dtype=complex)
XX = np.kron(X, X)
YY = np.kron(Y, Y)
ZZ = np.kron(Z, Z)
# Berkeley B gate.
B_GATE = expm(1j * (np.pi / 4 * XX + np.pi / 8 * YY))
TOFFOLI = np.eye(8, dtype=complex)[[0, 1, 2, 3, 4, 5, 7, 6]]


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def rzz(theta: float) -> np.ndarray:
    """diag(e^{-i t/2}, e^{i t/2}, e^{i t/2}, e^{-i t/2}) = exp(-i t/2 Z⊗Z)."""
    a, b = np.exp(-0.5j * theta), np.exp(0.5j * theta)
    return np.diag([a, b, b, a])


def unitarity_defect(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def as_unitary(m, tol: float = UNITARY_TOL) -> np.ndarray:
    """Checked constructor: square, finite, and ``max|U†U - I| <= tol``."""
    m = np.array(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonUnitaryError("matrix has non-finite entries")
    defect = unitarity_defect(m)
    if defect > tol:
        raise NonUnitaryError(f"unitarity defect {defect:.3e} exceeds {tol:.1e}")
    return m


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return as_unitary(a @ b)


def dagger(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).conj().T


def tensor(*ms: np.ndarray) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in ms:
        out = np.kron(out, m)
    return out


def error_metric(u: np.ndarray, v: np.ndarray) -> float:
    """E(U, V) = 1 - |tr(U†V)| / dim, clipped into [0, 1]."""
    u, v = np.asarray(u), np.asarray(v)
    if u.shape != v.shape:
        raise DimensionError(f"shape mismatch {u.shape} vs {v.shape}")
    t = np.vdot(u, v)  # == tr(U† V)
    return float(min(1.0, max(0.0, 1.0 - abs(t) / u.shape[0])))


def phase_aligned_distance(u: np.ndarray, v: np.ndarray) -> float:
    """max-entry distance between ``u`` and ``v`` after the best global phase."""
    t = np.vdot(v, u)
    phase = t / abs(t) if abs(t) > 0 else 1.0
    return float(np.max(np.abs(u - phase * v)))


def to_special_unitary(u: np.ndarray) -> np.ndarray:
    """Divide by the principal dim-th root of det(u)."""
    d = u.shape[0]
    det = np.linalg.det(u)
    return u / np.exp(1j * np.angle(det) / d)


def haar_random_unitary(dim: int, seed=None, special: bool = True) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix.

    The R-factor diagonal phases are folded back into Q so the law is exactly
    Haar (Mezzadri 2007). With ``special`` the result has determinant 1.
    """
    if dim < 1:
        raise DimensionError("dim must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return to_special_unitary(q) if special else q


def random_su2(rng) -> np.ndarray:
    return haar_random_unitary(2, rng)


def is_diagonal(m: np.ndarray, tol: float = 1e-10) -> bool:
    off = m - np.diag(np.diag(m))
    return bool(np.max(np.abs(off)) <= tol)
