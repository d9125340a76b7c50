"""Exact Toffoli with eight SQiSW gates.

The scheme has three free Ry angles on qubit 2 tied by
``theta3 = theta2 + pi/2 = theta1 + pi``; ``theta1 = arcsin(1 - sqrt 2)`` makes
the circuit equal to Toffoli up to a global phase.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore as mc
from .circuit import Circuit, GatePlacement, Structure, evaluate, sqisw, structure_of, u1

SOLUTION = float(np.arcsin(1 - np.sqrt(2)))
STRUCTURE: Structure = ((1, 2), (0, 2), (0, 2), (0, 1), (1, 2), (1, 2), (0, 2), (0, 2))
# The closed forms below use a different rotation phase convention; our
# circuit equals them times this x-independent factor.
FORMULA_PHASE = np.pi / 8

_SQ2 = np.sqrt(2)


def _ry(q: int, a: float) -> GatePlacement:
    return u1(q, a, 0.0, 0.0)


def _rz(q: int, a: float) -> GatePlacement:
    return u1(q, 0.0, a, 0.0)


@dataclass(frozen=True)
class ToffoliScheme:
    theta1: float
    theta2: float
    theta3: float
    circuit: Circuit

    def unitary(self) -> np.ndarray:
        return evaluate(self.circuit)


def build_toffoli_scheme(theta1: float = SOLUTION) -> ToffoliScheme:
    p = np.pi
    t1 = float(theta1)
    t2, t3 = t1 + p / 2, t1 + p
    gates = [
        _ry(1, p / 2), _rz(2, p / 2), _rz(1, -p / 2),
        sqisw(1, 2),
        _ry(2, p / 2), _rz(2, p / 2),
        sqisw(0, 2), sqisw(0, 2),
        _ry(0, p / 2), _ry(2, t1),
        sqisw(0, 1),
        _ry(0, p / 4), _ry(1, -3 * p / 4), _rz(0, p / 2), _rz(1, p / 2),
        sqisw(1, 2),
        _rz(1, -p), _ry(2, t2),
        sqisw(1, 2),
        _ry(1, p / 2), _ry(2, t3), _rz(2, -p),
        sqisw(0, 2), sqisw(0, 2),
        _ry(0, p), _ry(2, -p / 4), _rz(0, -p / 4), _rz(2, p / 2),
    ]
    c = Circuit(3, gates)
    assert structure_of(c) == STRUCTURE
    return ToffoliScheme(t1, t2, t3, c)


def toffoli_matrix() -> np.ndarray:
    return mc.TOFFOLI.copy()


def closed_form_entries(x: float) -> dict[str, complex]:
    """U_11, U_33, U_55 and U_87 (1-indexed) of the scheme at ``theta1 = x``."""
    r = lambda a: np.exp(1j * np.pi * a)  # (-1)^a
    c = np.cos(x / 2) + np.sin(x / 2)
    s = np.sin(x)
    return {
        "U11": (-0.25 + 0.25j) * r(3 / 8) * c * (-2 + 1j * _SQ2 + (2 + _SQ2) * s),
        "U33": 0.5 * r(7 / 8) * c * (-1j - _SQ2 + (1 + _SQ2) * s),
        "U55": -r(1 / 8) * c * ((5 - 1j) - (4 - 1j) * _SQ2 + (-1 - 1j + _SQ2) * s)
        / (2 * (-1 + r(1 / 4)) ** 3),
        "U87": -0.5 * r(1 / 8) * c * (1j - _SQ2 + (1 + _SQ2) * s),
    }


def leakage_factor(x: float) -> float:
    """(cos(x/2) - sin(x/2)) (1 + (1 + sqrt 2) sin x)."""
    return float((np.cos(x / 2) - np.sin(x / 2)) * (1 + (1 + _SQ2) * np.sin(x)))


# 0-indexed positions of the closed forms and of their partners
_ENTRY_INDEX = {"U11": (0, 0), "U33": (2, 2), "U55": (4, 4), "U87": (7, 6)}
_PARTNER = {"U11": (1, 1), "U33": (3, 3), "U55": (5, 5), "U87": (6, 7)}
# off-pattern entries all have modulus |leakage_factor| / (2 sqrt 2) or are 0
_LEAK_SCALE = 1 / (2 * _SQ2)


@dataclass(frozen=True)
class EntryReport:
    x: float
    formula_residual: float      # closed forms vs circuit entries
    partner_residual: float      # U11 = U22, U33 = U44, U55 = U66, U87 = U78
    leakage_residual: float      # off-pattern entries vs the leakage factor
    leakage: float
    entries: dict

    @property
    def max_residual(self) -> float:
        return max(self.formula_residual, self.partner_residual, self.leakage_residual)


def verify_entry_formulas(x: float) -> EntryReport:
    u = build_toffoli_scheme(x).unitary()
    forms = closed_form_entries(x)
    ph = np.exp(1j * FORMULA_PHASE)
    formula = max(abs(u[_ENTRY_INDEX[k]] - ph * v) for k, v in forms.items())
    partner = max(abs(u[_ENTRY_INDEX[k]] - u[_PARTNER[k]]) for k in forms)
    mask = np.ones((8, 8), bool)
    for pos in (*_ENTRY_INDEX.values(), *_PARTNER.values()):
        mask[pos] = False
    off = np.abs(u[mask])
    leak = leakage_factor(x)
    # each off-pattern entry is either identically zero or a fixed multiple of the factor
    support = _leak_support()
    expect = np.where(support[mask], abs(leak) * _LEAK_SCALE, 0.0)
    return EntryReport(float(x), float(formula), float(partner),
                       float(np.max(np.abs(off - expect))), leak,
                       {k: complex(u[_ENTRY_INDEX[k]]) for k in forms})


def _leak_support() -> np.ndarray:
    """Where the off-pattern entries are not identically zero, read from the circuit at a generic angle."""
    u = build_toffoli_scheme(-0.3).unitary()
    return np.abs(u) > 1e-9


def exactness_residual(theta1: float = SOLUTION) -> float:
    """Max-entry distance to Toffoli after the best global phase."""
    return mc.phase_aligned_distance(build_toffoli_scheme(theta1).unitary(), mc.TOFFOLI)
