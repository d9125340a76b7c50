from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqisw import matcore as mc
from sqisw import qsd
from sqisw.circuit import SQISW, Circuit, evaluate, fixed, u1
from sqisw.errors import DimensionError

seeds = st.integers(0, 2 ** 32 - 1)


def block_diag(*blocks):
    d = sum(b.shape[0] for b in blocks)
    out = np.zeros((d, d), dtype=complex)
    k = 0
    for b in blocks:
        out[k:k + b.shape[0], k:k + b.shape[0]] = b
        k += b.shape[0]
    return out


# -- cosine-sine ---------------------------------------------------------------

def test_csd_of_block_diagonal_has_zero_angles():
    a = mc.haar_random_unitary(4, 1)
    left, ry, right = qsd.cosine_sine_decompose(block_diag(a, a))
    assert np.allclose(ry.angles, 0, atol=1e-9)
    assert len(ry.angles) == 4


def test_csd_of_top_qubit_rotation():
    t = 0.83
    _, ry, _ = qsd.cosine_sine_decompose(np.kron(mc.ry(t), np.eye(4)))
    # the sign of each angle is a convention of the outer blocks
    assert np.allclose(np.abs(ry.angles), t, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([2, 3, 4]))
def test_csd_reconstructs(seed, n):
    u = mc.haar_random_unitary(2 ** n, seed)
    left, ry, right = qsd.cosine_sine_decompose(u)
    assert np.max(np.abs(left.matrix() @ ry.matrix(n) @ right.matrix() - u)) <= 1e-9
    assert ry.target == 0 and len(ry.angles) == 2 ** (n - 1)


def test_csd_needs_two_qubits():
    with pytest.raises(DimensionError):
        qsd.cosine_sine_decompose(mc.H)


# -- demultiplexing ------------------------------------------------------------

def test_demultiplex_equal_blocks():
    a = mc.haar_random_unitary(4, 2)
    v, rz, w = qsd.demultiplex(a, a)
    assert np.allclose(rz.angles, 0, atol=1e-9)
    assert np.allclose(v @ w, a, atol=1e-9)


def test_demultiplex_z_pattern():
    u2 = mc.haar_random_unitary(2, 4)
    v, rz, w = qsd.demultiplex(mc.Z @ u2, u2)
    # eigenvalues of Z are +1, -1: the angles are 0 and +-pi
    assert sorted(np.round(np.abs(rz.angles), 9)) == pytest.approx([0, np.pi], abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seeds, seeds, st.sampled_from([1, 2, 3]))
def test_demultiplex_reconstructs(s1, s2, m):
    u1_, u2_ = mc.haar_random_unitary(2 ** m, s1), mc.haar_random_unitary(2 ** m, s2)
    v, rz, w = qsd.demultiplex(u1_, u2_)
    got = np.kron(mc.I2, v) @ rz.matrix(m + 1) @ np.kron(mc.I2, w)
    assert np.max(np.abs(got - block_diag(u1_, u2_))) <= 1e-9


def test_demultiplex_degenerate_spectrum():
    # u1 u2^dagger = I (fully degenerate) and a repeated pair
    u2 = mc.haar_random_unitary(4, 6)
    for d in (np.eye(4), np.diag([1, 1, -1, -1])):
        v, rz, w = qsd.demultiplex(d @ u2, u2)
        got = np.kron(mc.I2, v) @ rz.matrix(3) @ np.kron(mc.I2, w)
        assert np.max(np.abs(got - block_diag(d @ u2, u2))) <= 1e-9


def test_demultiplex_shape_mismatch():
    with pytest.raises(DimensionError):
        qsd.demultiplex(np.eye(2), np.eye(4))


# -- multiplexed rotations -------------------------------------------------------

def sign_oracle(k: int) -> np.ndarray:
    """Angle seen by control pattern j from rotation i, found by simulating CNOT parity flips."""
    out = np.zeros((2 ** k, 2 ** k))
    for j in range(2 ** k):
        sign = 1
        for i in range(2 ** k):
            out[j, i] = sign
            g, h = qsd.gray_code(i), qsd.gray_code((i + 1) % 2 ** k)
            if bin(j & (g ^ h)).count("1"):
                sign = -sign
    return out


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_gray_transform_inverts_the_sign_matrix(k):
    rng = np.random.default_rng(k)
    a = rng.uniform(-3, 3, 2 ** k)
    assert np.allclose(sign_oracle(k) @ qsd.gray_code_angles(a), a, atol=1e-12)


def test_gray_code():
    assert [qsd.gray_code(i) for i in range(8)] == [0, 1, 3, 2, 6, 7, 5, 4]


def test_two_qubit_example():
    t1, t2 = 0.9, -0.4
    m = qsd.MultiplexedRotation("y", (t1, t2), 1, (0,))
    c = qsd.synthesize_multiplexed_rotation(m, 2)
    angles = [g.params[0] for g in c.gates if g.kind == "u1"]
    assert np.allclose(angles, [(t1 + t2) / 2, (t1 - t2) / 2])
    assert [g.kind for g in c.gates] == ["u1", "fixed", "u1", "fixed"]
    assert np.allclose(evaluate(c), m.matrix(2), atol=1e-12)


@pytest.mark.parametrize("axis", ["y", "z"])
def test_equal_angles_give_plain_rotation(axis):
    m = qsd.MultiplexedRotation(axis, (0.7,) * 4, 2, (0, 1))
    c = qsd.synthesize_multiplexed_rotation(m, 3)
    r = mc.ry(0.7) if axis == "y" else mc.rz(0.7)
    assert np.allclose(evaluate(c), np.kron(np.eye(4), r), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from(["y", "z"]), st.sampled_from([2, 3, 4]))
def test_multiplexed_rotation_reconstructs(seed, axis, n):
    rng = np.random.default_rng(seed)
    m = qsd.MultiplexedRotation(axis, rng.uniform(-np.pi, np.pi, 2 ** (n - 1)), 0, tuple(range(1, n)))
    c = qsd.synthesize_multiplexed_rotation(m, n)
    assert np.max(np.abs(evaluate(c) - m.matrix(n))) <= 1e-10
    assert sum(g.kind == "fixed" for g in c.gates) == 2 ** (n - 1)


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([2, 3, 4]))
def test_cz_variant_ends_with_a_boundary_cz(seed, n):
    rng = np.random.default_rng(seed)
    m = qsd.MultiplexedRotation("y", rng.uniform(-np.pi, np.pi, 2 ** (n - 1)), 0, tuple(range(1, n)))
    c = qsd.synthesize_multiplexed_rotation(m, n, qsd.CZ_ENTANGLER)
    assert np.max(np.abs(evaluate(c) - m.matrix(n))) <= 1e-10
    assert c.gates[-1].label == "cz" and set(c.gates[-1].targets) == {0, 1}
    assert sum(g.label == "cz" for g in c.gates) == 2 ** (n - 1)


def test_cz_variant_rejects_z_axis():
    with pytest.raises(ValueError):
        qsd.synthesize_multiplexed_rotation(qsd.MultiplexedRotation("z", (0, 1), 0, (1,)), 2, "cz")


def test_n4_rotation_uses_eight_entanglers():
    m = qsd.MultiplexedRotation("z", np.linspace(-1, 2, 8), 0, (1, 2, 3))
    c = qsd.synthesize_multiplexed_rotation(m, 4)
    assert sum(g.kind == "fixed" for g in c.gates) == 8


def test_rotation_validation():
    with pytest.raises(ValueError):
        qsd.MultiplexedRotation("x", (0.0,))
    with pytest.raises(ValueError):
        qsd.MultiplexedRotation("y", (0.0, 1.0, 2.0), 0, (1,))
    with pytest.raises(ValueError):
        qsd.Multiplexor(1, 1, (np.eye(2),))


def test_cz_is_locally_a_cnot():
    assert np.allclose(qsd.cz_from_cnot(), mc.CZ, atol=1e-15)


# -- lowering --------------------------------------------------------------------

def test_lower_replaces_entanglers():
    c = Circuit(3, [u1(0, 0.2, 0.1, 0.3), fixed(mc.CNOT, (2, 0), "cnot"), fixed(mc.CZ, (1, 2), "cz")])
    low = qsd.lower(c)
    assert {g.kind for g in low.gates} <= {"u1", "sqisw"}
    assert low.count(SQISW) == 4
    assert mc.error_metric(evaluate(low), evaluate(c)) <= 1e-12


def test_merge_single_qubit_keeps_the_unitary():
    rng = np.random.default_rng(0)
    gates = [u1(q, *rng.uniform(-3, 3, 3)) for q in (0, 0, 1, 0, 1)]
    c = Circuit(2, gates[:3] + [fixed(mc.CZ, (0, 1), "cz")] + gates[3:])
    merged = qsd.merge_single_qubit(c)
    assert len(merged.gates) == 5
    assert mc.phase_aligned_distance(evaluate(merged), evaluate(c)) <= 1e-12


# -- full pipeline ---------------------------------------------------------------

def run(u, **kw):
    circ, ledger = qsd.qsd_synthesize(u, qsd.QSDOptions(**kw))
    return circ, ledger, mc.error_metric(evaluate(circ), u)


def test_two_qubit_delegates():
    u = mc.haar_random_unitary(4, 3)
    circ, ledger, err = run(u)
    assert ledger.sqisw_used <= 3 and ledger.leaves == 1
    assert err <= 1e-9


@pytest.mark.parametrize("seed", [0, 1])
def test_three_qubits(seed):
    u = mc.haar_random_unitary(8, seed)
    circ, ledger, err = run(u)
    assert err <= 1e-7
    assert {g.kind for g in circ.gates} <= {"u1", "sqisw"}
    assert ledger.sqisw_used <= ledger.bound == qsd.implemented_bound(3) == 31
    assert ledger.sqisw_used == ledger.multiplexor_sqisw + ledger.leaf_sqisw
    # per level: 3 multiplexors of 4 entanglers at 2 SQiSW each, less the absorbed CZ
    assert ledger.multiplexor_sqisw == 3 * 2 ** 3 - 2
    assert ledger.cz_absorbed == 1 and ledger.diagonals_absorbed == 3


def test_options_never_increase_count():
    u = mc.haar_random_unitary(8, 7)
    counts = {}
    for cz in (True, False):
        for diag in (True, False):
            _, ledger, err = run(u, cz_absorption=cz, diagonal_absorption=diag)
            assert err <= 1e-7
            assert ledger.within_bound()
            counts[cz, diag] = ledger.sqisw_used
    assert counts[True, True] <= min(counts.values())
    assert counts[True, True] < counts[False, False]


def test_four_qubits():
    u = mc.haar_random_unitary(16, 5)
    _, ledger, err = run(u)
    assert err <= 1e-6
    assert ledger.sqisw_used <= qsd.implemented_bound(4) == 167


def test_qsd_rejects_single_qubit():
    with pytest.raises(DimensionError):
        qsd.qsd_synthesize(mc.H)


# -- bounds ----------------------------------------------------------------------

def test_paper_bound_values():
    assert qsd.paper_bound(3) == 24
    assert qsd.paper_bound(4) == 139
    # exact value of the closed form at n = 5
    assert qsd.paper_bound(5) == Fraction(139, 192) * 1024 - 96 + Fraction(5, 3) == 647
    for n in range(3, 11):
        assert isinstance(qsd.paper_bound(n), Fraction)
    with pytest.raises(ValueError):
        qsd.paper_bound(2)


def test_recursion_bound():
    assert [qsd.recursion_bound(n) for n in (2, 3, 4)] == [3, 36, 192]
    for n in range(2, 8):
        assert qsd.implemented_bound(n, False, False) == qsd.recursion_bound(n)


def test_implemented_bound_values():
    assert [qsd.implemented_bound(n) for n in (2, 3, 4, 5)] == [3, 31, 167, 759]
    assert qsd.implemented_bound(4, cz_absorption=False) == 177
    for n in range(3, 8):
        assert qsd.implemented_bound(n) < qsd.implemented_bound(n, cz_absorption=False)
        assert qsd.implemented_bound(n) < qsd.implemented_bound(n, diagonal_absorption=False)
