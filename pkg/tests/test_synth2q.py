import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqisw import matcore as mc
from sqisw import synth2q as s2
from sqisw import weyl
from sqisw.circuit import evaluate
from sqisw.errors import ConvergenceFailure

seeds = st.integers(0, 2 ** 32 - 1)


def kinds(c):
    return [g.kind for g in c.gates]


def assert_template(res):
    # two leading u1 slots, then (sqisw u1 u1) per gate
    want = ["u1", "u1"] + ["sqisw", "u1", "u1"] * res.sqisw_count
    assert kinds(res.circuit) == want


@pytest.mark.parametrize("u,count", [(np.eye(4), 0), (mc.SQISW, 1), (mc.CNOT, 2), (mc.CZ, 2),
                                     (mc.ISWAP, 2), (mc.B_GATE, 2), (mc.SWAP, 3)])
def test_named_gates(u, count):
    res = s2.synthesize_two_qubit(u)
    assert res.sqisw_count == count
    assert res.residual_error <= 1e-9
    assert mc.phase_aligned_distance(evaluate(res.circuit), u) <= 1e-9
    assert_template(res)


def test_haar_targets():
    rng = np.random.default_rng(17)
    counts = []
    for _ in range(15):
        u = mc.haar_random_unitary(4, rng, special=False)
        res = s2.synthesize_two_qubit(u)
        assert res.sqisw_count == weyl.sqisw_cost(u)
        assert mc.error_metric(evaluate(res.circuit), u) <= 1e-9
        counts.append(res.sqisw_count)
    assert set(counts) <= {2, 3}


def test_infeasible_count_fails_loudly():
    with pytest.raises(ConvergenceFailure):
        s2.synthesize_fixed_count(mc.SWAP, 2, restarts=2)


def test_deterministic_given_seed():
    u = mc.haar_random_unitary(4, 8)
    a = s2.synthesize_two_qubit(u, seed=3).circuit
    b = s2.synthesize_two_qubit(u, seed=3).circuit
    assert np.array_equal(evaluate(a), evaluate(b))


@settings(max_examples=10, deadline=None)
@given(seeds, seeds)
def test_local_sandwich_keeps_count(s, t):
    rng = np.random.default_rng(t)
    u = mc.haar_random_unitary(4, s)
    v = np.kron(mc.random_su2(rng), mc.random_su2(rng)) @ u @ np.kron(mc.random_su2(rng), mc.random_su2(rng))
    assert s2.synthesize_two_qubit(v).sqisw_count == s2.synthesize_two_qubit(u).sqisw_count


@settings(max_examples=50, deadline=None)
@given(seeds, seeds)
def test_makhlin_invariants_are_local_invariants(s, t):
    rng = np.random.default_rng(t)
    u = mc.haar_random_unitary(4, s)
    v = np.exp(0.3j) * np.kron(mc.random_su2(rng), mc.random_su2(rng)) @ u
    assert np.allclose(s2.makhlin_invariants(u), s2.makhlin_invariants(v), atol=1e-9)


def test_template_jacobian_matches_finite_differences():
    rng = np.random.default_rng(0)
    # three layers (two SQiSW) plus the phase
    x = rng.uniform(-np.pi, np.pi, 19)
    val, jac = s2.template_value_and_jac(x)
    assert len(jac) == len(x)
    h = 1e-6
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        fd = (s2.template_value_and_jac(x + e)[0] - s2.template_value_and_jac(x - e)[0]) / (2 * h)
        assert np.allclose(fd, jac[i], atol=1e-7)


def test_diagonal_split():
    for seed in range(10):
        u = mc.haar_random_unitary(4, seed)
        delta, core = s2.diagonal_split(u)
        assert mc.is_diagonal(delta)
        assert np.allclose(delta @ core, u, atol=1e-12)
        k = weyl.interaction_coefficients(core)
        assert abs(k.z) <= 1e-9
        assert weyl.in_w_prime(k)


def check_with_diagonal(u):
    res = s2.synthesize_with_diagonal(u)
    assert kinds(res.circuit).count("sqisw") == 2
    off = res.delta - np.diag(np.diag(res.delta))
    assert np.max(np.abs(off)) <= 1e-10
    assert mc.unitarity_defect(res.delta) <= 1e-10
    assert mc.error_metric(res.reconstruct(), u) <= 1e-9
    # delta is the last-applied factor
    assert mc.error_metric(res.delta @ evaluate(res.circuit), u) <= 1e-9
    return res


def test_with_diagonal_examples():
    check_with_diagonal(mc.CNOT)
    check_with_diagonal(np.diag(np.exp(1j * np.array([0.1, 0.7, -0.4, 1.9]))))
    check_with_diagonal(mc.SWAP)


def test_with_diagonal_haar():
    rng = np.random.default_rng(23)
    for _ in range(12):
        check_with_diagonal(mc.haar_random_unitary(4, rng, special=False))


def test_synthesize_diagonal_examples():
    c = s2.synthesize_diagonal(np.eye(4))
    assert kinds(c).count("sqisw") == 0
    c = s2.synthesize_diagonal(mc.rzz(np.pi / 2))
    assert kinds(c).count("sqisw") == 2
    assert np.allclose(weyl.interaction_coefficients(mc.rzz(np.pi / 2)), (np.pi / 4, 0, 0))
    assert mc.error_metric(evaluate(c), mc.rzz(np.pi / 2)) <= 1e-9
    with pytest.raises(ValueError):
        s2.synthesize_diagonal(mc.CNOT)


@settings(max_examples=8, deadline=None)
@given(st.lists(st.floats(-np.pi, np.pi), min_size=4, max_size=4))
def test_random_diagonals(phases):
    d = np.diag(np.exp(1j * np.array(phases)))
    c = s2.synthesize_diagonal(d)
    assert kinds(c).count("sqisw") <= 2
    assert mc.error_metric(evaluate(c), d) <= 1e-9


def test_cz_circuit_cached():
    c = s2.cz_circuit()
    assert c is s2.cz_circuit()
    assert kinds(c).count("sqisw") == 2
    assert mc.phase_aligned_distance(evaluate(c), mc.CZ) <= 1e-9
