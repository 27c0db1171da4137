import numpy as np
import pytest
from hypothesis import given, settings

from conftest import EXAMPLE, equal_up_to_phase, operator, random_circuits, random_unitary
from limqsp.circuit import X_MAT, Circuit, Gate, counts, is_transpiled, named_matrix
from limqsp.dd import build_from_statevector
from limqsp.simulator import random_cliffordT_state, run_main
from limqsp.synth import disentangle
from limqsp.transpile import transpile


def _single(c):
    return counts(c).by_arity.get(1, 0)


def _cx(c):
    return counts(c).by_arity.get(2, 0)


def test_single_controlled_unitary():
    rng = np.random.default_rng(0)
    for _ in range(20):
        c = Circuit(2, gates=[Gate("U", random_unitary(rng), ((1, 1),), 0)])
        t = transpile(c)
        assert is_transpiled(t)
        assert _cx(t) <= 2 and _single(t) <= 4
        assert equal_up_to_phase(operator(t), operator(c))


def test_cx_unchanged():
    c = Circuit(2, gates=[Gate("X", X_MAT, ((0, 1),), 1)])
    assert transpile(c) == c


def test_ccx():
    c = Circuit(3, gates=[Gate("X", X_MAT, ((0, 1), (1, 1)), 2)])
    t = transpile(c)
    assert _cx(t) == 6 and _single(t) <= 9
    assert np.allclose(operator(t), operator(c), atol=1e-12)


def test_negative_controls():
    c = Circuit(3, gates=[Gate("S", named_matrix("S"), ((0, 0), (2, 1)), 1)])
    assert equal_up_to_phase(operator(transpile(c)), operator(c))


@settings(max_examples=60)
@given(random_circuits(1, 5, 6))
def test_transpile_equivalence(c):
    t = transpile(c)
    assert is_transpiled(t)
    assert equal_up_to_phase(operator(t), operator(c))


def test_many_controls_without_free_qubits():
    rng = np.random.default_rng(4)
    for k in range(2, 6):
        ctl = tuple((q, int(rng.integers(2))) for q in range(k))
        c = Circuit(k + 1, gates=[Gate("U", random_unitary(rng), ctl, k)])
        assert equal_up_to_phase(operator(transpile(c)), operator(c))
        cx = Circuit(k + 1, gates=[Gate("X", X_MAT, ctl, k)])
        assert equal_up_to_phase(operator(transpile(cx)), operator(cx))


def test_ten_qubit_circuit():
    # borrowed dirty qubits must be restored: check column action on a sample of basis states
    rng = np.random.default_rng(9)
    c = Circuit(10)
    for k in (3, 5, 7, 9):
        ctl = tuple((int(q), int(rng.integers(2))) for q in rng.permutation(9)[:k])
        c.append(Gate("X", X_MAT, ctl, 9))
        c.append(Gate("U", random_unitary(rng), ctl, 9))
    t = transpile(c)
    from limqsp.simulator import run

    for col in rng.integers(0, 1 << 10, size=40):
        e = np.zeros(1 << 10, dtype=complex)
        e[col] = 1
        assert equal_up_to_phase(run(t, e), run(c, e))


def test_transpiled_algorithms_still_disentangle():
    for seed in range(5):
        psi = random_cliffordT_state(5, 20, seed)
        dd = build_from_statevector(psi)
        for algo, m in (("noanc", None), ("one", None), ("full", None), ("budget", 3)):
            t = transpile(disentangle(dd, algo, m))
            out, leak = run_main(t, psi)
            assert abs(out[0]) == pytest.approx(1, abs=1e-9) and leak < 1e-9


def test_example_transpiled_counts_are_bounded():
    dd = build_from_statevector(EXAMPLE)
    t = transpile(disentangle(dd, "noanc"))
    assert _cx(t) <= 4 * 2 + 4 * 6 + 4 * 8
