import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# the running example: three qubits, six nodes, three reduced paths
EXAMPLE = 2 / math.sqrt(23) * np.array(
    [1, 1, 1 / math.sqrt(2), 0.5j, -1, -1 / math.sqrt(2), 1 / math.sqrt(2), 1], dtype=complex
)


@pytest.fixture
def example_state():
    return EXAMPLE.copy()


def ghz(n: int) -> np.ndarray:
    v = np.zeros(1 << n, dtype=complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return v


def basis(n: int, k: int = 0) -> np.ndarray:
    v = np.zeros(1 << n, dtype=complex)
    v[k] = 1
    return v


def zero_main(n: int) -> np.ndarray:
    return basis(n, 0)


def run_disentangler(circ, psi):
    """Main amplitudes after running a disentangler on |anc_init>|psi>, plus leaked weight."""
    from limqsp.simulator import run_main

    return run_main(circ, np.asarray(psi, dtype=complex) / np.linalg.norm(psi))


@st.composite
def state_vectors(draw, min_qubits=1, max_qubits=5, structured=True):
    """Random complex vectors, sometimes with repeated, zeroed or phase-related blocks."""
    n = draw(st.integers(min_qubits, max_qubits))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    if structured:
        kind = draw(st.sampled_from(["plain", "zeros", "repeat", "phase", "cliffordT"]))
        if kind == "zeros":
            v[rng.random(1 << n) < 0.5] = 0
        elif kind == "repeat" and n >= 2:
            half = 1 << (n - 1)
            v[half:] = np.exp(1j * rng.uniform(-3, 3)) * v[:half][::-1 if rng.random() < 0.5 else 1]
        elif kind == "phase" and n >= 2:
            v = np.exp(1j * math.pi / 4 * rng.integers(0, 8, size=1 << n)) * (1 + rng.integers(0, 2, size=1 << n))
        elif kind == "cliffordT":
            from limqsp.simulator import random_cliffordT_state

            v = random_cliffordT_state(n, 4 * n, seed)
    if not np.any(np.abs(v) > 0):
        v[0] = 1
    return np.asarray(v, dtype=complex)


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@st.composite
def random_circuits(draw, min_qubits=1, max_qubits=4, max_gates=8, max_controls=None):
    """Circuits of random multi-controlled unitaries, some of them named."""
    from limqsp.circuit import Circuit, Gate, label_for, named_matrix

    total = draw(st.integers(min_qubits, max_qubits))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    c = Circuit(total)
    for _ in range(draw(st.integers(0, max_gates))):
        t = int(rng.integers(total))
        others = [q for q in range(total) if q != t]
        hi = len(others) if max_controls is None else min(max_controls, len(others))
        k = int(rng.integers(0, hi + 1))
        ctl = tuple((int(q), int(rng.integers(2))) for q in rng.permutation(others)[:k])
        kind = rng.integers(3)
        if kind == 0:
            name = ["X", "Z", "S", "Sdg", "T", "H", "Y"][int(rng.integers(7))]
            m = named_matrix(name)
        else:
            m = random_unitary(rng)
            name = label_for(m)
        c.append(Gate(name, m, ctl, t))
    return c


def operator(circ) -> np.ndarray:
    """Dense operator of a circuit, column by column."""
    from limqsp.simulator import run

    dim = 1 << circ.total_qubits
    return np.column_stack([run(circ, basis(circ.total_qubits, k)) for k in range(dim)])


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[k]) < 1e-12:
        return bool(np.allclose(a, b, atol=tol))
    ph = a[k] / b[k]
    return abs(abs(ph) - 1) < tol and bool(np.allclose(a, ph * b, atol=tol))
