"""Statevector oracle: gate application, circuit execution, fidelity, random states.

Qubit j is bit j of the amplitude index. Main-register qubits come first,
ancillas occupy the bits above them.
"""

from __future__ import annotations

import os
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .circuit import Circuit, Gate

DEFAULT_CAP = 24
# above this width the sparse backend is faster for flag-style ancilla registers
DENSE_PREFERRED = 16
_DROP = 1e-15


class SimulationError(ValueError):
    pass


def verify_cap() -> int:
    """Maximum total qubits for dense simulation (env ``QSP_VERIFY_CAP``)."""
    raw = os.environ.get("QSP_VERIFY_CAP")
    if raw is None:
        return DEFAULT_CAP
    try:
        return int(raw)
    except ValueError as exc:
        raise SimulationError(f"QSP_VERIFY_CAP must be an integer, got {raw!r}") from exc


def apply_gate(state: np.ndarray, gate: Gate, num_qubits: int | None = None) -> np.ndarray:
    """Apply a (multi-)controlled single-qubit gate; returns a new array."""
    state = np.array(state, dtype=complex, copy=True)
    _apply_inplace(state, gate, num_qubits)
    return state


def _apply_inplace(state: np.ndarray, gate: Gate, num_qubits: int | None = None) -> None:
    q = num_qubits if num_qubits is not None else int(len(state)).bit_length() - 1
    if len(state) != 1 << q:
        raise SimulationError("state length is not 2^num_qubits")
    qubits = [gate.target] + [c for c, _ in gate.controls]
    if any(not 0 <= x < q for x in qubits):
        raise SimulationError(f"gate touches qubit outside 0..{q - 1}")
    view = state.reshape((2,) * q) if q else state
    index: list = [slice(None)] * q
    for c, pol in gate.controls:
        index[q - 1 - c] = pol
    sub = view[tuple(index)]
    # axis of the target inside ``sub`` after integer indexing removed control axes
    axis = sum(1 for a in range(q - 1 - gate.target) if not isinstance(index[a], int))
    sub = np.moveaxis(sub, axis, 0)
    m = gate.matrix
    a0 = sub[0].copy()
    a1 = sub[1]
    if m[0, 1] == 0 and m[1, 0] == 0:
        if m[0, 0] != 1:
            sub[0] *= m[0, 0]
        if m[1, 1] != 1:
            sub[1] *= m[1, 1]
        return
    new1 = m[1, 0] * a0 + m[1, 1] * a1
    sub[0] = m[0, 0] * a0 + m[0, 1] * a1
    sub[1] = new1


def run(circuit: Circuit, init: np.ndarray) -> np.ndarray:
    """Dense simulation of ``circuit`` on ``init`` (length 2^(n+a))."""
    total = circuit.total_qubits
    init = np.asarray(init, dtype=complex)
    if len(init) != 1 << total:
        raise SimulationError(f"initial state has length {len(init)}, expected {1 << total}")
    state = init.copy()
    for g in circuit.gates:
        _apply_inplace(state, g, total)
    return state


def embed(main: np.ndarray, circuit: Circuit) -> np.ndarray:
    """``|ancilla_init> (x) |main>`` as a dense vector."""
    main = np.asarray(main, dtype=complex)
    offset = sum(bit << (circuit.n + i) for i, bit in enumerate(circuit.ancilla_init))
    out = np.zeros(1 << circuit.total_qubits, dtype=complex)
    out[offset:offset + len(main)] = main
    return out


def fidelity_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """``|<a|b>|`` for normalized vectors."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise SimulationError("dimension mismatch")
    return float(min(1.0, abs(np.vdot(a, b))))


def normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)


class SparseState:
    """Sparse amplitudes keyed by basis index; suited to registers of flag ancillas.

    Basis indices are stored as rows of 64-bit words so the register can be
    wider than 64 qubits.
    """

    def __init__(self, num_qubits: int, rows: np.ndarray, amps: np.ndarray):
        self.num_qubits = num_qubits
        self.words = max(1, (num_qubits + 63) // 64)
        self.rows = rows.reshape(-1, self.words).astype(np.uint64)
        self.amps = np.asarray(amps, dtype=complex)

    @classmethod
    def from_dense_main(cls, main: np.ndarray, circuit: Circuit) -> SparseState:
        total = circuit.total_qubits
        words = max(1, (total + 63) // 64)
        nz = np.nonzero(np.abs(main) > 0)[0]
        rows = np.zeros((len(nz), words), dtype=np.uint64)
        rows[:, 0] = nz.astype(np.uint64)
        for i, bit in enumerate(circuit.ancilla_init):
            if bit:
                q = circuit.n + i
                rows[:, q // 64] |= np.uint64(1) << np.uint64(q % 64)
        return cls(total, rows, np.asarray(main, dtype=complex)[nz])

    def _bit(self, q: int) -> np.ndarray:
        return ((self.rows[:, q // 64] >> np.uint64(q % 64)) & np.uint64(1)).astype(bool)

    def apply(self, gate: Gate) -> None:
        sel = np.ones(len(self.amps), dtype=bool)
        for c, pol in gate.controls:
            sel &= self._bit(c) == bool(pol)
        if not sel.any():
            return
        t = gate.target
        w, sh = t // 64, np.uint64(t % 64)
        one = np.uint64(1) << sh
        m = gate.matrix
        if m[0, 1] == 0 and m[1, 0] == 0:
            tb = self._bit(t)
            self.amps[sel & ~tb] *= m[0, 0]
            self.amps[sel & tb] *= m[1, 1]
            return
        if m[0, 0] == 0 and m[1, 1] == 0:
            tb = self._bit(t)
            self.rows[sel, w] ^= one
            self.amps[sel & ~tb] *= m[1, 0]
            self.amps[sel & tb] *= m[0, 1]
            return
        rows = self.rows[sel]
        amps = self.amps[sel]
        tb = ((rows[:, w] >> sh) & np.uint64(1)).astype(bool)
        keys = rows.copy()
        keys[:, w] &= ~one
        uniq, inv = np.unique(keys, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        a0 = np.zeros(len(uniq), dtype=complex)
        a1 = np.zeros(len(uniq), dtype=complex)
        a0[inv[~tb]] = amps[~tb]
        a1[inv[tb]] = amps[tb]
        n0 = m[0, 0] * a0 + m[0, 1] * a1
        n1 = m[1, 0] * a0 + m[1, 1] * a1
        r1 = uniq.copy()
        r1[:, w] |= one
        new_rows = np.concatenate([self.rows[~sel], uniq, r1])
        new_amps = np.concatenate([self.amps[~sel], n0, n1])
        keep = np.abs(new_amps) > _DROP
        self.rows, self.amps = new_rows[keep], new_amps[keep]

    def main_amplitudes(self, circuit: Circuit) -> tuple[np.ndarray, float]:
        """Main-register amplitudes on the restored-ancilla branch and the leaked weight."""
        target = np.zeros(self.words, dtype=np.uint64)
        for i, bit in enumerate(circuit.ancilla_init):
            if bit:
                q = circuit.n + i
                target[q // 64] |= np.uint64(1) << np.uint64(q % 64)
        main_mask = np.uint64((1 << circuit.n) - 1) if circuit.n < 64 else np.uint64(2**64 - 1)
        high = self.rows.copy()
        high[:, 0] &= ~main_mask
        ok = np.all(high == target, axis=1)
        out = np.zeros(1 << circuit.n, dtype=complex)
        np.add.at(out, (self.rows[ok, 0] & main_mask).astype(np.int64), self.amps[ok])
        total = float(np.sum(np.abs(self.amps) ** 2))
        leaked = float(np.sum(np.abs(self.amps[~ok]) ** 2)) / max(total, 1e-300)
        return out, leaked


def run_main(circuit: Circuit, main: np.ndarray, cap: int | None = None) -> tuple[np.ndarray, float]:
    """Run ``circuit`` on ``|ancilla_init>|main>``.

    Returns the main-register amplitudes on the branch where the ancillas hold
    their initial values, plus the fraction of the squared norm that leaked
    elsewhere. Dense
    simulation is used up to ``cap`` total qubits, the sparse backend beyond.
    """
    cap = verify_cap() if cap is None else cap
    main = np.asarray(main, dtype=complex)
    if len(main) != 1 << circuit.n:
        raise SimulationError("main state does not match circuit width")
    if circuit.total_qubits <= min(cap, max(DENSE_PREFERRED, circuit.n)):
        full = run(circuit, embed(main, circuit))
        offset = sum(bit << (circuit.n + i) for i, bit in enumerate(circuit.ancilla_init))
        out = full[offset:offset + (1 << circuit.n)].copy()
        return out, float(max(0.0, 1 - np.sum(np.abs(out) ** 2) / max(np.sum(np.abs(main) ** 2), 1e-300)))
    if circuit.n > cap:
        raise SimulationError(f"{circuit.n} main qubits exceed the verification cap {cap}")
    st = SparseState.from_dense_main(main, circuit)
    for g in circuit.gates:
        st.apply(g)
    return st.main_amplitudes(circuit)


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])
_T = np.diag([1, np.exp(1j * np.pi / 4)])


def random_cliffordT_state(n: int, depth: int | None = None, seed: int = 0) -> np.ndarray:
    """Apply ``depth`` gates drawn uniformly from {H, S, T, CX} to |0...0>."""
    from .circuit import Gate

    if n < 1:
        raise ValueError("n must be at least 1")
    depth = 3 * n if depth is None else depth
    rng = np.random.default_rng(seed)
    state = np.zeros(1 << n, dtype=complex)
    state[0] = 1
    names = ("H", "S", "T", "CX")
    for _ in range(depth):
        kind = names[int(rng.integers(4))]
        if kind == "CX" and n < 2:
            kind = "H"
        if kind == "CX":
            c, t = (int(x) for x in rng.choice(n, size=2, replace=False))
            g = Gate("X", np.array([[0, 1], [1, 0]], dtype=complex), ((c, 1),), t)
        else:
            t = int(rng.integers(n))
            g = Gate(kind, {"H": _H, "S": _S, "T": _T}[kind], (), t)
        _apply_inplace(state, g, n)
    return state / np.linalg.norm(state)


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def random_product_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = np.ones(1, dtype=complex)
    for _ in range(n):
        q = rng.normal(size=2) + 1j * rng.normal(size=2)
        v = np.kron(q / np.linalg.norm(q), v)
    return v
