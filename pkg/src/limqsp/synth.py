"""Disentangling circuits from LimTDDs and state-preparation front ends.

Every ``state_pre_*`` function returns a circuit that maps the diagram's
(normalized) state, with ancillas in their initial values, to |0...0> on the
main register. ``prepare_state`` inverts it to obtain a preparation circuit.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .circuit import X_MAT, Circuit, Gate, Controls, inverse, label_for, with_extra_control
from .dd import LimTDD, Node, build_from_statevector, norm_table
from .iso import GroupKind
from .lim import LIM

ALGORITHMS = ("noanc", "one", "full", "budget")


class SynthesisError(ValueError):
    pass


def rotation_from_ratio(c: complex) -> np.ndarray:
    """``(1/sqrt(1+|c|^2)) [[1, conj(c)], [-c, 1]]``: zeroes the |1> amplitude of (w0, c*w0)."""
    c = complex(c)
    s = 1 / math.sqrt(1 + abs(c) ** 2)
    return s * np.array([[1, c.conjugate()], [-c, 1]], dtype=complex)


def _fmt(c: complex) -> str:
    if abs(c.imag) < 1e-12:
        return f"{c.real:.6g}"
    return f"{c.real:.6g}{c.imag:+.6g}j"


def rotation_gate(c: complex, target: int, controls: Controls = ()) -> Gate | None:
    if c == 0:
        return None
    return Gate(f"R({_fmt(complex(c))})", rotation_from_ratio(c), controls, target)


def factor_gates(lim: LIM, controls: Controls = ()) -> list[Gate]:
    """One gate F_j^dagger on qubit j per non-identity factor, top qubit first."""
    out = []
    for j in reversed(range(lim.width)):
        f = lim.factors[j]
        if f.is_identity:
            continue
        m = f.dagger_matrix()
        out.append(Gate(label_for(m), m, controls, j))
    return out


def eliminate_root_lim(dd: LimTDD) -> tuple[list[Gate], complex]:
    """Uncontrolled gates removing the root operator, and the residual scalar."""
    return factor_gates(dd.root.weight), dd.root.weight.scalar


def residual_scalar(dd: LimTDD, norms: dict[int, float] | None = None) -> complex:
    """Global scalar left on |0...0> after disentangling."""
    norms = norm_table(dd) if norms is None else norms
    return dd.root.weight.scalar * norms[dd.root.target.id]


def _ratio(v: Node, norms: dict[int, float]) -> complex:
    if v.high.is_zero:
        return 0j
    return v.high.weight.scalar * norms[v.high.target.id] / norms[v.low.target.id]


def _mcx(target: int, controls: Controls) -> Gate:
    return Gate("X", X_MAT, controls, target)


def _check_dd(dd: LimTDD) -> None:
    if dd.root.is_zero:
        raise SynthesisError("cannot disentangle the zero diagram")


def state_pre_1(dd: LimTDD) -> Circuit:
    """Ancilla-free disentangler; sub-circuits are memoized per node."""
    _check_dd(dd)
    norms = norm_table(dd)
    circ = Circuit(dd.num_qubits)
    circ.extend(eliminate_root_lim(dd)[0])
    memo: dict[int, list[Gate]] = {}

    def rec(v: Node) -> list[Gate]:
        if v.is_terminal:
            return []
        if v.id in memo:
            return memo[v.id]
        q = v.level
        out: list[Gate] = []
        if not v.high.is_zero:
            out += factor_gates(v.high.weight, ((q, 1),))
        if v.is_branch:
            out += with_extra_control(rec(v.low.target), ((q, 0),))
            out += with_extra_control(rec(v.high.target), ((q, 1),))
        else:
            out += rec(v.low.target)
        g = rotation_gate(_ratio(v, norms), q)
        if g is not None:
            out.append(g)
        memo[v.id] = out
        return out

    circ.extend(rec(dd.root.target))
    return circ


def _pre2_gates(v: Node, anc: int, norms: dict[int, float], p: Controls = ()) -> list[Gate]:
    """Single-ancilla disentangler body for the subtree at ``v`` under branch condition ``p``."""
    out: list[Gate] = []

    def rec(v: Node, p: Controls) -> None:
        if v.is_terminal:
            return
        q = v.level
        if not v.high.is_zero:
            out.extend(factor_gates(v.high.weight, ((anc, 1), (q, 1))))
        if v.is_branch:
            out.append(_mcx(anc, p + ((q, 1),)))
            rec(v.low.target, p + ((q, 0),))
            out.append(_mcx(anc, p))
            rec(v.high.target, p + ((q, 1),))
            out.append(_mcx(anc, p + ((q, 0),)))
        else:
            rec(v.low.target, p)
        g = rotation_gate(_ratio(v, norms), q, ((anc, 1),))
        if g is not None:
            out.append(g)

    rec(v, p)
    return out


def state_pre_2(dd: LimTDD) -> Circuit:
    """One ancilla (initialized |1>) marks the open subtree."""
    _check_dd(dd)
    n = dd.num_qubits
    norms = norm_table(dd)
    circ = Circuit(n, 1, [1])
    circ.extend(eliminate_root_lim(dd)[0])
    circ.extend(_pre2_gates(dd.root.target, n, norms))
    return circ


@dataclass
class AncillaPlan:
    """Ancilla assignment for the marked-subtree algorithms."""

    mode: str
    assignment: dict[int, int] = field(default_factory=dict)
    reserved: int | None = None
    order: list[Node] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.assignment) + (self.reserved is not None)


def _indegrees(dd: LimTDD) -> dict[int, int]:
    deg: dict[int, int] = {}
    for v in dd.nodes():
        if v.is_terminal:
            continue
        for e in v.successors():
            if not e.is_zero and not e.target.is_terminal:
                deg[e.target.id] = deg.get(e.target.id, 0) + 1
    return deg


def plan_ancillas(dd: LimTDD, budget: int | None = None) -> AncillaPlan:
    """Breadth-first allocation; ``budget=None`` gives every non-terminal its own ancilla."""
    n = dd.num_qubits
    deg = _indegrees(dd)
    root = dd.root.target
    slots: dict[int, int] = {}
    avail = math.inf if budget is None else budget - 1
    order: list[Node] = []
    if root.is_terminal:
        return AncillaPlan("full" if budget is None else f"budget({budget})", {}, None if budget is None else n, [])

    def allocate(u: Node) -> None:
        nonlocal avail
        if u.id not in slots and avail > 0:
            slots[u.id] = n + len(slots)
            avail -= 1

    allocate(root)
    queue = deque([root])
    while queue:
        v = queue.popleft()
        order.append(v)
        for e in v.successors():
            u = e.target
            if e.is_zero or u.is_terminal:
                continue
            deg[u.id] -= 1
            allocate(u)
            if deg[u.id] == 0 and u.id in slots:
                queue.append(u)
    reserved = None if budget is None else n + len(slots)
    return AncillaPlan("full" if budget is None else f"budget({budget})", slots, reserved, order)


def _marked_circuit(dd: LimTDD, plan: AncillaPlan) -> Circuit:
    n = dd.num_qubits
    norms = norm_table(dd)
    init = [0] * plan.count
    root = dd.root.target
    if root.id in plan.assignment:
        init[plan.assignment[root.id] - n] = 1
    if plan.reserved is not None:
        init[plan.reserved - n] = 1
    circ = Circuit(n, plan.count, init)
    circ.extend(eliminate_root_lim(dd)[0])
    slot = plan.assignment
    for v in plan.order:
        q, a = v.level, slot[v.id]
        if not v.high.is_zero:
            circ.extend(factor_gates(v.high.weight, ((a, 1), (q, 1))))
        for b, e in enumerate(v.successors()):
            u = e.target
            if e.is_zero or u.is_terminal:
                continue
            if u.id in slot:
                circ.append(_mcx(slot[u.id], ((q, b), (a, 1))))
    for v in reversed(plan.order):
        q, a = v.level, slot[v.id]
        low, high = v.successors()
        shared = not high.is_zero and low.target is high.target
        if shared and not low.target.is_terminal and low.target.id not in slot:
            sub = _pre2_gates(low.target, plan.reserved, norms)
            circ.extend(with_extra_control(sub, ((a, 1),)))
        else:
            for b, e in enumerate((low, high)):
                u = e.target
                if e.is_zero or u.is_terminal:
                    continue
                if u.id in slot:
                    circ.append(_mcx(slot[u.id], ((q, b), (a, 1))))
                else:
                    sub = _pre2_gates(u, plan.reserved, norms)
                    circ.extend(with_extra_control(sub, ((q, b), (a, 1))))
        g = rotation_gate(_ratio(v, norms), q, ((a, 1),))
        if g is not None:
            circ.append(g)
    return circ


def state_pre_3(dd: LimTDD) -> Circuit:
    """One ancilla per non-terminal node; the root's starts in |1>."""
    _check_dd(dd)
    return _marked_circuit(dd, plan_ancillas(dd, None))


def state_pre_4(dd: LimTDD, m: int) -> Circuit:
    """At most ``m`` ancillas: m-1 node flags plus one reserved for fallback subtrees."""
    _check_dd(dd)
    if m < 1:
        raise SynthesisError("ancilla budget must be at least 1")
    if m == 1:
        return state_pre_2(dd)
    return _marked_circuit(dd, plan_ancillas(dd, m))


def disentangle(dd: LimTDD, algo: str = "noanc", m: int | None = None) -> Circuit:
    if algo == "noanc":
        return state_pre_1(dd)
    if algo == "one":
        return state_pre_2(dd)
    if algo == "full":
        return state_pre_3(dd)
    if algo == "budget":
        if m is None:
            raise SynthesisError("budget algorithm needs an ancilla count")
        return state_pre_4(dd, m)
    raise SynthesisError(f"unknown algorithm {algo!r}")


def prepare_state(
    amps,
    algo: str = "noanc",
    m: int | None = None,
    group: GroupKind | str = GroupKind.XP,
) -> Circuit:
    """Circuit mapping ``|anc_init>|0...0>`` to ``|anc_init>|psi>`` (up to global phase)."""
    amps = np.asarray(amps, dtype=complex).reshape(-1)
    norm = np.linalg.norm(amps)
    if norm == 0:
        from .dd import ZeroStateError

        raise ZeroStateError("state vector is zero")
    dd = build_from_statevector(amps / norm, None, group)
    circ = disentangle(dd, algo, m)
    res = residual_scalar(dd)
    if abs(abs(res) - 1) > 1e-9:
        raise SynthesisError(f"residual scalar {res} does not have modulus 1")
    return inverse(circ)


@dataclass
class UcrResult:
    circuit: Circuit
    blocks: int


def _level_blocks(psi: np.ndarray, n: int, t: int) -> list[np.ndarray]:
    """2x2 unitaries for every prefix of the top ``t`` qubits at level ``t``."""
    size = 1 << (n - t)
    out = []
    for p in range(1 << t):
        blk = psi[p * size:(p + 1) * size]
        half = size // 2
        if t == n - 1:
            a0, a1 = blk[0], blk[1]
        else:
            a0, a1 = np.linalg.norm(blk[:half]), np.linalg.norm(blk[half:])
        r = math.hypot(abs(a0), abs(a1))
        if r < 1e-14:
            out.append(np.eye(2, dtype=complex))
            continue
        a0, a1 = a0 / r, a1 / r
        out.append(np.array([[a0, -np.conj(a1)], [a1, np.conj(a0)]], dtype=complex))
    return out


def baseline_ucr_with_blocks(amps) -> UcrResult:
    """Level-by-level multiplexed rotations; phases are folded into the last level."""
    psi = np.asarray(amps, dtype=complex).reshape(-1)
    size = len(psi)
    if size == 0 or size & (size - 1):
        raise SynthesisError("state length must be a power of two")
    n = size.bit_length() - 1
    psi = psi / np.linalg.norm(psi)
    circ = Circuit(n)
    # the multiplexor at level t has 2^t blocks whatever the data
    blocks = (1 << n) - 1
    for t in range(n):
        q = n - 1 - t
        mats = _level_blocks(psi, n, t)
        if all(np.allclose(m, mats[0], atol=1e-12) for m in mats):
            if not np.allclose(mats[0], np.eye(2), atol=1e-12):
                circ.append(Gate(label_for(mats[0]), mats[0], (), q))
            continue
        for p, mat in enumerate(mats):
            if np.allclose(mat, np.eye(2), atol=1e-12):
                continue
            ctl = tuple((n - 1 - i, (p >> (t - 1 - i)) & 1) for i in range(t))
            circ.append(Gate(label_for(mat), mat, ctl, q))
    return UcrResult(circ, blocks)


def baseline_ucr(amps) -> Circuit:
    return baseline_ucr_with_blocks(amps).circuit
