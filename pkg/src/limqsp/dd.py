"""LimTDD construction, evaluation, norms and statistics for state vectors."""

from __future__ import annotations

import cmath
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .iso import GroupKind, IsoReference, find_lim
from .lim import LIM, LimFactor

ZERO_TOL = 1e-12
_BUCKET = 1e-7


class StateFormatError(ValueError):
    """Amplitude array has an invalid shape."""


class ZeroStateError(ValueError):
    """The all-zero vector has no diagram."""


class Node:
    """Diagram node. The terminal has level -1 and no edges."""

    __slots__ = ("id", "level", "low", "high", "vector", "_ref")

    def __init__(self, id: int, level: int, low: Edge | None = None, high: Edge | None = None):
        self.id = id
        self.level = level
        self.low = low
        self.high = high
        self.vector: np.ndarray = np.ones(1, dtype=complex)
        self._ref: IsoReference | None = None

    @property
    def is_terminal(self) -> bool:
        return self.level < 0

    @property
    def ref(self) -> IsoReference:
        if self._ref is None:
            self._ref = IsoReference(self.vector)
        return self._ref

    def successors(self) -> tuple[Edge, Edge]:
        assert self.low is not None and self.high is not None
        return self.low, self.high

    @property
    def is_branch(self) -> bool:
        """Two nonzero edges to distinct nodes."""
        if self.is_terminal or self.high.is_zero or self.low.is_zero:
            return False
        return self.low.target is not self.high.target

    def __repr__(self) -> str:
        return "Node(terminal)" if self.is_terminal else f"Node(id={self.id}, level={self.level})"


@dataclass(frozen=True)
class Edge:
    target: Node
    weight: LIM

    @property
    def is_zero(self) -> bool:
        return self.weight.is_zero


@dataclass(frozen=True)
class DiagramStats:
    total_nodes: int
    non_terminal: int
    branch_nodes: int
    reduced_paths: int

    def as_dict(self) -> dict:
        return {
            "total_nodes": self.total_nodes,
            "non_terminal": self.non_terminal,
            "branch_nodes": self.branch_nodes,
            "reduced_paths": self.reduced_paths,
        }


class LimTDD:
    """A rooted LIM-weighted decision diagram over ``num_qubits`` qubits."""

    def __init__(self, root: Edge, num_qubits: int, group: GroupKind, terminal: Node, store: dict):
        self.root = root
        self.num_qubits = num_qubits
        self.group = group
        self.terminal = terminal
        self.store = store

    def nodes(self) -> list[Node]:
        """Reachable nodes, parents before children, top level first."""
        seen: dict[int, Node] = {}
        stack = [self.root.target]
        while stack:
            v = stack.pop()
            if v.id in seen:
                continue
            seen[v.id] = v
            if not v.is_terminal:
                for e in v.successors():
                    if not e.is_zero:
                        stack.append(e.target)
        return sorted(seen.values(), key=lambda v: (-v.level, v.id))

    def signature(self) -> tuple:
        """Structural fingerprint used to compare diagrams for identity."""
        order = {v.id: i for i, v in enumerate(self.nodes())}
        rows = []
        for v in self.nodes():
            if v.is_terminal:
                rows.append(("T",))
                continue
            rows.append((v.level,) + tuple(
                (order.get(e.target.id, -1) if not e.is_zero else -1, e.weight.key(12)) for e in v.successors()))
        return (self.num_qubits, order[self.root.target.id], self.root.weight.key(12), tuple(rows))


class _Builder:
    def __init__(self, group: GroupKind):
        self.group = group
        self.terminal = Node(0, -1)
        self.next_id = 1
        self.buckets: dict[tuple, list[Node]] = defaultdict(list)
        self.store: dict[tuple, Node] = {}

    def zero_edge(self) -> Edge:
        return Edge(self.terminal, LIM(0j))

    def edge(self, x: np.ndarray, level: int) -> Edge:
        if float(np.linalg.norm(x)) <= ZERO_TOL:
            return self.zero_edge()
        if level < 0:
            return Edge(self.terminal, LIM(complex(x[0])))
        mag = np.abs(x) / np.linalg.norm(x)
        inv = (float(np.sum(mag**4)), float(np.sum(mag**6)))
        key = (round(inv[0] / _BUCKET), round(inv[1] / _BUCKET))
        for dk0 in (0, -1, 1):
            for dk1 in (0, -1, 1):
                for node in self.buckets.get((level, key[0] + dk0, key[1] + dk1), ()):
                    lim = find_lim(x, node.ref, self.group)
                    if lim is not None:
                        return Edge(node, lim)
        half = len(x) // 2
        e0 = self.edge(x[:half], level - 1)
        e1 = self.edge(x[half:], level - 1)
        return self.make_node(level, e0, e1)

    def make_node(self, level: int, e0: Edge, e1: Edge) -> Edge:
        """Create (or reuse) a canonical node; return the edge reproducing ``|0>e0 + |1>e1``."""
        top = LimFactor()
        if e0.is_zero:
            # |1> L1 n1 = (X (x) L1)|0>n1
            low_t, high_t, high = e1.target, self.terminal, LIM(0j)
            incoming = e1.weight
            top = LimFactor(1, 0.0)
        else:
            low_t, high_t = e0.target, e1.target
            incoming = e0.weight
            high = e0.weight.inverse().compose(e1.weight) if not e1.is_zero else LIM(0j)
            if high.is_zero:
                high_t = self.terminal
            elif self.group is not GroupKind.SCALAR and abs(high.scalar) > 1 + 1e-9:
                # |0>n0 + |1>H n1 = (X (x) H)(|0>n1 + |1>H^-1 n0)
                incoming = incoming.compose(high)
                low_t, high_t = high_t, low_t
                high = high.inverse()
                top = LimFactor(1, 0.0)
        if not high.is_zero:
            lam = high.scalar
            phi = 0.0
            if self.group is GroupKind.XP:
                phi = cmath.phase(lam)
            elif self.group is GroupKind.PAULI:
                if lam.real < -1e-12 or (abs(lam.real) <= 1e-12 and lam.imag < 0):
                    phi = math.pi
            if phi:
                # |0>a + |1>e^{i phi}r b = (P(phi) (x) I)(|0>a + |1>r b)
                high = LIM(lam * cmath.exp(-1j * phi), high.factors)
                top = LimFactor(top.b, top.theta + phi)
        node = self._intern(level, low_t, high_t, high)
        return Edge(node, incoming.extend(top))

    def _intern(self, level: int, low_t: Node, high_t: Node, high: LIM) -> Node:
        key = (level, low_t.id, high_t.id, high.key(12))
        node = self.store.get(key)
        if node is not None:
            return node
        width = level
        node = Node(self.next_id, level, Edge(low_t, LIM.identity(width)), Edge(high_t, high))
        self.next_id += 1
        v0 = low_t.vector
        v1 = high.apply(high_t.vector) if not high.is_zero else np.zeros_like(v0)
        node.vector = np.concatenate([v0, v1])
        self.store[key] = node
        mag = np.abs(node.vector) / np.linalg.norm(node.vector)
        bkey = (level, round(float(np.sum(mag**4)) / _BUCKET), round(float(np.sum(mag**6)) / _BUCKET))
        self.buckets[bkey].append(node)
        return node


def _check_length(amps: np.ndarray, n: int | None) -> int:
    size = len(amps)
    if size == 0 or size & (size - 1):
        raise StateFormatError(f"length {size} is not a power of two")
    k = size.bit_length() - 1
    if n is not None and n != k:
        raise StateFormatError(f"length {size} does not match {n} qubits")
    return k


def build_from_statevector(amps, n: int | None = None, group: GroupKind | str = GroupKind.XP) -> LimTDD:
    """Build the canonical diagram of ``amps`` (index k = |b_{n-1} ... b_0>)."""
    group = GroupKind.parse(group)
    amps = np.asarray(amps, dtype=complex).reshape(-1)
    n = _check_length(amps, n)
    norm = float(np.linalg.norm(amps))
    if norm == 0 or not np.isfinite(norm):
        raise ZeroStateError("state vector is zero")
    b = _Builder(group)
    unit = amps / norm
    root = b.edge(unit, n - 1)
    if root.is_zero:
        raise ZeroStateError("state vector is numerically zero")
    root = Edge(root.target, root.weight.scaled(norm))
    return LimTDD(root, n, group, b.terminal, b.store)


def node_vector(v: Node) -> np.ndarray:
    """Dense semantics of a node, recomputed from its edges."""
    cache: dict[int, np.ndarray] = {}

    def rec(u: Node) -> np.ndarray:
        if u.is_terminal:
            return np.ones(1, dtype=complex)
        if u.id in cache:
            return cache[u.id]
        parts = []
        for e in u.successors():
            if e.is_zero:
                parts.append(np.zeros(1 << u.level, dtype=complex))
            else:
                parts.append(e.weight.apply(rec(e.target)))
        out = np.concatenate(parts)
        cache[u.id] = out
        return out

    return rec(v)


def semantics_to_statevector(dd: LimTDD) -> np.ndarray:
    if dd.root.is_zero:
        return np.zeros(1 << dd.num_qubits, dtype=complex)
    return dd.root.weight.apply(node_vector(dd.root.target))


def node_norm(dd: LimTDD, v: Node, cache: dict[int, float] | None = None) -> float:
    """2-norm of a node's semantics via the edge-scalar recurrence."""
    if cache is None:
        cache = {}

    def rec(u: Node) -> float:
        if u.is_terminal:
            cache[u.id] = 1.0
            return 1.0
        if u.id in cache:
            return cache[u.id]
        s = 0.0
        for e in u.successors():
            if not e.is_zero:
                s += abs(e.weight.scalar) ** 2 * rec(e.target) ** 2
        cache[u.id] = math.sqrt(s)
        return cache[u.id]

    return rec(v)


def norm_table(dd: LimTDD) -> dict[int, float]:
    cache: dict[int, float] = {}
    for v in reversed(dd.nodes()):
        node_norm(dd, v, cache)
    return cache


def stats(dd: LimTDD) -> DiagramStats:
    nodes = dd.nodes()
    paths: dict[int, int] = {}
    for v in reversed(nodes):
        if v.is_terminal:
            paths[v.id] = 1
            continue
        kids = {e.target.id for e in v.successors() if not e.is_zero}
        paths[v.id] = sum(paths[k] for k in kids)
    non_terminal = sum(1 for v in nodes if not v.is_terminal)
    return DiagramStats(
        total_nodes=len(nodes),
        non_terminal=non_terminal,
        branch_nodes=sum(1 for v in nodes if v.is_branch),
        reduced_paths=paths[dd.root.target.id],
    )


def find_iso(a: Node, b: Node, group: GroupKind | str) -> LIM | None:
    """LIM O with |a> = O|b> for two nodes at the same level, if one is found."""
    group = GroupKind.parse(group)
    if a.level != b.level:
        raise ValueError("nodes must share a level")
    if a is b:
        return LIM.identity(max(a.level + 1, 0))
    if a.is_terminal:
        return LIM(1.0)
    return find_lim(a.vector, b.ref, group)


def iter_edges(dd: LimTDD) -> Iterator[tuple[Node, int, Edge]]:
    for v in dd.nodes():
        if not v.is_terminal:
            for b, e in enumerate(v.successors()):
                yield v, b, e


def to_dot(dd: LimTDD) -> str:
    """Graphviz rendering: dashed low edges, solid high edges, LIM labels."""
    names = {}
    for v in dd.nodes():
        names[v.id] = "t" if v.is_terminal else f"v{v.id}"
    lines = ["digraph limtdd {", "  rankdir=TB;", '  root [shape=point];']
    for v in dd.nodes():
        label = "1" if v.is_terminal else f"q{v.level}"
        shape = "box" if v.is_terminal else "circle"
        lines.append(f'  {names[v.id]} [label="{label}", shape={shape}];')
    lines.append(f'  root -> {names[dd.root.target.id]} [label="{dd.root.weight}"];')
    for v, b, e in iter_edges(dd):
        if e.is_zero:
            continue
        style = "dashed" if b == 0 else "solid"
        lab = "" if (e.weight.is_identity_operator and e.weight.scalar == 1) else str(e.weight)
        lines.append(f'  {names[v.id]} -> {names[e.target.id]} [style={style}, label="{lab}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
