"""Gate-level IR: multi-controlled single-qubit gates over main + ancilla registers."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

Controls = tuple[tuple[int, int], ...]

UNITARY_TOL = 1e-10

X_MAT = np.array([[0, 1], [1, 0]], dtype=complex)
H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

_NAMED: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": X_MAT,
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "H": H_MAT,
    "S": np.diag([1, 1j]),
    "Sdg": np.diag([1, -1j]),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "Tdg": np.diag([1, np.exp(-1j * math.pi / 4)]),
}
_DAGGER_LABEL = {"S": "Sdg", "Sdg": "S", "T": "Tdg", "Tdg": "T"}


class CircuitError(ValueError):
    pass


def named_matrix(label: str) -> np.ndarray:
    return _NAMED[label].copy()


def label_for(matrix: np.ndarray) -> str:
    """Best-effort name for a 2x2 matrix."""
    for name, m in _NAMED.items():
        if np.allclose(matrix, m, atol=1e-12):
            return name
    if abs(matrix[0, 1]) < 1e-12 and abs(matrix[1, 0]) < 1e-12 and abs(matrix[0, 0] - 1) < 1e-12:
        return f"P({np.angle(matrix[1, 1]):.6g})"
    return "U"


def is_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(2))) < tol)


@dataclass(frozen=True, eq=False)
class Gate:
    """``matrix`` on ``target`` when every ``(qubit, polarity)`` control holds."""

    label: str
    matrix: np.ndarray
    controls: Controls = ()
    target: int = 0

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex).reshape(2, 2)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        ctl = tuple((int(q), int(p)) for q, p in self.controls)
        object.__setattr__(self, "controls", ctl)
        object.__setattr__(self, "target", int(self.target))
        qs = [q for q, _ in ctl]
        if len(set(qs)) != len(qs):
            raise CircuitError("duplicate control qubit")
        if self.target in qs:
            raise CircuitError("control equals target")
        if any(p not in (0, 1) for _, p in ctl):
            raise CircuitError("control polarity must be 0 or 1")
        if not is_unitary(m):
            raise CircuitError(f"matrix of gate {self.label} is not unitary")

    @property
    def arity(self) -> int:
        return len(self.controls) + 1

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target,) + tuple(q for q, _ in self.controls)

    def dagger(self) -> Gate:
        m = self.matrix.conj().T
        if self.label in _DAGGER_LABEL:
            label = _DAGGER_LABEL[self.label]
        elif self.label in _NAMED:
            label = self.label
        elif self.label.startswith("R("):
            label = self.label[:-2] if self.label.endswith("dg") else self.label + "dg"
        else:
            label = label_for(m)
        return Gate(label, m, self.controls, self.target)

    def with_controls(self, extra: Iterable[tuple[int, int]]) -> Gate:
        extra = tuple(extra)
        if not extra:
            return self
        return Gate(self.label, self.matrix, self.controls + extra, self.target)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Gate):
            return NotImplemented
        return (
            self.label == other.label
            and self.target == other.target
            and self.controls == other.controls
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self) -> int:
        return hash((self.label, self.target, self.controls))

    def __repr__(self) -> str:
        ctl = ",".join(("" if p else "~") + str(q) for q, p in self.controls)
        return f"{self.label} q{self.target}" + (f" | {ctl}" if ctl else "")


@dataclass(frozen=True)
class GateCounts:
    by_arity: dict[int, int]
    depth: int

    @property
    def total(self) -> int:
        return sum(self.by_arity.values())

    @property
    def multi_qubit(self) -> int:
        return sum(c for a, c in self.by_arity.items() if a >= 2)


@dataclass
class Circuit:
    n: int
    ancillas: int = 0
    ancilla_init: list[int] = field(default_factory=list)
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.ancilla_init and self.ancillas:
            self.ancilla_init = [0] * self.ancillas
        if len(self.ancilla_init) != self.ancillas:
            raise CircuitError("ancilla_init length must equal the ancilla count")
        for g in self.gates:
            self._check(g)

    @property
    def total_qubits(self) -> int:
        return self.n + self.ancillas

    def _check(self, g: Gate) -> None:
        if any(not 0 <= q < self.total_qubits for q in g.qubits):
            raise CircuitError(f"gate {g!r} outside {self.total_qubits} qubits")

    def append(self, g: Gate) -> Circuit:
        self._check(g)
        self.gates.append(g)
        return self

    def extend(self, gates: Iterable[Gate]) -> Circuit:
        for g in gates:
            self.append(g)
        return self

    def copy(self) -> Circuit:
        return Circuit(self.n, self.ancillas, list(self.ancilla_init), list(self.gates))

    def __len__(self) -> int:
        return len(self.gates)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self.n == other.n
            and self.ancillas == other.ancillas
            and list(self.ancilla_init) == list(other.ancilla_init)
            and self.gates == other.gates
        )


def append_controlled(c: Circuit, g: Gate) -> Circuit:
    out = c.copy()
    return out.append(g)


def with_extra_control(c: Circuit | Sequence[Gate], extra: Iterable[tuple[int, int]]) -> Circuit | list[Gate]:
    """Add ``extra`` control terms to every gate."""
    extra = tuple((int(q), int(p)) for q, p in extra)
    gates = c.gates if isinstance(c, Circuit) else c
    xq = {q for q, _ in extra}
    out = []
    for g in gates:
        if g.target in xq:
            raise CircuitError(f"extra control on q{g.target} overlaps a gate target")
        if xq & {q for q, _ in g.controls}:
            raise CircuitError("extra control duplicates an existing control")
        out.append(g.with_controls(extra))
    if isinstance(c, Circuit):
        return Circuit(c.n, c.ancillas, list(c.ancilla_init), out)
    return out


def inverse(c: Circuit) -> Circuit:
    return Circuit(c.n, c.ancillas, list(c.ancilla_init), [g.dagger() for g in reversed(c.gates)])


def counts(c: Circuit) -> GateCounts:
    by = Counter(g.arity for g in c.gates)
    layer = [0] * c.total_qubits
    depth = 0
    for g in c.gates:
        d = 1 + max(layer[q] for q in g.qubits)
        for q in g.qubits:
            layer[q] = d
        depth = max(depth, d)
    return GateCounts(dict(sorted(by.items())), depth)


def is_transpiled(c: Circuit) -> bool:
    for g in c.gates:
        if len(g.controls) > 1:
            return False
        if len(g.controls) == 1 and (g.controls[0][1] != 1 or not np.array_equal(g.matrix, X_MAT)):
            return False
    return True


def _cplx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def to_json(c: Circuit) -> str:
    data = {
        "n": c.n,
        "ancillas": c.ancillas,
        "ancilla_init": list(c.ancilla_init),
        "gates": [
            {
                "label": g.label,
                "matrix": [[_cplx(g.matrix[i, j]) for j in range(2)] for i in range(2)],
                "controls": [[q, p] for q, p in g.controls],
                "target": g.target,
            }
            for g in c.gates
        ],
    }
    return json.dumps(data)


def from_json(text: str) -> Circuit:
    try:
        data = json.loads(text)
        gates = [
            Gate(
                g["label"],
                np.array([[complex(*g["matrix"][i][j]) for j in range(2)] for i in range(2)]),
                tuple((q, p) for q, p in g["controls"]),
                g["target"],
            )
            for g in data["gates"]
        ]
        return Circuit(int(data["n"]), int(data["ancillas"]), [int(b) for b in data["ancilla_init"]], gates)
    except (KeyError, TypeError, IndexError) as exc:
        raise CircuitError(f"malformed circuit JSON: {exc}") from exc


def u3_params(m: np.ndarray) -> tuple[float, float, float]:
    """Angles of ``u(theta, phi, lam)`` equal to ``m`` up to global phase."""
    m = np.asarray(m, dtype=complex)
    det = np.linalg.det(m)
    su = m / np.sqrt(det)
    theta = 2 * math.atan2(abs(su[1, 0]), abs(su[0, 0]))
    if abs(su[0, 0]) > 1e-12 and abs(su[1, 0]) > 1e-12:
        phi_plus_lam = 2 * np.angle(su[1, 1])
        phi_minus_lam = 2 * np.angle(su[1, 0])
    elif abs(su[0, 0]) > 1e-12:
        phi_plus_lam = 2 * np.angle(su[1, 1])
        phi_minus_lam = 0.0
    else:
        phi_plus_lam = 0.0
        phi_minus_lam = 2 * np.angle(su[1, 0])
    phi = (phi_plus_lam + phi_minus_lam) / 2
    lam = (phi_plus_lam - phi_minus_lam) / 2
    return float(theta), float(phi), float(lam)


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]], dtype=complex
    )


def to_qasm(c: Circuit) -> str:
    """OpenQASM 2 text over ``q[n]`` and ``anc[a]``; needs a transpiled circuit."""
    if not is_transpiled(c):
        raise CircuitError("QASM emission requires a transpiled circuit")

    def name(q: int) -> str:
        return f"q[{q}]" if q < c.n else f"anc[{q - c.n}]"

    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{c.n}];"]
    if c.ancillas:
        lines.append(f"qreg anc[{c.ancillas}];")
        lines.append("// ancilla_init " + " ".join(str(b) for b in c.ancilla_init))
    for g in c.gates:
        if g.controls:
            lines.append(f"cx {name(g.controls[0][0])},{name(g.target)};")
        else:
            th, ph, la = u3_params(g.matrix)
            lines.append(f"u({th!r},{ph!r},{la!r}) {name(g.target)};")
    return "\n".join(lines) + "\n"


def emit(c: Circuit, fmt: str = "json") -> str:
    if fmt == "json":
        return to_json(c)
    if fmt == "qasm":
        return to_qasm(c)
    raise CircuitError(f"unknown format {fmt!r}")
