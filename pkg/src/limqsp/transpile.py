"""Lowering of multi-controlled gates to CX plus single-qubit unitaries.

No ancillas are added. Multi-controlled X gates borrow idle qubits of the
circuit as dirty ancillas when available; general k-controlled unitaries use
the square-root recursion C^k(U) = C(V) C^{k-1}X C(V^dag) C^{k-1}X C^{k-1}(V).
"""

from __future__ import annotations

import cmath
import math
from typing import Sequence

import numpy as np

from .circuit import H_MAT, X_MAT, Circuit, Gate, label_for

_T = np.diag([1, cmath.exp(1j * math.pi / 4)])
_TDG = _T.conj()
_ATOL = 1e-12


class _Emitter:
    def __init__(self, total: int):
        self.total = total
        self.gates: list[Gate] = []

    def u(self, m: np.ndarray, t: int) -> None:
        if np.allclose(m, np.eye(2), atol=_ATOL):
            return
        self.gates.append(Gate(label_for(m), m, (), t))

    def cx(self, c: int, t: int) -> None:
        self.gates.append(Gate("X", X_MAT, ((c, 1),), t))

    def ccx(self, c1: int, c2: int, t: int) -> None:
        u, cx = self.u, self.cx
        u(H_MAT, t)
        cx(c2, t)
        u(_TDG, t)
        cx(c1, t)
        u(_T, t)
        cx(c2, t)
        u(_TDG, t)
        cx(c1, t)
        u(_T, c2)
        u(_T, t)
        u(H_MAT, t)
        cx(c1, c2)
        u(_T, c1)
        u(_TDG, c2)
        cx(c1, c2)

    def cu(self, c: int, t: int, m: np.ndarray) -> None:
        """Singly controlled U: at most 2 CX and 4 single-qubit gates."""
        if np.allclose(m, np.eye(2), atol=_ATOL):
            return
        if np.allclose(m, X_MAT, atol=_ATOL):
            self.cx(c, t)
            return
        alpha, a, b, cmat = _abc(m)
        self.u(cmat, t)
        self.cx(c, t)
        self.u(b, t)
        self.cx(c, t)
        self.u(a, t)
        self.u(np.diag([1, cmath.exp(1j * alpha)]), c)

    def mcx(self, ctrl: Sequence[int], t: int, free: Sequence[int]) -> None:
        k = len(ctrl)
        if k == 0:
            self.u(X_MAT, t)
        elif k == 1:
            self.cx(ctrl[0], t)
        elif k == 2:
            self.ccx(ctrl[0], ctrl[1], t)
        elif len(free) >= k - 2:
            self._mcx_vchain(list(ctrl), list(free[:k - 2]), t)
        elif free:
            self._mcx_split(list(ctrl), t, free[0], list(free[1:]))
        else:
            self.mcu(ctrl, t, X_MAT, free)

    def _mcx_vchain(self, c: list[int], a: list[int], t: int) -> None:
        # dirty-ancilla ladder with 4(k-2) Toffolis
        k = len(c)
        self.ccx(c[k - 1], a[k - 3], t)
        for i in reversed(range(k - 3)):
            self.ccx(c[i + 2], a[i], a[i + 1])
        self.ccx(c[0], c[1], a[0])
        for i in range(k - 3):
            self.ccx(c[i + 2], a[i], a[i + 1])
        self.ccx(c[k - 1], a[k - 3], t)
        for i in reversed(range(k - 3)):
            self.ccx(c[i + 2], a[i], a[i + 1])
        self.ccx(c[0], c[1], a[0])
        for i in range(k - 3):
            self.ccx(c[i + 2], a[i], a[i + 1])

    def _mcx_split(self, c: list[int], t: int, a: int, rest: list[int]) -> None:
        # one dirty qubit a: t ^= c2 & a; a ^= c1; t ^= c2 & a; a ^= c1
        k = len(c)
        m1 = (k + 1) // 2
        c1, c2 = c[:m1], c[m1:]
        first = (c2 + [a], t, c1 + rest)
        second = (c1, a, c2 + [t] + rest)
        for ctrl, tgt, pool in (first, second, first, second):
            self.mcx(ctrl, tgt, pool)

    def mcu(self, ctrl: Sequence[int], t: int, m: np.ndarray, free: Sequence[int]) -> None:
        k = len(ctrl)
        if np.allclose(m, np.eye(2), atol=_ATOL):
            return
        if k == 0:
            self.u(m, t)
            return
        if k == 1:
            self.cu(ctrl[0], t, m)
            return
        if np.allclose(m, X_MAT, atol=_ATOL) and (free or k == 2):
            self.mcx(ctrl, t, free)
            return
        v = _sqrtm(m)
        last, rest = ctrl[-1], list(ctrl[:-1])
        self.cu(last, t, v)
        self.mcx(rest, last, [t] + list(free))
        self.cu(last, t, v.conj().T)
        self.mcx(rest, last, [t] + list(free))
        self.mcu(rest, t, v, [last] + list(free))


def _sqrtm(m: np.ndarray) -> np.ndarray:
    w, vecs = np.linalg.eig(m)
    # unitary matrices are normal; re-orthonormalize eigenvectors for degenerate cases
    q, _ = np.linalg.qr(vecs)
    d = q.conj().T @ m @ q
    if abs(d[0, 1]) > 1e-9 or abs(d[1, 0]) > 1e-9:
        q = vecs
        d = np.linalg.inv(q) @ m @ q
        root = q @ np.diag(np.sqrt(np.diag(d))) @ np.linalg.inv(q)
    else:
        root = q @ np.diag(np.sqrt(np.diag(d))) @ q.conj().T
    # polish to exact unitarity
    u, _, vh = np.linalg.svd(root)
    return u @ vh


def _abc(m: np.ndarray) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """``m = e^{i alpha} A X B X C`` with ``A B C = I``."""
    det = np.linalg.det(m)
    alpha = cmath.phase(det) / 2
    su = m * cmath.exp(-1j * alpha)
    # su = Rz(beta) Ry(gamma) Rz(delta)
    gamma = 2 * math.atan2(abs(su[1, 0]), abs(su[0, 0]))
    s = cmath.phase(su[1, 1])  # (beta + delta) / 2
    d = cmath.phase(su[1, 0])  # (beta - delta) / 2
    beta, delta = s + d, s - d
    if abs(su[1, 0]) < 1e-12:
        beta, delta = 2 * s, 0.0
    elif abs(su[0, 0]) < 1e-12:
        beta, delta = 2 * d, 0.0

    def rz(x: float) -> np.ndarray:
        return np.diag([cmath.exp(-0.5j * x), cmath.exp(0.5j * x)])

    def ry(x: float) -> np.ndarray:
        c, sn = math.cos(x / 2), math.sin(x / 2)
        return np.array([[c, -sn], [sn, c]], dtype=complex)

    a = rz(beta) @ ry(gamma / 2)
    b = ry(-gamma / 2) @ rz(-(delta + beta) / 2)
    c = rz((delta - beta) / 2)
    recon = cmath.exp(1j * alpha) * a @ X_MAT @ b @ X_MAT @ c
    if not np.allclose(recon, m, atol=1e-9):
        # the square root of det picked the other branch
        alpha += math.pi
        if not np.allclose(-recon, m, atol=1e-9):
            raise ArithmeticError("controlled-unitary decomposition failed")
    return alpha, a, b, c


def transpile(c: Circuit) -> Circuit:
    """Equivalent circuit over uncontrolled single-qubit gates and CX."""
    em = _Emitter(c.total_qubits)
    for g in c.gates:
        neg = [q for q, p in g.controls if p == 0]
        for q in neg:
            em.u(X_MAT, q)
        ctrl = [q for q, _ in g.controls]
        busy = set(ctrl) | {g.target}
        free = [q for q in range(c.total_qubits) if q not in busy]
        em.mcu(ctrl, g.target, g.matrix, free)
        for q in neg:
            em.u(X_MAT, q)
    return Circuit(c.n, c.ancillas, list(c.ancilla_init), em.gates)
