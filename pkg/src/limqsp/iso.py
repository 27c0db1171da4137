"""Isomorphism detection between amplitude blocks under LIM groups.

Two unit vectors a, b of length 2^w are related by a LIM O when
``a[l ^ m] = mu * exp(i * (theta . l)) * b[l]`` for an X-mask ``m``,
a scalar ``mu`` and per-qubit phases ``theta``. Candidate masks come from an
XOR cross-correlation of magnitudes; for each mask the phase pattern must be
constant (scalar group), affine over GF(2) times pi (Pauli) or real-affine
modulo 2 pi (XP). Every returned LIM is confirmed by dense reconstruction.
"""

from __future__ import annotations

import enum
import itertools
import math
from fractions import Fraction

import numpy as np

from .lim import LIM, LimFactor

ISO_TOL = 1e-10
SUPPORT_EPS = 1e-12
_MASK_CHUNK = 64
_MAX_ENUM = 4096


class GroupKind(enum.Enum):
    SCALAR = "scalar"
    PAULI = "pauli"
    XP = "xp"

    @classmethod
    def parse(cls, name: str | GroupKind) -> GroupKind:
        if isinstance(name, GroupKind):
            return name
        key = name.strip().lower()
        aliases = {"scalar": cls.SCALAR, "scalaronly": cls.SCALAR, "pauli": cls.PAULI, "xp": cls.XP}
        if key not in aliases:
            raise ValueError(f"unknown group {name!r}")
        return aliases[key]


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform of a real vector of length 2^k."""
    a = np.array(a, dtype=float)
    n = len(a)
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1).reshape(-1)
        h *= 2
    return a


def xor_correlation(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``C[m] = sum_k x[k] * y[k ^ m]``."""
    return fwht(fwht(x) * fwht(y)) / len(x)


def _bits(points: np.ndarray, width: int) -> np.ndarray:
    return ((points[:, None] >> np.arange(width)) & 1).astype(float)


class IsoReference:
    """A reference block with lazily computed phase-lattice data."""

    def __init__(self, vec: np.ndarray):
        vec = np.asarray(vec, dtype=complex)
        self.vec = vec
        self.width = int(len(vec)).bit_length() - 1
        self.norm = float(np.linalg.norm(vec))
        self.unit = vec / self.norm
        self.mag = np.abs(self.unit)
        self.sorted_mag = np.sort(self.mag)
        order = np.lexsort((np.arange(len(vec)), -self.mag))
        self.support = order[self.mag[order] > SUPPORT_EPS]
        self._pauli: tuple | None = None
        self._xp: tuple | None = None

    def invariants(self) -> tuple[float, float]:
        return float(np.sum(self.mag**4)), float(np.sum(self.mag**6))

    # GF(2) structure of the support, used by the Pauli test.
    def pauli_data(self) -> tuple[np.ndarray, np.ndarray]:
        if self._pauli is None:
            pts = (1 | (self.support.astype(np.int64) << 1))
            red = pts.copy()
            comb = np.zeros(len(pts), dtype=np.int64)
            basis_pos: list[int] = []
            while True:
                nz = np.nonzero(red)[0]
                if len(nz) == 0:
                    break
                i = int(nz[0])
                r = len(basis_pos)
                basis_pos.append(i)
                row, rowc = int(red[i]), int(comb[i]) ^ (1 << r)
                pivot = row & -row
                hit = (red & pivot) != 0
                red[hit] ^= row
                comb[hit] ^= rowc
            # comb[j] expresses point j as an XOR of basis points
            # (basis rows themselves reduce to zero carrying their own bit)
            r = len(basis_pos)
            G = ((comb[:, None] >> np.arange(r)) & 1).astype(np.int64)
            self._pauli = (np.array(basis_pos, dtype=np.int64), G)
        return self._pauli

    # Real-affine structure of the support, used by the XP test.
    def xp_data(self) -> tuple[np.ndarray, np.ndarray, int]:
        if self._xp is None:
            V = np.hstack([np.ones((len(self.support), 1)), _bits(self.support, self.width)])
            basis: list[int] = []
            ortho: list[np.ndarray] = []
            resid = V.copy()
            while True:
                norms = np.linalg.norm(resid, axis=1)
                cand = np.nonzero(norms > 1e-9)[0]
                if len(cand) == 0:
                    break
                i = int(cand[0])
                basis.append(i)
                u = resid[i] / norms[i]
                ortho.append(u)
                resid = resid - np.outer(resid @ u, u)
            Q = self._coords(V, basis)
            # shrink the lattice index while some coefficient lies strictly in (0, 1)
            for _ in range(64):
                frac = np.abs(Q)
                bad = np.argwhere((frac > 1e-9) & (frac < 1 - 1e-9))
                if len(bad) == 0:
                    break
                p, i = (int(t) for t in bad[0])
                basis[i] = p
                Q = self._coords(V, basis)
            D = 1
            for q in np.unique(np.round(Q, 9)):
                D = math.lcm(D, Fraction(float(q)).limit_denominator(1 << 10).denominator)
            self._xp = (np.array(basis, dtype=np.int64), Q, D)
        return self._xp

    @staticmethod
    def _coords(V: np.ndarray, basis: list[int]) -> np.ndarray:
        B = V[basis]
        sol, *_ = np.linalg.lstsq(B.T, V.T, rcond=None)
        return sol.T


def _solve_affine_real(rows: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Solve ``rows @ x = values`` with free coordinates fixed to zero.

    Columns are taken greedily left to right, so the constant column wins.
    """
    r, c = rows.shape
    piv: list[int] = []
    for j in range(c):
        if np.linalg.matrix_rank(rows[:, piv + [j]], tol=1e-9) > len(piv):
            piv.append(j)
        if len(piv) == r:
            break
    x = np.zeros(c)
    x[piv] = np.linalg.solve(rows[:, piv], values) if piv else []
    return x


def _solve_affine_gf2(rows: list[int], values: list[int], ncols: int) -> list[int]:
    """Solve over GF(2); bit j of each row is column j. Free variables are 0."""
    eq = [(r, v) for r, v in zip(rows, values)]
    piv_rows: list[tuple[int, int, int]] = []
    for r, v in eq:
        for pc, pr, pv in piv_rows:
            if (r >> pc) & 1:
                r ^= pr
                v ^= pv
        if r == 0:
            continue
        pc = (r & -r).bit_length() - 1
        # keep the echelon form fully reduced
        piv_rows = [(c, pr ^ r, pv ^ v) if (pr >> pc) & 1 else (c, pr, pv) for c, pr, pv in piv_rows]
        piv_rows.append((pc, r, v))
    x = [0] * ncols
    for pc, pr, pv in piv_rows:
        x[pc] = pv
    return x


def candidate_masks(mag_a: np.ndarray, mag_b: np.ndarray) -> np.ndarray:
    corr = xor_correlation(mag_a, mag_b)
    return np.nonzero(corr >= 1 - 1e-7)[0]


def find_lim(a: np.ndarray, ref: IsoReference, group: GroupKind, tol: float = ISO_TOL) -> LIM | None:
    """Return a LIM O in ``group`` with ``a = O @ ref.vec``, or None."""
    a = np.asarray(a, dtype=complex)
    if len(a) != len(ref.vec):
        raise ValueError("blocks differ in length")
    na = float(np.linalg.norm(a))
    if na == 0 or ref.norm == 0:
        return None
    ua = a / na
    mag_a = np.abs(ua)
    if np.max(np.abs(np.sort(mag_a) - ref.sorted_mag)) > tol:
        return None
    w = ref.width
    if group is GroupKind.SCALAR or w == 0:
        masks = np.array([0])
    else:
        masks = candidate_masks(mag_a, ref.mag)
    idx = np.arange(len(a))
    sup = ref.support
    bsup = ref.unit[sup]
    wsup = ref.mag[sup]
    for start in range(0, len(masks), _MASK_CHUNK):
        chunk = masks[start:start + _MASK_CHUNK]
        A = ua[np.bitwise_xor.outer(chunk, idx)]
        ok = np.max(np.abs(np.abs(A) - ref.mag), axis=1) <= tol
        if not ok.any():
            continue
        chunk, A = chunk[ok], A[ok]
        ratio = A[:, sup] * np.conj(bsup)
        psi = np.angle(ratio)
        found = _phase_solve(psi, ref, group, wsup, tol)
        if found is None:
            continue
        row, phi, thetas = found
        mask = int(chunk[row])
        lim = LIM(
            (na / ref.norm) * complex(math.cos(phi), math.sin(phi)),
            tuple(LimFactor((mask >> j) & 1, float(thetas[j])) for j in range(w)),
        )
        if np.max(np.abs(lim.apply(ref.vec) - a)) <= tol * max(na, 1.0):
            return lim
    return None


def _phase_solve(psi: np.ndarray, ref: IsoReference, group: GroupKind, wsup: np.ndarray, tol: float):
    """Find the first row of ``psi`` whose phases fit the group; return (row, phi, thetas)."""
    w = ref.width
    if group is GroupKind.SCALAR:
        dev = wsup * np.abs(np.exp(1j * (psi - psi[:, :1])) - 1)
        good = np.nonzero(np.max(dev, axis=1) <= tol)[0]
        if len(good) == 0:
            return None
        return int(good[0]), float(psi[good[0], 0]), np.zeros(w)
    res = _pauli_solve(psi, ref, wsup, tol)
    if group is GroupKind.PAULI:
        return res
    xp = _xp_solve(psi, ref, wsup, tol)
    if xp is None:
        return res
    if res is not None and res[0] < xp[0]:
        return res
    return xp


def _pauli_solve(psi, ref, wsup, tol):
    basis, G = ref.pauli_data()
    rel = psi - psi[:, :1]
    beta = np.rint(rel[:, basis] / np.pi).astype(np.int64) & 1
    pred = (beta @ G.T) & 1
    dev = wsup * np.abs(np.exp(1j * rel) - (1 - 2 * pred))
    good = np.nonzero(np.max(dev, axis=1) <= tol)[0]
    if len(good) == 0:
        return None
    row = int(good[0])
    pts = ref.support[basis]
    rows = [int(1 | (p << 1)) for p in pts]
    x = _solve_affine_gf2(rows, [int(b) for b in beta[row]], ref.width + 1)
    phi = float(psi[row, 0]) + math.pi * x[0]
    thetas = np.array([math.pi * x[j + 1] for j in range(ref.width)])
    return row, phi, thetas


def _xp_solve(psi, ref, wsup, tol):
    basis, Q, D = ref.xp_data()
    pts = ref.support[basis]
    rows = np.hstack([np.ones((len(pts), 1)), _bits(pts, ref.width)])
    psiB = psi[:, basis]
    if D == 1:
        Qi = np.rint(Q)
        pred = psiB @ Qi.T
        dev = wsup * np.abs(np.exp(1j * (psi - pred)) - 1)
        good = np.nonzero(np.max(dev, axis=1) <= tol)[0]
        if len(good) == 0:
            return None
        row = int(good[0])
        x = _solve_affine_real(rows, psiB[row])
        return row, float(x[0]), x[1:]
    r = len(basis)
    if D**r > _MAX_ENUM:
        return None
    for row in range(psi.shape[0]):
        for z in itertools.product(range(D), repeat=r):
            shifted = psiB[row] + 2 * np.pi * np.array(z)
            pred = Q @ shifted
            dev = wsup * np.abs(np.exp(1j * (psi[row] - pred)) - 1)
            if np.max(dev) <= tol:
                x = _solve_affine_real(rows, shifted)
                return row, float(x[0]), x[1:]
    return None
