"""Local invertible maps: a scalar times a tensor product of X^b P(theta) factors."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

ANGLE_SNAP = 1e-12


def normalize_angle(theta: float) -> float:
    """Map an angle into (-pi, pi], snapping values next to 0 and pi."""
    t = math.remainder(theta, 2 * math.pi)
    if abs(t) < ANGLE_SNAP:
        return 0.0
    if abs(abs(t) - math.pi) < ANGLE_SNAP:
        return math.pi
    return t


@dataclass(frozen=True)
class LimFactor:
    """Single-qubit factor X^b . diag(1, e^{i theta})."""

    b: int = 0
    theta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "b", int(self.b) & 1)
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    @property
    def is_identity(self) -> bool:
        return self.b == 0 and self.theta == 0.0

    def matrix(self) -> np.ndarray:
        p = np.array([[1, 0], [0, cmath.exp(1j * self.theta)]], dtype=complex)
        if self.b:
            return np.array([[0, 1], [1, 0]], dtype=complex) @ p
        return p

    def dagger_matrix(self) -> np.ndarray:
        return self.matrix().conj().T


IDENTITY_FACTOR = LimFactor()


def _factor_product(f: LimFactor, g: LimFactor) -> tuple[complex, LimFactor]:
    # P(a) X = e^{ia} X P(-a)
    if g.b == 0:
        return 1.0, LimFactor(f.b, f.theta + g.theta)
    return cmath.exp(1j * f.theta), LimFactor(f.b ^ 1, g.theta - f.theta)


def _factor_inverse(f: LimFactor) -> tuple[complex, LimFactor]:
    if f.b == 0:
        return 1.0, LimFactor(0, -f.theta)
    # (X P(t))^-1 = P(-t) X = e^{-it} X P(t)
    return cmath.exp(-1j * f.theta), LimFactor(1, f.theta)


@dataclass(frozen=True)
class LIM:
    """Edge label ``scalar * F[k] (x) ... (x) F[0]``.

    ``factors[j]`` acts on qubit j, so the tuple is stored least significant
    qubit first. Edges into the terminal carry no factors.
    """

    scalar: complex
    factors: tuple[LimFactor, ...] = ()

    @staticmethod
    def identity(width: int, scalar: complex = 1.0) -> LIM:
        return LIM(complex(scalar), (IDENTITY_FACTOR,) * width)

    @property
    def width(self) -> int:
        return len(self.factors)

    @property
    def is_zero(self) -> bool:
        return self.scalar == 0

    @property
    def is_identity_operator(self) -> bool:
        """True when every factor is the identity (the scalar is ignored)."""
        return all(f.is_identity for f in self.factors)

    @property
    def mask(self) -> int:
        return sum(f.b << j for j, f in enumerate(self.factors))

    @property
    def thetas(self) -> np.ndarray:
        return np.array([f.theta for f in self.factors], dtype=float)

    def scaled(self, c: complex) -> LIM:
        return LIM(self.scalar * c, self.factors)

    def compose(self, other: LIM) -> LIM:
        """Operator product ``self @ other``."""
        if len(self.factors) != len(other.factors):
            raise ValueError("LIM widths differ")
        s = self.scalar * other.scalar
        out = []
        for f, g in zip(self.factors, other.factors):
            ph, h = _factor_product(f, g)
            s *= ph
            out.append(h)
        return LIM(s, tuple(out))

    def inverse(self) -> LIM:
        if self.scalar == 0:
            raise ZeroDivisionError("zero LIM has no inverse")
        s = 1 / self.scalar
        out = []
        for f in self.factors:
            ph, h = _factor_inverse(f)
            s *= ph
            out.append(h)
        return LIM(s, tuple(out))

    def extend(self, top: LimFactor) -> LIM:
        """Tensor an extra factor on top: ``top (x) self``."""
        return LIM(self.scalar, self.factors + (top,))

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Apply to a vector of length 2^width without building the full matrix."""
        vec = np.asarray(vec, dtype=complex)
        if len(vec) != 1 << self.width:
            raise ValueError("vector length does not match LIM width")
        if self.scalar == 0:
            return np.zeros_like(vec)
        idx = np.arange(len(vec))
        phase = np.zeros(len(vec))
        for j, f in enumerate(self.factors):
            if f.theta:
                phase += f.theta * ((idx >> j) & 1)
        w = vec * np.exp(1j * phase) if phase.any() else vec
        return self.scalar * w[idx ^ self.mask]

    def matrix(self) -> np.ndarray:
        m = np.array([[self.scalar]], dtype=complex)
        for f in reversed(self.factors):
            m = np.kron(m, f.matrix())
        return m

    def key(self, digits: int = 9) -> tuple:
        """Rounded hashable key for unique-table lookups."""
        s = complex(round(self.scalar.real, digits), round(self.scalar.imag, digits))
        return (s, tuple((f.b, round(f.theta, digits)) for f in self.factors))

    def __str__(self) -> str:
        parts = []
        for j in reversed(range(self.width)):
            parts.append(factor_name(self.factors[j]))
        s = self.scalar
        txt = f"{s.real:.4g}" if abs(s.imag) < 1e-12 else f"({s.real:.4g}{s.imag:+.4g}j)"
        return txt + ("*" + "(x)".join(parts) if parts and not self.is_identity_operator else "")


_NAMED_PHASES = {
    math.pi: "Z",
    math.pi / 2: "S",
    -math.pi / 2: "Sdg",
    math.pi / 4: "T",
    -math.pi / 4: "Tdg",
}


def factor_name(f: LimFactor) -> str:
    if f.theta == 0.0:
        p = ""
    else:
        p = next((v for k, v in _NAMED_PHASES.items() if abs(f.theta - k) < 1e-12), f"P({f.theta:.4g})")
    if f.b:
        return "X" + p
    return p or "I"
