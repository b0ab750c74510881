"""Canonical form of two-qubit unitaries and their operator Schmidt spectra.

``U(a1, a2, a3) = exp(-i sum_k a_k sigma_k (x) sigma_k) = sum_k zeta_k sigma_k (x) sigma_k``
with the canonical cell ``0 <= a3 <= a2 <= a1 <= pi/4``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matkernel as mk
from .errors import InfeasibleSpectrum

TAU_EQ = 1e-8
SPECTRUM_TOL = 1e-8

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (I2, SX, SY, SZ)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class CanonicalAngles:
    a1: float
    a2: float
    a3: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)

    def in_cell(self, tol: float = 0.0) -> bool:
        return -tol <= self.a3 <= self.a2 + tol and self.a2 <= self.a1 + tol and self.a1 <= math.pi / 4 + tol

    @classmethod
    def from_pi_units(cls, a1: float, a2: float, a3: float) -> "CanonicalAngles":
        return cls(a1 * math.pi, a2 * math.pi, a3 * math.pi)


@dataclass(frozen=True)
class LocalUnitaryFrame:
    """``U_AB = (vA (x) wB) U (vTildeA (x) wTildeB)``."""

    vA: np.ndarray
    wB: np.ndarray
    vTildeA: np.ndarray
    wTildeB: np.ndarray

    def __post_init__(self):
        for name in ("vA", "wB", "vTildeA", "wTildeB"):
            m = mk.as_matrix(getattr(self, name))
            if m.shape != (2, 2) or not mk.is_unitary(m, 1e-10):
                raise ValueError(f"frame component {name} is not a 2x2 unitary")
            object.__setattr__(self, name, m)

    @classmethod
    def identity(cls) -> "LocalUnitaryFrame":
        return cls(I2, I2, I2, I2)

    def outer(self) -> np.ndarray:
        return mk.kron(self.vA, self.wB)

    def inner(self) -> np.ndarray:
        return mk.kron(self.vTildeA, self.wTildeB)

    def apply(self, u) -> np.ndarray:
        return self.outer() @ mk.as_matrix(u) @ self.inner()


@dataclass(frozen=True)
class AngleRecovery:
    kind: str  # "Unique" | "DegenerateFamily"
    angles: CanonicalAngles | None = None
    familyProduct: float | None = None

    def member(self) -> CanonicalAngles:
        """A concrete canonical representative (for the family: a3 = 0)."""
        if self.kind == "Unique":
            return self.angles
        p = min(max(self.familyProduct, -1.0), 1.0)
        return CanonicalAngles(math.pi / 4, 0.5 * math.acos(p), 0.0)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.angles is not None:
            d["angles"] = list(self.angles.as_tuple())
            d["angles_pi_units"] = [a / math.pi for a in self.angles.as_tuple()]
        if self.familyProduct is not None:
            d["a1"] = math.pi / 4
            d["familyProduct"] = self.familyProduct
        return d


def zeta(angles: CanonicalAngles) -> np.ndarray:
    c1, c2, c3 = (math.cos(a) for a in angles.as_tuple())
    s1, s2, s3 = (math.sin(a) for a in angles.as_tuple())
    return np.array([
        c1 * c2 * c3 - 1j * s1 * s2 * s3,
        c1 * s2 * s3 - 1j * s1 * c2 * c3,
        s1 * c2 * s3 - 1j * c1 * s2 * c3,
        s1 * s2 * c3 - 1j * c1 * c2 * s3,
    ])


def build_canonical(angles: CanonicalAngles) -> np.ndarray:
    z = zeta(angles)
    return sum(z[k] * mk.kron(PAULI[k], PAULI[k]) for k in range(4))


def canonical_hamiltonian(angles: CanonicalAngles) -> np.ndarray:
    return sum(a * mk.kron(PAULI[k + 1], PAULI[k + 1]) for k, a in enumerate(angles.as_tuple()))


def reshuffle(u) -> np.ndarray:
    """``M[(a,a'),(b,b')] = U[(a,b),(a',b')]`` for a 4x4 two-qubit operator."""
    t = mk.as_matrix(u).reshape(2, 2, 2, 2)  # indices a, b, a', b'
    return t.transpose(0, 2, 1, 3).reshape(4, 4)


def operator_schmidt_spectrum(u) -> np.ndarray:
    """Operator Schmidt coefficients of ``u`` (the Choi-state normalization)."""
    u = mk.check_unitary(u)
    if u.shape != (4, 4):
        raise ValueError("expected a two-qubit (4x4) unitary")
    _, s, _ = mk.svd(reshuffle(u))
    return s / 2.0


def schmidt_rank(u, tol: float = 1e-9) -> int:
    return int(np.sum(operator_schmidt_spectrum(u) > tol))


def _spectrum_of(angles: CanonicalAngles) -> np.ndarray:
    return np.sort(np.abs(zeta(angles)))[::-1]


def recover_angles(spec, tol: float = TAU_EQ) -> AngleRecovery:
    """Invert a sorted operator Schmidt spectrum to canonical-cell angles.

    With ``C_j = cos(2 a_j)`` the spectrum obeys
    ``s0^2 + s3^2 = (1 + C1 C2)/2``, ``s0^2 - s2^2 = C2 (C1 + C3)/2`` and
    ``s0^2 - s3^2 = C3 (C1 + C2)/2``, equivalently
    ``1 - C1 C2 = 2 (s1^2 + s2^2)`` and its two cyclic partners. The three
    pairwise products determine the ``C_j`` whenever ``s0 > s1``. When ``s0 == s1`` the angle ``a1`` is
    pi/4 and only ``cos(2 a2) cos(2 a3) = 4 s0^2 - 1`` is fixed.
    """
    s = np.asarray(spec, dtype=float)
    if s.shape != (4,) or np.any(np.diff(s) > 1e-12) or np.any(s < -1e-12):
        raise InfeasibleSpectrum("spectrum must be four nonnegative, nonincreasing values")
    if abs(np.sum(s ** 2) - 1.0) > 1e-10:
        raise InfeasibleSpectrum("spectrum is not normalized")
    q = s ** 2

    if s[0] <= s[1] + tol:
        product = 4.0 * q[0] - 1.0
        consistent = (
            abs(s[0] - s[1]) <= 1e-7
            and abs(s[2] - s[3]) <= 1e-7
            and -1e-7 <= product <= 1.0 + 1e-7
            and abs(q[2] - 0.25 * (1.0 - product)) <= 1e-7
        )
        if not consistent:
            raise InfeasibleSpectrum(f"spectrum {s} is outside the accessible region")
        return AngleRecovery("DegenerateFamily", familyProduct=float(min(max(product, 0.0), 1.0)))

    # 1 - C_i C_j in cancellation-free form
    e12 = 2.0 * (q[1] + q[2])
    e13 = 2.0 * (q[1] + q[3])
    e23 = 2.0 * (q[2] + q[3])
    a = []
    for qi, eij, eik, ejk in ((q[1], e12, e13, e23), (q[2], e12, e23, e13), (q[3], e13, e23, e12)):
        if 1.0 - ejk <= 0 or (1.0 - eij) * (1.0 - eik) <= 0:
            raise InfeasibleSpectrum(f"spectrum {s} is outside the accessible region")
        ratio = (1.0 - eij) * (1.0 - eik) / (1.0 - ejk)  # C_i^2
        one_minus = (4.0 * qi - eij * eik) / (1.0 - ejk)  # 1 - C_i^2
        x = one_minus / (1.0 + math.sqrt(ratio))  # 1 - C_i = 2 sin^2 a_i
        x = min(max(x, 0.0), 1.0)
        a.append(math.atan2(math.sqrt(x / 2.0), math.sqrt(1.0 - x / 2.0)))
    angles = CanonicalAngles(*a)
    if not angles.in_cell(1e-7) or np.max(np.abs(_spectrum_of(angles) - s)) > 1e-7:
        raise InfeasibleSpectrum(f"spectrum {s} is outside the accessible region")
    return AngleRecovery("Unique", angles=angles)


def same_schmidt_class(u, v, tol: float = SPECTRUM_TOL) -> bool:
    su = operator_schmidt_spectrum(u)
    sv = operator_schmidt_spectrum(v)
    return bool(np.all(np.abs(su - sv) <= tol))


def bell_basis() -> tuple:
    """``(sigma_k (x) I)|Phi>`` for k = 0..3 with ``|Phi> = (|00> + |11>)/sqrt 2``."""
    phi = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    return tuple(mk.kron(PAULI[k], I2) @ phi for k in range(4))


def magic_basis() -> tuple:
    r = 1 / math.sqrt(2)
    return (
        np.array([r, 0, 0, r], dtype=complex),
        np.array([1j * r, 0, 0, -1j * r]),
        np.array([0, 1j * r, 1j * r, 0]),
        np.array([0, r, -r, 0], dtype=complex),
    )


def magic_matrix() -> np.ndarray:
    """Columns are the magic basis vectors."""
    return np.column_stack(magic_basis())


# Literal gates


def cnot() -> np.ndarray:
    return np.eye(4, dtype=complex)[[0, 1, 3, 2]]


def cz() -> np.ndarray:
    return np.diag([1, 1, 1, -1]).astype(complex)


def cphase(phi: float) -> np.ndarray:
    return np.diag([1, 1, 1, np.exp(1j * phi)])


def swap() -> np.ndarray:
    return np.eye(4, dtype=complex)[[0, 2, 1, 3]]


def cnot_frame() -> LocalUnitaryFrame:
    """CNOT = frame applied to U(pi/4, 0, 0)."""
    r = 1 / math.sqrt(2)
    return LocalUnitaryFrame(
        vA=r * np.array([[1, 1], [1j, -1j]]),
        wB=r * np.array([[1, 1j], [-1j, -1]]),
        vTildeA=r * np.array([[1, 1], [1, -1]], dtype=complex),
        wTildeB=SZ,
    )


def cphase_conj_frame(phi: float) -> LocalUnitaryFrame:
    """conj(CPhase(phi)) = frame applied to U(phi/4, 0, 0)."""
    r = 1 / math.sqrt(2)
    e2 = np.exp(-0.5j * phi)
    e4 = np.exp(0.25j * phi)
    return LocalUnitaryFrame(
        vA=r * np.array([[1, 1], [-e2, e2]]),
        wB=r * np.array([[e4, e4], [e4.conjugate(), -e4.conjugate()]]),
        vTildeA=r * np.array([[1, -1], [1, 1]], dtype=complex),
        wTildeB=r * np.array([[1, 1], [1, -1]], dtype=complex),
    )
