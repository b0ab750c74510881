"""Entanglement-free minimal identification sets (EFMISs) for two-qubit unitaries.

An EFMIS is a connected basis of product states whose images under the
target are again product states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import canon2q as c2
from . import idsets
from . import matkernel as mk
from . import prodgeom as pg
from .errors import CasePreconditionViolated, InSE, ValidationFailed

CONCURRENCE_TOL = 1e-10
DET_TOL = 1e-9
G_TOL = 1e-8

CASE1 = "Case1"
CASE2 = "Case2"
CASE3 = "Case3"
GATE_LIBRARY = "GateLibrary"

_R = 1 / math.sqrt(2)
KET = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([_R, _R], dtype=complex),
    "-": np.array([_R, -_R], dtype=complex),
}


def ket(label: str) -> np.ndarray:
    """``ket("+-")`` is ``|+> (x) |->``; a leading ``"-"`` sign flips the sign, as in ``ket("-1+")``."""
    sign = 1.0
    if len(label) == 3 and label[0] == "-":
        sign, label = -1.0, label[1:]
    return sign * mk.kron(KET[label[0]][:, None], KET[label[1]][:, None]).reshape(-1)


CASE1_LABELS = ("0+", "1+", "-0", "+0")


@dataclass(frozen=True)
class ValidationReport:
    input_concurrences: tuple
    output_concurrences: tuple
    rank: int
    connected: bool
    gram: np.ndarray
    failures: tuple

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "input_concurrences": list(self.input_concurrences),
            "output_concurrences": list(self.output_concurrences),
            "rank": self.rank,
            "connected": self.connected,
            "failures": list(self.failures),
        }


@dataclass(frozen=True)
class Case3Coeffs:
    gamma0sq: complex
    gamma: np.ndarray


@dataclass(frozen=True)
class EFMIS:
    states: tuple
    productFactors: tuple  # per state: ((a_in, b_in), (a_out, b_out))
    gram: np.ndarray
    caseTag: str
    target: np.ndarray
    report: ValidationReport
    labels: tuple | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def state_set(self) -> idsets.StateSet:
        return idsets.StateSet(self.states, self.labels)

    def to_dict(self) -> dict:
        d = {
            "case": self.caseTag,
            "states": [mk.vector_to_json(s) for s in self.states],
            "product_factors": [
                {"input": [mk.vector_to_json(a), mk.vector_to_json(b)],
                 "output": [mk.vector_to_json(a2), mk.vector_to_json(b2)]}
                for (a, b), (a2, b2) in self.productFactors
            ],
            "gram": mk.matrix_to_json(self.gram),
            "target": mk.matrix_to_json(self.target),
            "validation": self.report.to_dict(),
        }
        if self.labels is not None:
            d["labels"] = list(self.labels)
        return d


def factorize_product(psi) -> tuple[np.ndarray, np.ndarray]:
    """``(a, b)`` with ``psi = a (x) b`` for a two-qubit product state."""
    m = mk.as_vector(psi).reshape(2, 2)
    j = int(np.argmax(np.linalg.norm(m, axis=0)))
    a = m[:, j] / np.linalg.norm(m[:, j])
    b = a.conj() @ m
    return a, b


def validate(states, target, tol: float = CONCURRENCE_TOL) -> ValidationReport:
    states = [mk.normalize(s) for s in states]
    u = mk.check_unitary(target)
    cin = tuple(pg.concurrence(s) for s in states)
    cout = tuple(pg.concurrence(mk.normalize(u @ s)) for s in states)
    sset = idsets.StateSet(tuple(states))
    rank = mk.numerical_rank(sset.matrix(), idsets.RANK_TOL)
    connected = idsets.transition_graph(sset).is_connected()
    m = sset.matrix()
    gram = m.conj() @ m.T
    failures = []
    if len(states) != 4:
        failures.append(f"expected 4 states, got {len(states)}")
    for k, (ci, co) in enumerate(zip(cin, cout)):
        if ci >= tol:
            failures.append(f"input {k} is entangled (C = {ci:.3g})")
        if co >= tol:
            failures.append(f"output {k} is entangled (C = {co:.3g})")
    if rank != 4:
        failures.append(f"rank {rank} < 4")
    if not connected:
        failures.append("transition graph is disconnected")
    return ValidationReport(cin, cout, rank, connected, gram, tuple(failures))


def make_efmis(states, target, case_tag: str, labels=None, tol: float = CONCURRENCE_TOL) -> EFMIS:
    """Validate ``states`` against ``target`` and package them; raises ValidationFailed."""
    u = mk.check_unitary(target)
    states = tuple(mk.normalize(s) for s in states)
    report = validate(states, u, tol)
    if not report.passed:
        raise ValidationFailed("; ".join(report.failures))
    factors = tuple((factorize_product(s), factorize_product(mk.normalize(u @ s))) for s in states)
    return EFMIS(states, factors, report.gram, case_tag, u, report,
                 None if labels is None else tuple(labels))


def case3_coeffs(angles: c2.CanonicalAngles, tol: float = c2.TAU_EQ) -> Case3Coeffs:
    a1, a2, a3 = angles.as_tuple()
    if not angles.in_cell(tol) or not (a1 > a3 + tol) or not (a2 < math.pi / 4 - tol):
        raise CasePreconditionViolated(f"angles {angles.as_tuple()} violate a1 > a3, a2 < pi/4")
    s12 = math.sin(2 * a1 + 2 * a2)
    g0 = s12 / (2 * s12 + 2 * (math.sin(2 * a1) + math.sin(2 * a2)) * math.cos(2 * a3))
    e = lambda x: complex(np.exp(1j * x))  # noqa: E731
    sq = [
        e(2 * a1) * g0,
        e(2 * a2) * g0,
        e(2 * a1 + 2 * a2 - 2 * a3 + math.pi) * (math.sin(2 * a1 + 2 * a3) + math.sin(2 * a2 + 2 * a3)) / s12 * g0,
        e(-2 * a3 + math.pi) * (math.sin(2 * a1 - 2 * a3) + math.sin(2 * a2 - 2 * a3)) / s12 * g0,
    ]
    gamma = np.array([pg._principal_sqrt(z) for z in sq])
    return Case3Coeffs(complex(g0), gamma)


CASE3_SIGNS = ((1, 1, 1, 1), (1, -1, 1, 1), (1, 1, 1, -1), (-1, 1, 1, -1))


def case3_states(coeffs: Case3Coeffs) -> tuple:
    mm = c2.magic_matrix()
    return tuple(mm @ (np.array(sg) * coeffs.gamma) for sg in CASE3_SIGNS)


def synthesize(angles: c2.CanonicalAngles, tol: float = c2.TAU_EQ) -> EFMIS:
    """EFMIS for ``U(angles)`` with canonical-cell angles outside S_E."""
    if not angles.in_cell(tol):
        raise ValueError(f"angles {angles.as_tuple()} are not in the canonical cell")
    if pg.classify_region(*angles.as_tuple(), tol=tol).tag == pg.S_E:
        raise InSE(f"angles {angles.as_tuple()} lie in S_E; no entanglement-free protocol exists")
    target = c2.build_canonical(angles)
    q = math.pi / 4
    if abs(angles.a1 - q) < tol and abs(angles.a2 - q) < tol:
        return make_efmis([ket(x) for x in CASE1_LABELS], target, CASE1, CASE1_LABELS)
    if max(angles.as_tuple()) < tol:
        return make_efmis([ket(x) for x in CASE1_LABELS], target, CASE2, CASE1_LABELS)
    coeffs = case3_coeffs(angles, tol)
    efmis = make_efmis(case3_states(coeffs), target, CASE3, ("phi1", "phi2", "phi3", "phi4"), tol=1e-9)
    g = np.prod(np.abs(coeffs.gamma)) ** 2
    det = float(np.linalg.det(efmis.gram).real)
    if abs(det - 64 * g) > DET_TOL:
        raise ValidationFailed(f"Gram determinant {det} differs from 64|g1 g2 g3 g4|^2 = {64 * g}")
    gj = 1 - 2 * np.abs(coeffs.gamma) ** 2
    if np.any(np.abs(gj) <= G_TOL):
        raise ValidationFailed(f"Gram entries g_j = {gj} include zero")
    efmis.meta.update({"gamma0sq": coeffs.gamma0sq, "gamma": coeffs.gamma, "g": gj, "det": det})
    return efmis


# Gate library

GATE_SETS = {
    "CNOT": ("+-", "--", "10", "00"),
    "CZ": ("+1", "-1", "1+", "0+"),
    "CPHASE": ("-0", "+0", "-1+", "0+"),
    "SWAP": CASE1_LABELS,
}


def gate_matrix(name: str, phi: float | None = None) -> np.ndarray:
    name = name.upper()
    if name == "CNOT":
        return c2.cnot()
    if name == "CZ":
        return c2.cz()
    if name == "SWAP":
        return c2.swap()
    if name == "CPHASE":
        if phi is None:
            raise ValueError("CPHASE needs a phase")
        return c2.cphase(phi)
    if name in ("I", "ID", "IDENTITY"):
        return np.eye(4, dtype=complex)
    raise ValueError(f"unknown gate {name!r}")


def gate_efmis(name: str, phi: float | None = None) -> EFMIS:
    name = name.upper()
    if name not in GATE_SETS:
        raise ValueError(f"no library set for gate {name!r}")
    if name == "CPHASE" and not (phi is not None and 0 < phi < 2 * math.pi):
        raise ValueError("CPHASE phase must lie in (0, 2 pi)")
    labels = GATE_SETS[name]
    return make_efmis([ket(x) for x in labels], gate_matrix(name, phi), GATE_LIBRARY, labels, tol=1e-12)


def conjugate_set(efmis: EFMIS, frame: c2.LocalUnitaryFrame, direction: str = "pre") -> EFMIS:
    """Move an EFMIS through a local frame.

    ``pre``: the target ``U`` becomes ``(vA (x) wB) U (vTildeA (x) wTildeB)`` and
    each state is multiplied by ``(vTildeA (x) wTildeB)^dag``. ``post`` undoes
    this: the target becomes ``outer^dag U inner^dag`` and states are
    multiplied by ``inner``.
    """
    outer, inner = frame.outer(), frame.inner()
    if direction == "pre":
        target = outer @ efmis.target @ inner
        states = [inner.conj().T @ s for s in efmis.states]
    elif direction == "post":
        target = outer.conj().T @ efmis.target @ inner.conj().T
        states = [inner @ s for s in efmis.states]
    else:
        raise ValueError("direction must be 'pre' or 'post'")
    return make_efmis(states, target, efmis.caseTag, efmis.labels)
