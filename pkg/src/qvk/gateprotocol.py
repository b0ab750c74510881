"""Minimal-setting verification protocols for two-qubit unitaries.

Each test prepares a product input ``rho_j``, applies the device, and verifies
the expected output ``U rho_j U^dag`` with a state-verification strategy. A
product output costs one setting; an entangled output costs two.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import canon2q as c2
from . import efmis as ef
from . import idsets
from . import matkernel as mk
from . import prodgeom as pg
from . import stateverify as sv
from .errors import InfeasibleSpectrum, NotCPTP, SynthesisFailed, ValidationFailed

CPTP_TOL = 1e-8
PROTOCOL_MEMBER_TOL = 1e-12
SPAN_RESIDUAL_TOL = 1e-6
OVERLAP_MIN = 1e-6
SEARCH_BUDGET = 100

SE_SEEDS = ((1, 0), (0, 1), (1, 1), (1, 1j), (1, -1), (2, 1))

_Y_PLUS = np.array([1, 1j]) / math.sqrt(2)
CONNECTING_FACTORS = (ef.KET["0"], ef.KET["1"], ef.KET["+"], _Y_PLUS)


@dataclass(frozen=True)
class GateTest:
    probability: float
    input_state: np.ndarray
    strategy: sv.VerificationStrategy

    @property
    def settings(self) -> int:
        return self.strategy.setting_count


@dataclass(frozen=True)
class GateProtocol:
    target: np.ndarray
    tests: tuple
    settingCount: int
    classification: dict
    ordinary: bool = True
    meta: dict = field(default_factory=dict, compare=False)

    def input_set(self) -> idsets.StateSet:
        return idsets.StateSet(tuple(t.input_state for t in self.tests))

    def nus(self) -> list:
        return [t.strategy.nu for t in self.tests]

    def check(self) -> None:
        """Assert the structural invariants; raises ValidationFailed."""
        problems = []
        if abs(sum(t.probability for t in self.tests) - 1.0) > 1e-12:
            problems.append("test probabilities do not sum to 1")
        for k, t in enumerate(self.tests):
            expected = self.target @ t.input_state
            if np.linalg.norm(t.strategy.target.vector - expected) > 1e-10:
                problems.append(f"test {k} verifies the wrong output")
            if self.ordinary and not t.strategy.nu > 0:
                problems.append(f"test {k} has zero gap")
        connected, spanning = idsets.is_connected_spanning(self.input_set())
        if not (connected and spanning):
            problems.append("test states are not an identification set")
        if self.settingCount != sum(t.settings for t in self.tests):
            problems.append("setting count mismatch")
        if problems:
            raise ValidationFailed("; ".join(problems))

    def to_dict(self) -> dict:
        return {
            "target": mk.matrix_to_json(self.target),
            "mu": self.settingCount,
            "classification": self.classification,
            "ordinary": self.ordinary,
            "source": self.meta.get("source"),
            "tests": [
                {
                    "probability": t.probability,
                    "input": mk.vector_to_json(t.input_state),
                    "settings": t.settings,
                    "nu": t.strategy.nu,
                    "strategy": t.strategy.to_dict(),
                }
                for t in self.tests
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GateProtocol":
        tests = tuple(
            GateTest(float(t["probability"]), mk.vector_from_json(t["input"]),
                     sv.VerificationStrategy.from_dict(t["strategy"]))
            for t in obj["tests"]
        )
        protocol = cls(mk.matrix_from_json(obj["target"]), tests, int(obj["mu"]),
                       dict(obj.get("classification", {})), bool(obj.get("ordinary", True)),
                       {"source": obj.get("source")})
        protocol.check()
        return protocol


# Setting counts


def mu(u) -> int:
    return 5 if pg.classify_by_spectrum(u) == pg.S_E else 4


def mu_bounds_general(dA: int, dB: int) -> tuple[int, int]:
    if dA < 2 or dB < 2:
        raise ValueError("both local dimensions must be at least 2")
    d = dA * dB
    return d, 2 * d


def mu_from_dprod(d: int, dProd: int, prodConnected: bool) -> int:
    if not 0 <= dProd <= d:
        raise ValueError("dProd must lie in [0, d]")
    if dProd < d:
        return 2 * d - dProd
    return d if prodConnected else d + 1


# Protocol assembly


def _output_strategy(u: np.ndarray, psi: np.ndarray) -> sv.VerificationStrategy:
    out = sv.BipartiteState.from_unnormalized(u @ psi, 2, 2)
    return sv.two_setting_protocol(out)


def _assemble(u: np.ndarray, inputs, classification: dict, source: str) -> GateProtocol:
    inputs = [mk.normalize(s) for s in inputs]
    p = 1.0 / len(inputs)
    tests = tuple(GateTest(p, s, _output_strategy(u, s)) for s in inputs)
    protocol = GateProtocol(u, tests, sum(t.settings for t in tests), classification, True,
                            {"source": source})
    protocol.check()
    return protocol


def match_library_gate(u) -> tuple[str, float | None] | None:
    """Name (and phase) of a library gate equal to ``u`` up to global phase."""
    u = mk.as_matrix(u)
    candidates = [("CNOT", None), ("CZ", None), ("SWAP", None)]
    d = np.diag(u)
    if np.allclose(u, np.diag(d), atol=1e-10) and abs(d[0]) > 0:
        phi = float(np.angle(d[3] / d[0])) % (2 * math.pi)
        if 1e-10 < phi < 2 * math.pi - 1e-10:
            candidates.append(("CPHASE", phi))
    for name, phi in candidates:
        g = ef.gate_matrix(name, phi)
        if _equal_up_to_phase(u, g):
            return name, phi
    return None


def _equal_up_to_phase(u: np.ndarray, v: np.ndarray, tol: float = 1e-10) -> bool:
    k = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if abs(u[k]) < 1e-12:
        return False
    phase = u[k] / v[k]
    return abs(abs(phase) - 1) < tol and mk.max_abs(u - phase * v) < tol


def canonical_angles_of(u) -> c2.CanonicalAngles | None:
    """Canonical-cell angles when ``u`` is ``U(angles)`` up to global phase."""
    try:
        rec = c2.recover_angles(c2.operator_schmidt_spectrum(u))
    except InfeasibleSpectrum:
        return None
    if rec.kind != "Unique":
        return None
    return rec.angles if _equal_up_to_phase(mk.as_matrix(u), c2.build_canonical(rec.angles), 1e-9) else None


def connecting_state(basis_states) -> np.ndarray | None:
    """First product candidate outside the span of ``basis_states`` that overlaps each of them."""
    m = np.array(basis_states)
    q, _ = np.linalg.qr(m.T)
    for a, b in itertools.product(CONNECTING_FACTORS, repeat=2):
        cand = np.kron(a, b)
        residual = np.linalg.norm(cand - q @ (q.conj().T @ cand))
        if residual > SPAN_RESIDUAL_TOL and np.all(np.abs(m.conj() @ cand) > OVERLAP_MIN):
            return cand
    return None


def _se_canonical_inputs(angles: c2.CanonicalAngles) -> list:
    """Three constraint-family states plus one connecting product state."""
    tried = 0
    for triple in itertools.combinations(SE_SEEDS, 3):
        tried += 1
        if tried > SEARCH_BUDGET:
            break
        states = [pg.solve_constraint_magic(angles, g1, g2).state() for g1, g2 in triple]
        if mk.numerical_rank(np.array(states), idsets.RANK_TOL) < 3:
            continue
        extra = connecting_state(states)
        if extra is not None:
            return states + [extra]
    raise SynthesisFailed("no connecting state found for the S_E construction")


def _se_numeric_inputs(u: np.ndarray, seed: int) -> list:
    members = _protocol_members(u, seed)
    chosen = []
    for psi in members:
        if len(chosen) == 3:
            break
        if chosen and not np.all(np.abs(np.array(chosen).conj() @ psi) > OVERLAP_MIN):
            continue
        if mk.numerical_rank(np.array(chosen + [psi]), 1e-6) > len(chosen):
            chosen.append(psi)
    if len(chosen) == 3:
        extra = connecting_state(chosen)
        if extra is not None:
            return chosen + [extra]
    raise SynthesisFailed("no S_E construction found from sampled Prod(U) members")


def _protocol_members(u: np.ndarray, seed: int) -> list:
    rng = np.random.default_rng(seed)
    members = pg.prod_members(u, 200, rng)
    return [s for s in members if pg.concurrence(mk.normalize(u @ s)) < PROTOCOL_MEMBER_TOL]


def build_protocol(u, seed: int = 0) -> GateProtocol:
    """Minimal-setting ordinary protocol for a two-qubit unitary.

    Library gates (CNOT, CZ, C-Phase, SWAP, up to global phase) use their
    library EFMISs. Canonical ``U(angles)`` uses the case construction for
    S_EF and the three-plus-one construction for S_E. Anything else is handled
    from numerically sampled members of Prod(U).
    """
    u = mk.check_unitary(u)
    if u.shape != (4, 4):
        raise ValueError("expected a two-qubit (4x4) unitary")
    tag = pg.classify_by_spectrum(u)
    spectrum = c2.operator_schmidt_spectrum(u)
    classification = {"tag": tag, "spectrum": [float(x) for x in spectrum], "mu": mu(u)}

    lib = match_library_gate(u)
    if lib is not None:
        name, phi = lib
        labels = ef.GATE_SETS[name]
        classification["gate"] = name if phi is None else f"{name}({phi:.12g})"
        return _assemble(u, [ef.ket(x) for x in labels], classification, f"library:{name}")

    angles = canonical_angles_of(u)
    if angles is not None:
        classification["angles"] = list(angles.as_tuple())
        if tag == pg.S_E:
            return _assemble(u, _se_canonical_inputs(angles), classification, "canonical:S_E")
        e = ef.synthesize(angles)
        return _assemble(u, e.states, classification, f"canonical:{e.caseTag}")

    if tag == pg.S_E:
        return _assemble(u, _se_numeric_inputs(u, seed), classification, "numeric:S_E")
    members = _protocol_members(u, seed)
    if len(members) < 4:
        raise SynthesisFailed("too few members of Prod(U) were found")
    try:
        basis = idsets.extract_connected_basis(idsets.StateSet(tuple(members)))
        e = ef.make_efmis(basis.states, u, "Numeric")
    except (ValueError, ValidationFailed) as exc:
        raise SynthesisFailed(f"numeric EFMIS search failed: {exc}") from exc
    return _assemble(u, e.states, classification, "numeric:EFMIS")


# Channels as Choi matrices J = sum_ij |i><j| (x) L(|i><j|)


def choi_of(channel, dim: int = 4) -> np.ndarray:
    j = np.zeros((dim * dim, dim * dim), dtype=complex)
    for a in range(dim):
        for b in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[a, b] = 1.0
            j += mk.kron(e, channel(e))
    return j


def unitary_channel(v) -> np.ndarray:
    v = mk.check_unitary(v)
    return choi_of(lambda r: v @ r @ v.conj().T, v.shape[0])


def depolarizing_channel(u, p: float) -> np.ndarray:
    """``rho -> (1 - p) u rho u^dag + p tr(rho) I/d``."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    u = mk.check_unitary(u)
    d = u.shape[0]
    return choi_of(lambda r: (1 - p) * u @ r @ u.conj().T + p * np.trace(r) * np.eye(d) / d, d)


def check_cptp(choi, tol: float = CPTP_TOL) -> np.ndarray:
    j = mk.as_matrix(choi)
    n = j.shape[0]
    d = int(round(math.sqrt(n)))
    if j.shape != (n, n) or d * d != n:
        raise NotCPTP("Choi matrix must be square with a square dimension")
    if mk.hermiticity_error(j) > tol:
        raise NotCPTP("Choi matrix is not Hermitian")
    w, _ = mk.hermitian_eig(0.5 * (j + j.conj().T))
    if w[-1] < -tol:
        raise NotCPTP(f"Choi matrix has negative eigenvalue {w[-1]:.3g}")
    partial = np.einsum("iaja->ij", j.reshape(d, d, d, d))
    if mk.max_abs(partial - np.eye(d)) > tol:
        raise NotCPTP("channel is not trace preserving")
    return j


def apply_channel(choi, rho) -> np.ndarray:
    j = mk.as_matrix(choi)
    d = mk.as_matrix(rho).shape[0]
    return np.einsum("ij,iajb->ab", rho, j.reshape(d, d, d, d))


def pass_probability(protocol: GateProtocol, choi) -> float:
    """``sum_j p_j tr[Omega_j L(rho_j)]``."""
    j = check_cptp(choi)
    total = 0.0
    for t in protocol.tests:
        out = apply_channel(j, mk.projector(t.input_state))
        total += t.probability * float(np.real(np.trace(t.strategy.omega @ out)))
    return total
