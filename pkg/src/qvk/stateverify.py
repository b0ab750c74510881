"""Verification of bipartite pure states with nonadaptive local projective tests."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import matkernel as mk
from .errors import TargetNotFixed, ZeroGap

ENTANGLEMENT_THRESHOLD = 1e-10


@dataclass(frozen=True)
class BipartiteState:
    vector: np.ndarray
    dA: int
    dB: int

    def __post_init__(self):
        v = mk.as_vector(self.vector)
        if self.dA <= 0 or self.dB <= 0 or v.size != self.dA * self.dB:
            raise ValueError(f"state of dim {v.size} does not match dims ({self.dA}, {self.dB})")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError("state is not normalized")
        object.__setattr__(self, "vector", v)

    @classmethod
    def from_unnormalized(cls, vec, dA: int, dB: int) -> "BipartiteState":
        return cls(mk.normalize(vec), dA, dB)

    @property
    def dim(self) -> int:
        return self.dA * self.dB

    def to_dict(self) -> dict:
        return {"vector": mk.vector_to_json(self.vector), "dims": [self.dA, self.dB]}

    @classmethod
    def from_dict(cls, obj: dict) -> "BipartiteState":
        dA, dB = obj["dims"]
        return cls.from_unnormalized(mk.vector_from_json(obj["vector"]), int(dA), int(dB))


@dataclass(frozen=True)
class SchmidtData:
    coeffs: np.ndarray
    leftBasis: np.ndarray
    rightBasis: np.ndarray
    rank: int


@dataclass(frozen=True)
class Setting:
    """One nonadaptive local projective measurement with a pass rule.

    ``projectors_a[i] (x) projectors_b[j]`` is a pass outcome iff ``(i, j)`` is
    in ``pass_pairs``.
    """

    projectors_a: tuple
    projectors_b: tuple
    pass_pairs: tuple
    input_state: np.ndarray | None = None

    def operator(self) -> np.ndarray:
        pa, pb = self.projectors_a, self.projectors_b
        dim = pa[0].shape[0] * pb[0].shape[0]
        out = np.zeros((dim, dim), dtype=complex)
        for i, j in self.pass_pairs:
            out += mk.kron(pa[i], pb[j])
        return out

    def to_dict(self) -> dict:
        d = {
            "party_a": [mk.matrix_to_json(p) for p in self.projectors_a],
            "party_b": [mk.matrix_to_json(p) for p in self.projectors_b],
            "pass_pairs": [list(map(int, pair)) for pair in self.pass_pairs],
        }
        if self.input_state is not None:
            d["input"] = mk.vector_to_json(self.input_state)
        return d

    @classmethod
    def from_dict(cls, obj: dict) -> "Setting":
        inp = obj.get("input")
        return cls(
            tuple(mk.matrix_from_json(p) for p in obj["party_a"]),
            tuple(mk.matrix_from_json(p) for p in obj["party_b"]),
            tuple(tuple(pair) for pair in obj["pass_pairs"]),
            None if inp is None else mk.vector_from_json(inp),
        )


@dataclass(frozen=True)
class TestOperator:
    matrix: np.ndarray
    realization: Setting

    __test__ = False  # keep pytest from collecting this class


@dataclass(frozen=True)
class VerificationStrategy:
    tests: tuple  # of (probability, TestOperator)
    target: BipartiteState
    omega: np.ndarray
    nu: float
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def setting_count(self) -> int:
        return len(self.tests)

    def to_dict(self) -> dict:
        return {
            "target": self.target.to_dict(),
            "tests": [
                {
                    "probability": float(p),
                    "matrix": mk.matrix_to_json(t.matrix),
                    "realization": t.realization.to_dict(),
                }
                for p, t in self.tests
            ],
            "omega": mk.matrix_to_json(self.omega),
            "nu": float(self.nu),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "VerificationStrategy":
        target = BipartiteState.from_dict(obj["target"])
        tests = tuple(
            (float(t["probability"]), TestOperator(mk.matrix_from_json(t["matrix"]),
                                                    Setting.from_dict(t["realization"])))
            for t in obj["tests"]
        )
        return make_strategy(target, tests)


def schmidt_decompose(state: BipartiteState) -> SchmidtData:
    m = state.vector.reshape(state.dA, state.dB)
    u, s, v = mk.svd(m)
    right = v.conj()
    rank = int(np.sum(s > ENTANGLEMENT_THRESHOLD))
    return SchmidtData(coeffs=s, leftBasis=u, rightBasis=right, rank=rank)


def is_entangled(state: BipartiteState) -> bool:
    return schmidt_decompose(state).rank >= 2


def closed_form_gap(r: int) -> float:
    """Gap of the two-setting strategy for Schmidt rank ``r``; 1 for products."""
    if r <= 1:
        return 1.0
    return (1.0 - math.sqrt((r - 1) / r)) / 2.0


def _basis_projectors(basis: np.ndarray) -> tuple:
    return tuple(mk.projector(basis[:, k]) for k in range(basis.shape[1]))


def _two_outcome(vec: np.ndarray) -> tuple:
    p = mk.projector(vec)
    return (p, np.eye(vec.size) - p)


def make_strategy(target: BipartiteState, tests) -> VerificationStrategy:
    tests = tuple(tests)
    total = sum(p for p, _ in tests)
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"test probabilities sum to {total}, not 1")
    omega = sum(p * t.matrix for p, t in tests)
    nu = spectral_gap(omega, target.vector)
    return VerificationStrategy(tests=tests, target=target, omega=omega, nu=nu)


def single_test_protocol(state: BipartiteState, sd: SchmidtData | None = None) -> VerificationStrategy:
    """One-setting strategy for a product target: measure both Schmidt bases."""
    sd = sd or schmidt_decompose(state)
    setting = Setting(_basis_projectors(sd.leftBasis), _basis_projectors(sd.rightBasis), ((0, 0),))
    return make_strategy(state, [(1.0, TestOperator(setting.operator(), setting))])


def two_setting_protocol(state: BipartiteState) -> VerificationStrategy:
    """Two-setting strategy for an entangled bipartite pure state.

    Test 1 measures both parties in the Schmidt bases and passes on equal
    outcomes ``j < r``. Test 2 measures ``{|u><u|, I-|u><u|}`` on A and
    ``{|v><v|, I-|v><v|}`` on B and fails only on the outcome pair (u, not v),
    where ``u`` is the uniform superposition of the first ``r`` Schmidt vectors
    of A and ``v`` is the Schmidt-coefficient-weighted superposition on B.
    Product targets fall back to :func:`single_test_protocol`.
    """
    sd = schmidt_decompose(state)
    r = sd.rank
    if r < 2:
        return single_test_protocol(state, sd)

    sa = _basis_projectors(sd.leftBasis)
    sb = _basis_projectors(sd.rightBasis)
    s1 = Setting(sa, sb, tuple((j, j) for j in range(r)))

    u = sd.leftBasis[:, :r].sum(axis=1) / math.sqrt(r)
    lam = sd.coeffs[:r] / np.linalg.norm(sd.coeffs[:r])
    v = sd.rightBasis[:, :r] @ lam
    s2 = Setting(_two_outcome(u), _two_outcome(v), ((0, 0), (1, 0), (1, 1)))

    tests = [(0.5, TestOperator(s1.operator(), s1)), (0.5, TestOperator(s2.operator(), s2))]
    strategy = make_strategy(state, tests)
    strategy.meta["schmidt_rank"] = r
    return strategy


def spectral_gap(omega, target, tol: float = 1e-9) -> float:
    """``1 - beta(omega)``, the gap below the target's eigenvalue 1."""
    omega = mk.as_matrix(omega)
    target = mk.as_vector(target)
    w, _ = mk.hermitian_eig(omega, tol=tol)
    if w[-1] < -tol or w[0] > 1 + tol:
        raise ValueError(f"omega has eigenvalues outside [0, 1]: [{w[-1]:.3g}, {w[0]:.3g}]")
    if np.linalg.norm(omega @ target - target) > tol:
        raise TargetNotFixed("omega does not leave the target invariant")
    if w.size < 2:
        return 1.0
    return float(1.0 - w[1])


def sample_count(nu: float, eps: float, delta: float) -> int:
    """Number of tests needed to certify infidelity below ``eps`` at significance ``delta``."""
    if nu <= 0:
        raise ZeroGap(f"spectral gap {nu} is not positive")
    if nu > 1 + 1e-12:
        raise ValueError(f"spectral gap {nu} exceeds 1")
    if not (0 < eps < 1) or not (0 < delta < 1):
        raise ValueError("eps and delta must lie in (0, 1)")
    n = math.log(delta) / math.log1p(-min(nu, 1.0) * eps)
    return max(1, math.ceil(n))


def max_pass_probability(omega, eps: float, target) -> float:
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    return 1.0 - spectral_gap(omega, target) * eps
