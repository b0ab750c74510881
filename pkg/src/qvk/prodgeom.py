"""Product-state geometry of two-qubit unitaries.

A product input ``|phi0> = sum_k gamma_k |Phi_k>`` (magic basis) has zero
concurrence iff ``sum_k gamma_k^2 = 0``. The canonical unitary is diagonal in
the magic basis with entries ``exp(-i lambda_k)``, so the output is product iff
also ``sum_k gamma_k^2 exp(-2i lambda_k) = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import canon2q as c2
from . import matkernel as mk
from .errors import DegenerateSeed, InsufficientSamples, ProductUnitary, RangeUnsupported

TAU_EQ = c2.TAU_EQ
MEMBER_TOL = 1e-8
DPROD_RANK_TOL = 1e-7

S_E = "S_E"
S_EF = "S_EF"


@dataclass(frozen=True)
class MagicCoeffs:
    gamma: np.ndarray

    def __post_init__(self):
        g = mk.as_vector(self.gamma)
        if g.size != 4 or abs(np.linalg.norm(g) - 1.0) > 1e-10:
            raise ValueError("magic coefficients must be four numbers of unit norm")
        object.__setattr__(self, "gamma", g)

    def state(self) -> np.ndarray:
        """The state in the computational basis."""
        return c2.magic_matrix() @ self.gamma


@dataclass(frozen=True)
class RegionTag:
    tag: str
    reducedAngles: c2.CanonicalAngles

    def to_dict(self) -> dict:
        return {
            "tag": self.tag,
            "reduced_angles": list(self.reducedAngles.as_tuple()),
            "reduced_angles_pi_units": [a / math.pi for a in self.reducedAngles.as_tuple()],
        }


@dataclass(frozen=True)
class RegionSample:
    zeta0sq: float
    xi: tuple


def concurrence(state) -> float:
    c = mk.as_vector(state)
    if c.size != 4:
        raise ValueError("concurrence needs a two-qubit state")
    if abs(np.linalg.norm(c) - 1.0) > 1e-10:
        raise ValueError("state is not normalized")
    return float(min(2.0 * abs(c[0] * c[3] - c[1] * c[2]), 1.0))


def magic_coeffs(state) -> np.ndarray:
    return c2.magic_matrix().conj().T @ mk.as_vector(state)


def lambdas(angles: c2.CanonicalAngles) -> np.ndarray:
    """Phases with ``U(angles) |Phi_k> = exp(-i lambda_k) |Phi_k>``."""
    a1, a2, a3 = angles.as_tuple()
    return np.array([a1 - a2 + a3, -a1 + a2 + a3, a1 + a2 - a3, -a1 - a2 - a3])


def constraint_residual(angles: c2.CanonicalAngles, state) -> tuple[float, float]:
    """Concurrences of the input and of its image under ``U(angles)``."""
    psi = mk.as_vector(state)
    out = c2.build_canonical(angles) @ psi
    return concurrence(psi), concurrence(out / np.linalg.norm(out))


def _principal_sqrt(z: complex) -> complex:
    r = complex(np.sqrt(complex(z)))
    if r.real < 0 or (r.real == 0 and r.imag < 0):
        r = -r
    return r


def constraint_ratios(angles: c2.CanonicalAngles) -> tuple[complex, complex, complex, complex]:
    """``(r31, r32, r41, r42)`` with ``gamma3^2 = r31 g1^2 + r32 g2^2`` and so on."""
    a1, a2, a3 = (2.0 * a for a in angles.as_tuple())
    s = math.sin(a1 + a2)
    e = lambda x: complex(np.exp(1j * (x + math.pi)))  # noqa: E731
    return (
        e(a2 - a3) * math.sin(a1 + a3) / s,
        e(a1 - a3) * math.sin(a2 + a3) / s,
        e(-a1 - a3) * math.sin(a2 - a3) / s,
        e(-a2 - a3) * math.sin(a1 - a3) / s,
    )


def solve_constraint_magic(angles: c2.CanonicalAngles, g1: complex, g2: complex) -> MagicCoeffs:
    a_sum = angles.a1 + angles.a2
    if not (TAU_EQ < a_sum < math.pi / 2 - TAU_EQ):
        raise RangeUnsupported(f"a1 + a2 = {a_sum} is outside (0, pi/2)")
    r31, r32, r41, r42 = constraint_ratios(angles)
    g1, g2 = complex(g1), complex(g2)
    g3 = _principal_sqrt(r31 * g1 * g1 + r32 * g2 * g2)
    g4 = _principal_sqrt(r41 * g1 * g1 + r42 * g2 * g2)
    gamma = np.array([g1, g2, g3, g4])
    n = np.linalg.norm(gamma)
    if n < 1e-14:
        raise DegenerateSeed("seed (g1, g2) gives the zero vector")
    return MagicCoeffs(gamma / n)


def reduce_angles(a1: float, a2: float, a3: float) -> c2.CanonicalAngles:
    """Fold arbitrary angles into the canonical cell.

    Uses the period pi/2 in each angle and the reflection ``a -> pi/2 - a``,
    then sorts descending.
    """
    half = math.pi / 2
    out = []
    for a in (a1, a2, a3):
        x = math.fmod(float(a), half)
        if x < 0:
            x += half
        if x > math.pi / 4:
            x = half - x
        out.append(min(max(x, 0.0), math.pi / 4))
    out.sort(reverse=True)
    return c2.CanonicalAngles(*out)


def classify_region(a1: float, a2: float, a3: float, tol: float = TAU_EQ) -> RegionTag:
    r = reduce_angles(a1, a2, a3)
    in_se = (
        abs(r.a1 - r.a2) < tol
        and abs(r.a2 - r.a3) < tol
        and r.a3 > tol
        and r.a1 < math.pi / 4 - tol
    )
    return RegionTag(S_E if in_se else S_EF, r)


def classify_by_spectrum(u, tol: float = TAU_EQ) -> str:
    s = c2.operator_schmidt_spectrum(u)
    in_se = s[0] > s[1] + tol and abs(s[1] - s[2]) < tol and abs(s[2] - s[3]) < tol and s[3] > tol
    return S_E if in_se else S_EF


def region_sample(angles: c2.CanonicalAngles) -> RegionSample:
    q = np.abs(c2.zeta(angles)) ** 2
    rest = 1.0 - q[0]
    if rest <= mk.TAU_ZERO:
        raise ProductUnitary("|zeta0| = 1, the barycentric coordinates are undefined")
    return RegionSample(float(q[0]), tuple(float(x / rest) for x in q[1:]))


# d_Prod estimation

NEWTON_STEPS = 120


def _qubits(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    return np.stack([np.cos(theta), np.exp(1j * phi) * np.sin(theta)], axis=-1)


def _dqubits(theta: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    e = np.exp(1j * phi)
    zero = np.zeros_like(e)
    return (np.stack([-np.sin(theta) + 0j, e * np.cos(theta)], axis=-1),
            np.stack([zero, 1j * e * np.sin(theta)], axis=-1))


def _det(c: np.ndarray) -> np.ndarray:
    return c[:, 0] * c[:, 3] - c[:, 1] * c[:, 2]


def _ddet(c: np.ndarray, dc: np.ndarray) -> np.ndarray:
    return dc[:, 0] * c[:, 3] + c[:, 0] * dc[:, 3] - dc[:, 1] * c[:, 2] - c[:, 1] * dc[:, 2]


def _kron_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a[:, :, None] * b[:, None, :]).reshape(-1, 4)


def _project_onto_prod(u: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Batched minimum-norm Gauss-Newton on ``det(u (a (x) b)) = 0``.

    ``x`` holds rows ``(theta_a, phi_a, theta_b, phi_b)``. Near degenerate
    members the residual is quadratic in the distance and convergence is only
    linear, hence the fixed, generous step count.
    """
    x = x.copy()
    for _ in range(NEWTON_STEPS):
        a, b = _qubits(x[:, 0], x[:, 1]), _qubits(x[:, 2], x[:, 3])
        da, db = _dqubits(x[:, 0], x[:, 1]), _dqubits(x[:, 2], x[:, 3])
        c = _kron_rows(a, b) @ u.T
        z = _det(c)
        dz = np.stack([
            _ddet(c, _kron_rows(da[0], b) @ u.T),
            _ddet(c, _kron_rows(da[1], b) @ u.T),
            _ddet(c, _kron_rows(a, db[0]) @ u.T),
            _ddet(c, _kron_rows(a, db[1]) @ u.T),
        ], axis=-1)
        jac = np.stack([dz.real, dz.imag], axis=1)  # (n, 2, 4)
        res = np.stack([z.real, z.imag], axis=-1)[:, :, None]
        step = np.linalg.pinv(jac, rcond=1e-14) @ res
        x -= step[:, :, 0]
    return x


def prod_members(u, count: int, rng: np.random.Generator, angles: c2.CanonicalAngles | None = None,
                 tol: float = MEMBER_TOL) -> list:
    """Sample up to ``count`` members of Prod(u).

    Constraint-family solutions are used when ``angles`` describe ``u``
    itself. Otherwise random product inputs (Haar factors) are accepted when
    already members and are pushed onto Prod(u) by a Newton solve when not.
    At most ``4 * count`` candidates are drawn.
    """
    u = mk.check_unitary(u)
    use_family = (
        angles is not None
        and TAU_EQ < angles.a1 + angles.a2 < math.pi / 2 - TAU_EQ
        and np.allclose(c2.build_canonical(angles), u, atol=1e-10)
    )
    if use_family:
        candidates = []
        for g in rng.normal(size=(4 * count, 4)):
            try:
                candidates.append(solve_constraint_magic(angles, complex(g[0], g[1]), complex(g[2], g[3])).state())
            except DegenerateSeed:
                continue
        candidates = np.array(candidates)
    else:
        a = np.array([mk.random_state(2, rng) for _ in range(4 * count)])
        b = np.array([mk.random_state(2, rng) for _ in range(4 * count)])
        # (theta, phi) form with the global phase of each factor dropped
        x = np.column_stack([
            np.arctan2(np.abs(a[:, 1]), np.abs(a[:, 0])), np.angle(a[:, 1]) - np.angle(a[:, 0]),
            np.arctan2(np.abs(b[:, 1]), np.abs(b[:, 0])), np.angle(b[:, 1]) - np.angle(b[:, 0]),
        ])
        direct = np.abs(_det(_kron_rows(_qubits(x[:, 0], x[:, 1]), _qubits(x[:, 2], x[:, 3])) @ u.T)) < tol / 2
        x[~direct] = _project_onto_prod(u, x[~direct])
        candidates = _kron_rows(_qubits(x[:, 0], x[:, 1]), _qubits(x[:, 2], x[:, 3]))
    members = []
    for psi in candidates:
        if len(members) >= count:
            break
        out = u @ psi
        if concurrence(psi) < tol and concurrence(out / np.linalg.norm(out)) < tol:
            members.append(psi)
    return members


def d_prod_estimate(u, samples: int = 200, seed: int = 0, angles: c2.CanonicalAngles | None = None) -> int:
    """Numerical dimension of span Prod(u)."""
    if samples < 50:
        raise ValueError("samples must be at least 50")
    rng = np.random.default_rng(seed)
    members = prod_members(u, samples, rng, angles)
    if len(members) < 4:
        raise InsufficientSamples(f"only {len(members)} members of Prod(U) found")
    return mk.numerical_rank(np.array(members), DPROD_RANK_TOL)
