"""Seeded Monte-Carlo runs of state- and gate-verification protocols.

Randomness comes from counter-based Philox streams keyed by ``(seed, chunk)``
where trials are split into fixed chunks of ``CHUNK`` trials. Any execution
order or worker count therefore yields the same counts.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import gateprotocol as gp
from . import matkernel as mk
from . import stateverify as sv
from .errors import ScenarioError

CHUNK = 8192
SEED_MASK = (1 << 64) - 1

IDEAL = "Ideal"
DEPOLARIZING_STATE = "DepolarizingState"
DEPOLARIZING_CHANNEL = "DepolarizingChannel"
UNITARY_PERTURBATION = "UnitaryPerturbation"
WORST_CASE = "WorstCase"
KINDS = (IDEAL, DEPOLARIZING_STATE, DEPOLARIZING_CHANNEL, UNITARY_PERTURBATION, WORST_CASE)


@dataclass(frozen=True)
class NoiseModel:
    kind: str = IDEAL
    p: float = 0.0
    generator: np.ndarray | None = None
    strength: float = 0.0
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        if not 0 <= self.eps <= 1:
            raise ValueError("eps must lie in [0, 1]")
        if self.kind == UNITARY_PERTURBATION:
            if self.generator is None:
                raise ValueError("UnitaryPerturbation needs a generator")
            g = mk.as_matrix(self.generator)
            if mk.hermiticity_error(g) > mk.TAU_HERM:
                raise ValueError("generator must be Hermitian")
            object.__setattr__(self, "generator", g)

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls(IDEAL)

    @classmethod
    def depolarizing_state(cls, p: float) -> "NoiseModel":
        return cls(DEPOLARIZING_STATE, p=p)

    @classmethod
    def depolarizing_channel(cls, p: float) -> "NoiseModel":
        return cls(DEPOLARIZING_CHANNEL, p=p)

    @classmethod
    def unitary_perturbation(cls, generator, strength: float) -> "NoiseModel":
        return cls(UNITARY_PERTURBATION, generator=generator, strength=strength)

    @classmethod
    def worst_case(cls, eps: float) -> "NoiseModel":
        return cls(WORST_CASE, eps=eps)

    def perturbation(self) -> np.ndarray:
        """``exp(-i strength G)``."""
        v = mk.expm_hermitian(self.generator, self.strength)
        if not mk.is_unitary(v, 1e-10):
            raise ValueError("perturbation is not unitary within 1e-10")
        return v

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind in (DEPOLARIZING_STATE, DEPOLARIZING_CHANNEL):
            d["p"] = self.p
        elif self.kind == UNITARY_PERTURBATION:
            d["generator"] = mk.matrix_to_json(self.generator)
            d["strength"] = self.strength
        elif self.kind == WORST_CASE:
            d["eps"] = self.eps
        return d

    @classmethod
    def from_dict(cls, obj: dict) -> "NoiseModel":
        kind = obj.get("kind", IDEAL)
        gen = obj.get("generator")
        return cls(
            kind,
            p=float(obj.get("p", 0.0)),
            generator=None if gen is None else mk.matrix_from_json(gen),
            strength=float(obj.get("strength", 0.0)),
            eps=float(obj.get("eps", 0.0)),
        )


@dataclass(frozen=True)
class SimReport:
    trials: int
    passes: int
    analyticBound: float
    perTestCounts: tuple  # of (runs, passes) per test
    seed: int
    extra: dict = field(default_factory=dict)

    @property
    def empiricalPassRate(self) -> float:
        return self.passes / self.trials

    def sigma(self) -> float:
        """Binomial standard deviation of the rate under the analytic value."""
        q = self.analyticBound
        return math.sqrt(max(q * (1 - q), 0.0) / self.trials)

    def to_dict(self) -> dict:
        d = {
            "trials": self.trials,
            "passes": self.passes,
            "empiricalPassRate": self.empiricalPassRate,
            "analyticBound": self.analyticBound,
            "perTestCounts": [{"runs": r, "passes": p} for r, p in self.perTestCounts],
            "seed": self.seed,
        }
        d.update(self.extra)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _stream(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(seed & SEED_MASK) | (chunk << 64)))


def _run_chunks(probs: np.ndarray, pass_probs: np.ndarray, trials: int, seed: int,
                workers: int = 1) -> np.ndarray:
    """Counts ``[[runs, passes], ...]`` per outcome slot over all trials."""
    n_chunks = -(-trials // CHUNK)

    def one(c: int) -> np.ndarray:
        n = min(CHUNK, trials - c * CHUNK)
        rng = _stream(seed, c)
        slot = rng.choice(len(probs), size=n, p=probs)
        ok = rng.random(n) < pass_probs[slot]
        runs = np.bincount(slot, minlength=len(probs))
        passes = np.bincount(slot[ok], minlength=len(probs))
        return np.stack([runs, passes], axis=1)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(one, range(n_chunks)))
    else:
        parts = [one(c) for c in range(n_chunks)]
    return np.sum(parts, axis=0)


def _check_trials(trials: int) -> None:
    if trials < 1:
        raise ValueError("trials must be at least 1")


def source_state(strategy: sv.VerificationStrategy, source: NoiseModel) -> np.ndarray:
    """Density matrix emitted by the noisy source."""
    psi = strategy.target.vector
    d = psi.size
    target = mk.projector(psi)
    if source.kind == IDEAL:
        return target
    if source.kind in (DEPOLARIZING_STATE, DEPOLARIZING_CHANNEL):
        return (1 - source.p) * target + source.p * np.eye(d) / d
    if source.kind == UNITARY_PERTURBATION:
        return mk.projector(source.perturbation() @ psi)
    return worst_case_state(strategy, source.eps)


def worst_case_state(strategy: sv.VerificationStrategy, eps: float) -> np.ndarray:
    """Infidelity-``eps`` mixture of the target and the second eigenvector of Omega."""
    psi = strategy.target.vector
    _, v = mk.hermitian_eig(strategy.omega)
    w = v[:, 1] - psi * np.vdot(psi, v[:, 1])
    w = w / np.linalg.norm(w)
    return (1 - eps) * mk.projector(psi) + eps * mk.projector(w)


def run_state_verification(strategy: sv.VerificationStrategy, source: NoiseModel, trials: int,
                           seed: int, workers: int = 1) -> SimReport:
    _check_trials(trials)
    rho = source_state(strategy, source)
    probs = np.array([p for p, _ in strategy.tests])
    pass_probs = np.array([min(max(np.trace(t.matrix @ rho).real, 0.0), 1.0) for _, t in strategy.tests])
    counts = _run_chunks(probs, pass_probs, trials, seed, workers)
    analytic = float(np.real(np.trace(strategy.omega @ rho)))
    return SimReport(trials, int(counts[:, 1].sum()), analytic,
                     tuple((int(r), int(p)) for r, p in counts), seed)


def device_channel(protocol: gp.GateProtocol, channel: NoiseModel) -> np.ndarray:
    """Choi matrix of the noisy device."""
    u = protocol.target
    if channel.kind == IDEAL:
        return gp.unitary_channel(u)
    if channel.kind in (DEPOLARIZING_CHANNEL, DEPOLARIZING_STATE):
        return gp.depolarizing_channel(u, channel.p)
    if channel.kind == UNITARY_PERTURBATION:
        return gp.unitary_channel(channel.perturbation() @ u)
    raise ScenarioError(f"noise kind {channel.kind} does not describe a gate channel")


def run_gate_verification(protocol: gp.GateProtocol, channel: NoiseModel, trials: int, seed: int,
                          workers: int = 1) -> SimReport:
    _check_trials(trials)
    choi = gp.check_cptp(device_channel(protocol, channel))
    probs, pass_probs, owner = [], [], []
    for j, t in enumerate(protocol.tests):
        out = gp.apply_channel(choi, mk.projector(t.input_state))
        for q, e in t.strategy.tests:
            probs.append(t.probability * q)
            pass_probs.append(min(max(np.trace(e.matrix @ out).real, 0.0), 1.0))
            owner.append(j)
    probs = np.array(probs)
    counts = _run_chunks(probs / probs.sum(), np.array(pass_probs), trials, seed, workers)
    per_test = np.zeros((len(protocol.tests), 2), dtype=int)
    for slot, j in enumerate(owner):
        per_test[j] += counts[slot]
    analytic = gp.pass_probability(protocol, choi)
    return SimReport(trials, int(counts[:, 1].sum()), analytic,
                     tuple((int(r), int(p)) for r, p in per_test), seed)


def empirical_sample_complexity(strategy: sv.VerificationStrategy, eps: float, delta: float,
                                replicates: int, seed: int, source_eps: float | None = None
                                ) -> tuple[int, float]:
    """``(N, acceptance rate)`` for a worst-case source over ``N`` consecutive tests.

    ``N`` is the sample count at ``(nu, eps, delta)``. The source has
    infidelity ``source_eps`` (default ``eps``); a replicate accepts when all
    ``N`` tests pass.
    """
    n = sv.sample_count(strategy.nu, eps, delta)
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    rho = worst_case_state(strategy, eps if source_eps is None else source_eps)
    probs = np.array([p for p, _ in strategy.tests])
    pass_probs = np.array([min(max(np.trace(t.matrix @ rho).real, 0.0), 1.0) for _, t in strategy.tests])
    per_chunk = max(1, CHUNK // n)
    accepted = 0
    for c in range(-(-replicates // per_chunk)):
        r = min(per_chunk, replicates - c * per_chunk)
        rng = _stream(seed, c)
        slot = rng.choice(len(probs), size=(r, n), p=probs)
        ok = rng.random((r, n)) < pass_probs[slot]
        accepted += int(np.all(ok, axis=1).sum())
    return n, accepted / replicates


# Scenario files


def _require(obj: dict, key: str, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ScenarioError(f"scenario is missing {key!r}")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ScenarioError(f"scenario field {key!r} has the wrong type")
    return value


def _load_json(path, base_dir) -> dict:
    from pathlib import Path

    p = Path(path)
    if not p.is_absolute() and base_dir is not None:
        p = Path(base_dir) / p
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read {p}: {exc}") from exc


def scenario_strategy(target: dict, base_dir=None) -> sv.VerificationStrategy:
    if "strategy" in target:
        return sv.VerificationStrategy.from_dict(target["strategy"])
    if "strategy_file" in target:
        return sv.VerificationStrategy.from_dict(_load_json(target["strategy_file"], base_dir))
    if "vector" in target:
        return sv.two_setting_protocol(sv.BipartiteState.from_dict(target))
    raise ScenarioError("state target needs 'vector', 'strategy' or 'strategy_file'")


def scenario_protocol(target: dict, base_dir=None, seed: int = 0) -> gp.GateProtocol:
    from . import canon2q as c2
    from . import efmis as ef

    if "protocol" in target:
        return gp.GateProtocol.from_dict(target["protocol"])
    if "protocol_file" in target:
        return gp.GateProtocol.from_dict(_load_json(target["protocol_file"], base_dir))
    if "gate" in target:
        phi = target.get("phi_pi")
        u = ef.gate_matrix(str(target["gate"]), None if phi is None else float(phi) * math.pi)
    elif "angles_pi" in target:
        a = [float(x) for x in target["angles_pi"]]
        if len(a) != 3:
            raise ScenarioError("'angles_pi' needs three numbers")
        u = c2.build_canonical(c2.CanonicalAngles.from_pi_units(*a))
    elif "unitary" in target:
        u = mk.matrix_from_json(target["unitary"])
    else:
        raise ScenarioError("gate target needs 'gate', 'angles_pi', 'unitary', 'protocol' or 'protocol_file'")
    return gp.build_protocol(u, seed=seed)


def run_scenario(obj: dict, base_dir=None, seed_override: int | None = None, workers: int = 1) -> dict:
    """Execute a scenario dictionary and return the report as a dictionary."""
    kind = _require(obj, "kind", str)
    seed = int(_require(obj, "seed", int)) if seed_override is None else int(seed_override)
    target = _require(obj, "target", dict)
    try:
        noise = NoiseModel.from_dict(obj.get("noise", {"kind": IDEAL}))
    except (ValueError, TypeError, AttributeError) as exc:
        raise ScenarioError(f"bad noise model: {exc}") from exc
    try:
        if kind == "state":
            trials = _require(obj, "trials", int)
            report = run_state_verification(scenario_strategy(target, base_dir), noise, trials, seed, workers)
            return {"kind": kind, "noise": noise.to_dict(), **report.to_dict()}
        if kind == "gate":
            trials = _require(obj, "trials", int)
            report = run_gate_verification(scenario_protocol(target, base_dir), noise, trials, seed, workers)
            return {"kind": kind, "noise": noise.to_dict(), **report.to_dict()}
        if kind == "sample_complexity":
            strategy = scenario_strategy(target, base_dir)
            eps = float(_require(obj, "eps"))
            delta = float(_require(obj, "delta"))
            replicates = int(_require(obj, "replicates", int))
            src = obj.get("source_eps")
            n, rate = empirical_sample_complexity(strategy, eps, delta, replicates, seed,
                                                  None if src is None else float(src))
            return {"kind": kind, "analyticN": n, "empiricalAcceptRateAtN": rate, "nu": strategy.nu,
                    "eps": eps, "delta": delta, "replicates": replicates, "seed": seed}
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc
    raise ScenarioError(f"unknown scenario kind {kind!r}")
