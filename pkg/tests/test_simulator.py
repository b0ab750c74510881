import json
import math

import numpy as np
import pytest

from qvk import canon2q as c2
from qvk import gateprotocol as gp
from qvk import simulator as sim
from qvk import stateverify as sv
from qvk.errors import ScenarioError

BELL = sv.BipartiteState(np.array([1, 0, 0, 1]) / math.sqrt(2), 2, 2)
BELL_VEC = {"dim": 4, "data": [[1, 0], [0, 0], [0, 0], [1, 0]]}


def test_depolarized_bell_rate():
    r = sim.run_state_verification(sv.two_setting_protocol(BELL), sim.NoiseModel.depolarizing_state(0.1),
                                   100000, seed=3)
    assert r.analyticBound == pytest.approx(0.9625)
    assert abs(r.empiricalPassRate - 0.9625) < 4 * r.sigma()
    assert sum(n for n, _ in r.perTestCounts) == 100000


def test_worker_count_does_not_change_report():
    s = sv.two_setting_protocol(BELL)
    noise = sim.NoiseModel.depolarizing_state(0.2)
    a = sim.run_state_verification(s, noise, 30000, seed=9, workers=1)
    b = sim.run_state_verification(s, noise, 30000, seed=9, workers=4)
    assert a.to_json() == b.to_json()
    c = sim.run_state_verification(s, noise, 30000, seed=10)
    assert c.to_json() != a.to_json()


def test_ideal_source_always_passes():
    r = sim.run_state_verification(sv.two_setting_protocol(BELL), sim.NoiseModel.ideal(), 5000, seed=1)
    assert r.passes == 5000


def test_worst_case_state_hits_bound():
    s = sv.two_setting_protocol(BELL)
    rho = sim.worst_case_state(s, 0.1)
    assert np.real(np.trace(s.omega @ rho)) == pytest.approx(sv.max_pass_probability(s.omega, 0.1, BELL.vector))
    assert np.real(BELL.vector.conj() @ rho @ BELL.vector) == pytest.approx(0.9)


def test_empirical_sample_complexity():
    s = sv.two_setting_protocol(BELL)
    n, rate = sim.empirical_sample_complexity(s, 0.1, 0.05, 4000, seed=11)
    assert n == 204
    assert rate <= 0.05 + 4 * math.sqrt(0.05 * 0.95 / 4000)
    assert sim.empirical_sample_complexity(s, 0.1, 0.05, 500, seed=11, source_eps=0.0) == (204, 1.0)


def test_gate_run_matches_analytic():
    p = gp.build_protocol(c2.cnot())
    r = sim.run_gate_verification(p, sim.NoiseModel.depolarizing_channel(0.1), 50000, seed=4)
    assert r.analyticBound == pytest.approx(0.925)
    assert abs(r.empiricalPassRate - 0.925) < 4 * r.sigma()
    assert len(r.perTestCounts) == 4


def test_unitary_perturbation_lowers_rate(rng):
    p = gp.build_protocol(c2.cnot())
    g = np.diag([1.0, -1.0, 0.5, -0.5])
    r = sim.run_gate_verification(p, sim.NoiseModel.unitary_perturbation(g, 0.3), 20000, seed=2)
    assert r.analyticBound < 1


def test_noise_model_validation():
    with pytest.raises(ValueError):
        sim.NoiseModel("Cosmic")
    with pytest.raises(ValueError):
        sim.NoiseModel.depolarizing_state(1.5)
    with pytest.raises(ValueError):
        sim.NoiseModel.unitary_perturbation(np.array([[0, 1], [0, 0]]), 0.1)
    m = sim.NoiseModel.worst_case(0.2)
    assert sim.NoiseModel.from_dict(m.to_dict()) == m


def test_scenarios(tmp_path):
    state = {"kind": "state", "target": {"vector": BELL_VEC, "dims": [2, 2]},
             "noise": {"kind": "DepolarizingState", "p": 0.1}, "trials": 20000, "seed": 5}
    a = sim.run_scenario(state)
    assert json.dumps(a, sort_keys=True) == json.dumps(sim.run_scenario(state), sort_keys=True)
    assert sim.run_scenario(state, seed_override=6)["seed"] == 6

    proto = gp.build_protocol(c2.cz()).to_dict()
    (tmp_path / "p.json").write_text(json.dumps(proto))
    gate = {"kind": "gate", "target": {"protocol_file": "p.json"}, "trials": 1000, "seed": 1}
    assert sim.run_scenario(gate, tmp_path)["passes"] == 1000

    for bad in ({"kind": "state", "target": {}, "trials": 10},
                {**state, "kind": "weird"},
                {**state, "noise": {"kind": "Nope"}},
                {**state, "trials": "many"}):
        with pytest.raises(ScenarioError):
            sim.run_scenario(bad)
