import math

import numpy as np
import pytest

from qvk import canon2q as c2
from qvk import efmis as ef
from qvk import idsets
from qvk import matkernel as mk
from qvk.errors import CasePreconditionViolated, InSE, ValidationFailed

Q = math.pi / 4


@pytest.mark.parametrize("name,phi", [("CNOT", None), ("CZ", None), ("SWAP", None),
                                      ("CPHASE", math.pi / 3), ("CPHASE", math.pi / 2), ("CPHASE", math.pi)])
def test_library_sets_validate(name, phi):
    e = ef.gate_efmis(name, phi)
    r = e.report
    assert r.passed and r.rank == 4 and r.connected
    assert max(r.input_concurrences + r.output_concurrences) < 1e-10
    assert idsets.is_connected_basis(e.state_set())


def test_ket_labels():
    assert np.allclose(ef.ket("10"), [0, 0, 1, 0])
    assert np.allclose(ef.ket("-1+"), -ef.ket("1+"))
    assert np.allclose(ef.ket("+-"), np.array([1, -1, 1, -1]) / 2)


def test_factorize_product(rng):
    a, b = mk.random_state(2, rng), mk.random_state(2, rng)
    fa, fb = ef.factorize_product(np.kron(a, b))
    assert np.allclose(np.kron(fa, fb), np.kron(a, b), atol=1e-12)


def test_validate_reports_failures():
    comp = [np.eye(4)[k] for k in range(4)]
    r = ef.validate(comp, c2.cnot())
    assert not r.passed and r.failures == ("transition graph is disconnected",)
    bell = [np.array([1, 0, 0, 1]) / math.sqrt(2)] + [ef.ket(x) for x in ("01", "10", "++")]
    assert any("input 0" in f for f in ef.validate(bell, np.eye(4)).failures)
    with pytest.raises(ValidationFailed):
        ef.make_efmis(comp, c2.cnot(), ef.GATE_LIBRARY)


def test_synthesize_cases():
    assert ef.synthesize(c2.CanonicalAngles(Q, Q, 0)).caseTag == ef.CASE1
    assert ef.synthesize(c2.CanonicalAngles(Q, Q, Q)).caseTag == ef.CASE1
    assert ef.synthesize(c2.CanonicalAngles(0, 0, 0)).caseTag == ef.CASE2
    e = ef.synthesize(c2.CanonicalAngles(Q, math.pi / 8, 0))
    assert e.caseTag == ef.CASE3
    assert e.meta["gamma0sq"].real == pytest.approx(0.14644660940672627, abs=1e-12)
    with pytest.raises(InSE):
        ef.synthesize(c2.CanonicalAngles(0.2, 0.2, 0.2))
    with pytest.raises(ValueError):
        ef.synthesize(c2.CanonicalAngles(0.1, 0.2, 0.0))


def test_case3_precondition():
    with pytest.raises(CasePreconditionViolated):
        ef.case3_coeffs(c2.CanonicalAngles(0.3, 0.3, 0.3))
    with pytest.raises(CasePreconditionViolated):
        ef.case3_coeffs(c2.CanonicalAngles(Q, Q, 0.1))


def test_case3_gram_layout(rng):
    for _ in range(20):
        a1, a2, a3 = np.sort(rng.uniform(0.02, Q - 0.02, 3))[::-1]
        e = ef.synthesize(c2.CanonicalAngles(a1, a2, a3))
        g1, g2, g3, g4 = e.meta["g"]
        h1, h2 = g1 + g4 - 1, g2 + g4 - 1
        expected = np.array([[1, g2, g4, h1], [g2, 1, h2, -g3], [g4, h2, 1, g1], [h1, -g3, g1, 1]])
        assert np.allclose(e.gram, expected, atol=1e-10)


def test_conjugate_set_round_trip():
    case1 = ef.make_efmis([ef.ket(x) for x in ef.CASE1_LABELS], c2.build_canonical(c2.CanonicalAngles(Q, 0, 0)),
                          ef.CASE1)
    moved = ef.conjugate_set(case1, c2.cnot_frame(), "pre")
    assert np.allclose(moved.target, c2.cnot(), atol=1e-12)
    assert moved.report.passed
    back = ef.conjugate_set(moved, c2.cnot_frame(), "post")
    assert all(np.allclose(a, b) for a, b in zip(back.states, case1.states))
    with pytest.raises(ValueError):
        ef.conjugate_set(case1, c2.cnot_frame(), "sideways")


def test_gate_errors():
    with pytest.raises(ValueError):
        ef.gate_efmis("CPHASE", 0.0)
    with pytest.raises(ValueError):
        ef.gate_matrix("TOFFOLI")
