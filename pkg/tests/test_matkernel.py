import numpy as np
import pytest
from hypothesis import given, strategies as st

from qvk import matkernel as mk
from qvk.errors import NotHermitian, NotUnitary

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def test_kron_examples():
    assert np.array_equal(mk.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(mk.kron(SX, SX), np.fliplr(np.eye(4)))
    e0, e1 = np.diag([1, 0]), np.diag([0, 1])
    p = mk.kron(e0, e1)
    assert p[1, 1] == 1 and np.sum(np.abs(p)) == 1


@given(st.integers(0, 2**32 - 1))
def test_kron_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
    lhs = mk.kron(a, b) @ mk.kron(c, d)
    assert np.max(np.abs(lhs - mk.kron(a @ c, b @ d))) < 1e-12
    assert np.allclose(mk.kron(a, b), np.kron(a, b), atol=1e-15)
    assert np.allclose(mk.kron(2 * a + c, b), 2 * mk.kron(a, b) + mk.kron(c, b), atol=1e-12)


def test_eig_examples():
    w, _ = mk.hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [3, 2, 1])
    w, v = mk.hermitian_eig(SX)
    assert np.allclose(w, [1, -1])
    plus = np.array([1, 1]) / np.sqrt(2)
    assert abs(abs(np.vdot(v[:, 0], plus)) - 1) < 1e-12


def test_eig_bell_strategy_beta():
    # Omega = (P1 + P2)/2 for the Bell state, built by hand
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    p1 = np.diag([1, 0, 0, 1]).astype(complex)
    u = np.array([1, 1]) / np.sqrt(2)
    v = np.array([1, 1]) / np.sqrt(2)
    pu, pv = np.outer(u, u), np.outer(v, v)
    p2 = np.eye(4) - np.kron(pu, np.eye(2) - pv)
    omega = (p1 + p2) / 2
    w, vecs = mk.hermitian_eig(omega)
    assert abs(w[1] - (1 + np.sqrt(0.5)) / 2) < 1e-12
    assert abs(abs(np.vdot(vecs[:, 0], phi)) - 1) < 1e-10


@pytest.mark.parametrize("dim", [1, 2, 3, 4, 8, 16])
def test_eig_random_against_numpy(dim, rng):
    for _ in range(5):
        h = mk.random_hermitian(dim, rng)
        w, v = mk.hermitian_eig(h)
        assert np.all(np.diff(w) <= 0)
        assert np.max(np.abs(h - (v * w) @ v.conj().T)) < 1e-8
        assert np.max(np.abs(v.conj().T @ v - np.eye(dim))) < 1e-9
        assert np.max(np.abs(h @ v - v * w)) < 1e-9
        assert np.allclose(w, np.sort(np.linalg.eigvalsh(h))[::-1], atol=1e-10)


def test_eig_degenerate_spectrum(rng):
    q = mk.random_unitary(6, rng)
    h = q @ np.diag([2, 2, 2, -1, -1, 0]) @ q.conj().T
    w, v = mk.hermitian_eig(h)
    assert np.allclose(w, [2, 2, 2, 0, -1, -1], atol=1e-12)
    assert np.max(np.abs(h - (v * w) @ v.conj().T)) < 1e-10


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        mk.hermitian_eig(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        mk.hermitian_eig(np.array([[np.nan, 0], [0, 1]]))


def test_svd_examples():
    _, s, _ = mk.svd(np.eye(2))
    assert np.allclose(s, [1, 1])
    _, s, _ = mk.svd(np.eye(2) / np.sqrt(2))
    assert np.allclose(s, [1 / np.sqrt(2)] * 2)


@pytest.mark.parametrize("shape", [(4, 4), (3, 5), (5, 3), (1, 4), (16, 16)])
def test_svd_random(shape, rng):
    m = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    u, s, v = mk.svd(m)
    k = min(shape)
    assert np.all(np.diff(s) <= 0)
    assert np.max(np.abs(m - u[:, :k] @ np.diag(s) @ v[:, :k].conj().T)) < 1e-8
    assert np.max(np.abs(u.conj().T @ u - np.eye(shape[0]))) < 1e-9
    assert np.max(np.abs(v.conj().T @ v - np.eye(shape[1]))) < 1e-9
    assert np.allclose(s, np.linalg.svd(m, compute_uv=False), atol=1e-10)


def test_svd_rank_deficient_clamps_zeros(rng):
    a = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    m = a @ a.conj().T
    _, s, _ = mk.svd(m)
    assert np.all(s[2:] == 0.0)
    assert mk.numerical_rank(m) == 2


def test_unitary_checks(rng):
    u = mk.random_unitary(4, rng)
    assert mk.is_unitary(u)
    assert mk.check_unitary(u) is not None
    with pytest.raises(NotUnitary):
        mk.check_unitary(2 * u)


def test_expm_hermitian_against_scipy(rng):
    from scipy.linalg import expm

    h = mk.random_hermitian(4, rng)
    assert np.allclose(mk.expm_hermitian(h, 0.3), expm(-0.3j * h), atol=1e-12)


def test_json_round_trip(rng):
    m = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    obj = mk.matrix_to_json(m)
    assert obj["rows"] == 2 and obj["cols"] == 3 and len(obj["data"]) == 6
    assert np.array_equal(mk.matrix_from_json(obj), m)
    v = mk.random_state(5, rng)
    assert np.array_equal(mk.vector_from_json(mk.vector_to_json(v)), v)
    with pytest.raises(ValueError):
        mk.matrix_from_json({"rows": 2, "cols": 2, "data": [[1, 0]]})
