"""Small dense complex linear algebra.

Matrices and vectors are plain ``numpy`` complex arrays. The eigensolver is a
cyclic complex Jacobi iteration, which is more than fast enough for the
dimensions used here (at most 16, and never beyond 64).
"""
from __future__ import annotations

import math

import numpy as np

from .errors import NoConvergence, NotHermitian, NotUnitary

TAU_HERM = 1e-10
TAU_RECON = 1e-9
TAU_ZERO = 1e-12

MAX_DIM = 64
SWEEP_BUDGET = 100


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_vector(v) -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite entries")
    return a


def normalize(v) -> np.ndarray:
    v = as_vector(v)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def dagger(m) -> np.ndarray:
    return as_matrix(m).conj().T


def kron(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ra, ca = a.shape
    rb, cb = b.shape
    out = a[:, None, :, None] * b[None, :, None, :]
    return out.reshape(ra * rb, ca * cb)


def projector(v) -> np.ndarray:
    v = as_vector(v)
    return np.outer(v, v.conj())


def max_abs(m) -> float:
    return float(np.max(np.abs(m))) if np.size(m) else 0.0


def hermiticity_error(h) -> float:
    h = as_matrix(h)
    return max_abs(h - h.conj().T)


def is_unitary(u, tol: float = TAU_RECON) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return max_abs(u.conj().T @ u - np.eye(u.shape[0])) <= tol


def check_unitary(u, tol: float = TAU_RECON) -> np.ndarray:
    u = as_matrix(u)
    if not is_unitary(u, tol):
        raise NotUnitary(f"matrix of shape {u.shape} is not unitary within {tol:g}")
    return u


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def hermitian_eig(h, tol: float = TAU_HERM) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(w, v)`` with eigenvalues ``w`` sorted descending and the
    matching orthonormal eigenvectors as the columns of ``v``.
    """
    h = as_matrix(h)
    n, m = h.shape
    if n != m:
        raise NotHermitian(f"matrix is not square: {h.shape}")
    if n > MAX_DIM:
        raise ValueError(f"dimension {n} exceeds {MAX_DIM}")
    err = hermiticity_error(h)
    if err > tol:
        raise NotHermitian(f"|h - h^dag|_max = {err:.3g} exceeds {tol:g}")

    a = 0.5 * (h + h.conj().T)
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), 1.0)
    for _ in range(SWEEP_BUDGET):
        if _offdiag_norm(a) <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                mag = abs(b)
                if mag <= 1e-300:
                    continue
                # D = diag(1, e^{-i arg b}) makes the 2x2 block real symmetric
                phase = b / mag
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ rot
    else:
        if _offdiag_norm(a) > 1e-15 * scale:
            raise NoConvergence(f"Jacobi did not converge in {SWEEP_BUDGET} sweeps")

    w = np.real(np.diag(a)).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def complete_basis(cols: np.ndarray, dim: int) -> np.ndarray:
    """Extend orthonormal columns to a full orthonormal basis of C^dim."""
    cols = np.asarray(cols, dtype=complex).reshape(dim, -1)
    basis = [cols[:, k] for k in range(cols.shape[1])]
    for e in np.eye(dim, dtype=complex):
        if len(basis) == dim:
            break
        w = e.copy()
        for _ in range(2):
            for b in basis:
                w = w - b * np.vdot(b, w)
        nw = np.linalg.norm(w)
        if nw > 1e-8:
            basis.append(w / nw)
    return np.column_stack(basis)


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD ``m = u @ diag(s) @ v^dag`` built on :func:`hermitian_eig`.

    Singular values are recovered as ``|m v_i|`` rather than square roots of
    the eigenvalues of ``m^dag m``, which keeps exact zeros near zero.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    _, v = hermitian_eig(m.conj().T @ m, tol=np.inf)
    mv = m @ v
    s = np.linalg.norm(mv, axis=0)
    order = np.argsort(-s, kind="stable")
    s, v, mv = s[order], v[:, order], mv[:, order]
    smax = s[0] if s.size else 0.0
    s = np.where(s < TAU_ZERO * max(smax, TAU_ZERO), 0.0, s)
    k = min(rows, cols)
    ucols = []
    for i in range(k):
        if s[i] > 0:
            ucols.append(mv[:, i] / s[i])
    u = _gram_schmidt(np.column_stack(ucols)) if ucols else np.zeros((rows, 0), dtype=complex)
    return complete_basis(u, rows), s[:k], v


def _gram_schmidt(u: np.ndarray) -> np.ndarray:
    # recovered columns drift from orthogonality when singular values nearly coincide
    out = np.zeros_like(u)
    for j in range(u.shape[1]):
        w = u[:, j].copy()
        for _ in range(2):
            for i in range(j):
                w = w - out[:, i] * np.vdot(out[:, i], w)
        out[:, j] = w / np.linalg.norm(w)
    return out


def numerical_rank(vectors, rel_tol: float = 1e-9) -> int:
    """Rank of the span of the given vectors (rows or a list)."""
    a = np.atleast_2d(np.asarray(vectors, dtype=complex))
    if a.size == 0:
        return 0
    _, s, _ = svd(a)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def expm_hermitian(h, t: float = 1.0) -> np.ndarray:
    """``exp(-i t h)`` for Hermitian ``h``."""
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return z / np.linalg.norm(z)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (z + z.conj().T)


# JSON carriers: {"rows", "cols", "data": [[re, im], ...]} and {"dim", "data"}


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    flat = m.reshape(-1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    if rows <= 0 or cols <= 0 or len(data) != rows * cols:
        raise ValueError("matrix data length does not match rows*cols")
    arr = np.array([complex(re, im) for re, im in data], dtype=complex)
    return as_matrix(arr.reshape(rows, cols))


def vector_to_json(v) -> dict:
    v = as_vector(v)
    return {"dim": int(v.size), "data": [[float(z.real), float(z.imag)] for z in v]}


def vector_from_json(obj: dict) -> np.ndarray:
    try:
        dim, data = int(obj["dim"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed vector object: {exc}") from exc
    if dim <= 0 or len(data) != dim:
        raise ValueError("vector data length does not match dim")
    return as_vector([complex(re, im) for re, im in data])
