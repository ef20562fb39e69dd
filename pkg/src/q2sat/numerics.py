"""Small dense complex linear algebra with a single tolerance policy.

Vectors are 1-D complex numpy arrays and matrices 2-D complex arrays. All
rank decisions are relative to the largest singular value, so the overall
scale of a constraint never matters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class Tolerance:
    eps_rank: float = 1e-9
    eps_span: float = 1e-7
    eps_residual: float = 1e-8

    def __post_init__(self):
        for name in ("eps_rank", "eps_span", "eps_residual"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be strictly positive, got {value!r}")


DEFAULT_TOL = Tolerance()

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
SINGLET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


def as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        m = m[None, :]
    if m.ndim != 2:
        raise InvalidInputError(f"expected a matrix, got array of shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix has non-finite entries")
    return m


def as_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("vector has non-finite entries")
    return v


def _singular_values(m: np.ndarray) -> np.ndarray:
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def numeric_rank(m, tol: Tolerance = DEFAULT_TOL) -> int:
    m = as_matrix(m)
    s = _singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.eps_rank * s[0]))


def nullspace(m, tol: Tolerance = DEFAULT_TOL, hermitian: bool = False) -> list[np.ndarray]:
    """Orthonormal basis of the right nullspace of ``m``.

    With ``hermitian=True`` the matrix is taken to be Hermitian positive
    semidefinite and an eigendecomposition replaces the SVD.
    """
    m = as_matrix(m)
    cols = m.shape[1]
    if cols == 0:
        raise InvalidInputError("nullspace needs at least one column")
    if hermitian:
        w, v = np.linalg.eigh(m)
        top = max(abs(w[0]), abs(w[-1])) if w.size else 0.0
        if top == 0.0:
            return [v[:, i].copy() for i in range(cols)]
        keep = np.abs(w) <= tol.eps_rank * top
        return [v[:, i].copy() for i in np.flatnonzero(keep)]
    if m.shape[0] == 0 or not np.any(m):
        return [row.copy() for row in np.eye(cols, dtype=complex)]
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    rank = int(np.count_nonzero(s > tol.eps_rank * s[0]))
    return [vh[i].conj().copy() for i in range(rank, cols)]


def orthonormalize(vs: Sequence, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """Gram-Schmidt (two passes) over ``vs``, dropping dependent vectors."""
    vs = [as_vector(v) for v in vs]
    if not vs:
        return []
    dim = vs[0].shape[0]
    if any(v.shape[0] != dim for v in vs):
        raise InvalidInputError("orthonormalize: vectors differ in dimension")
    basis: list[np.ndarray] = []
    for v in vs:
        norm_in = np.linalg.norm(v)
        if norm_in == 0.0:
            continue
        r = v.copy()
        for _ in range(2):
            for q in basis:
                r = r - np.vdot(q, r) * q
        norm_out = np.linalg.norm(r)
        if norm_out > tol.eps_rank * norm_in:
            basis.append(r / norm_out)
    return basis


def _orthonormal_columns(vs) -> np.ndarray:
    if len(vs) == 0:
        return np.zeros((0, 0), dtype=complex)
    return np.column_stack(orthonormalize(vs))


def span_distance(a: Sequence, b: Sequence, tol: Tolerance = DEFAULT_TOL) -> float:
    """Frobenius distance between the orthogonal projectors onto span(a), span(b)."""
    a = [as_vector(v) for v in a]
    b = [as_vector(v) for v in b]
    dims = {v.shape[0] for v in a} | {v.shape[0] for v in b}
    if len(dims) > 1:
        raise InvalidInputError(f"span_distance: mixed ambient dimensions {sorted(dims)}")
    qa = orthonormalize(a, tol)
    qb = orthonormalize(b, tol)
    if not qa or not qb:
        return float(np.sqrt(len(qa) + len(qb)))
    A = np.column_stack(qa)
    B = np.column_stack(qb)
    # ||P_a - P_b||^2 = ||(I - P_b) A||^2 + ||(I - P_a) B||^2, free of cancellation
    ra = A - B @ (B.conj().T @ A)
    rb = B - A @ (A.conj().T @ B)
    return float(np.sqrt(np.linalg.norm(ra) ** 2 + np.linalg.norm(rb) ** 2))


def kron_all(vs: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in vs:
        out = np.kron(out, v)
    return out


def normalize(v) -> np.ndarray:
    v = as_vector(v)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise InvalidInputError("cannot normalize the zero vector")
    return v / norm


def canonical_phase(v, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Rotate the global phase so the first significant entry is real positive."""
    v = as_vector(v)
    mags = np.abs(v)
    top = mags.max() if v.size else 0.0
    if top == 0.0:
        return v.copy()
    idx = int(np.flatnonzero(mags > tol.eps_rank * top)[0])
    return v * (abs(v[idx]) / v[idx])


def perp(v) -> np.ndarray:
    """The single-qubit state orthogonal to ``v`` (unit norm)."""
    v = normalize(v)
    return np.array([-np.conj(v[1]), np.conj(v[0])], dtype=complex)


def parallel(u, v, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Projective equality of two unit vectors."""
    return abs(np.vdot(u, v)) >= 1.0 - tol.eps_rank


def swap_factors(v) -> np.ndarray:
    """Exchange the tensor factors of a two-qubit vector."""
    return as_vector(v).reshape(2, 2).T.reshape(4).copy()


def condition_number(m) -> float:
    s = _singular_values(as_matrix(m))
    if s.size == 0 or s[-1] == 0.0:
        return float("inf")
    return float(s[0] / s[-1])


def product_gram(states_a: Sequence[Sequence[np.ndarray]], states_b=None) -> np.ndarray:
    """Gram matrix of product states given as equal-length factor lists."""
    if states_b is None:
        states_b = states_a
    G = np.ones((len(states_a), len(states_b)), dtype=complex)
    if not states_a or not states_b:
        return G
    k = len(states_a[0])
    for site in range(k):
        A = np.array([s[site] for s in states_a])
        B = np.array([s[site] for s in states_b])
        G *= A.conj() @ B.T
    return G
