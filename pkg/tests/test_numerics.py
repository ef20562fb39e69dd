import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from q2sat.errors import InvalidInputError
from q2sat.numerics import (
    DEFAULT_TOL, SINGLET, Tolerance, canonical_phase, kron_all, nullspace, numeric_rank,
    orthonormalize, parallel, perp, product_gram, span_distance, swap_factors,
)

K0 = np.array([1, 0], dtype=complex)
K1 = np.array([0, 1], dtype=complex)


def basis4(i):
    v = np.zeros(4, dtype=complex)
    v[i] = 1
    return v


def test_tolerance_defaults_and_validation():
    assert (DEFAULT_TOL.eps_rank, DEFAULT_TOL.eps_span, DEFAULT_TOL.eps_residual) == (1e-9, 1e-7, 1e-8)
    for bad in (0.0, -1.0, float("nan"), float("inf")):
        with pytest.raises(InvalidInputError):
            Tolerance(eps_rank=bad)


@pytest.mark.parametrize("m, rank", [
    (np.eye(4), 4),
    (np.zeros((4, 4)), 0),
    (np.array([[1, 0, 0, 0], [1e-15, 0, 0, 0]]), 1),
])
def test_numeric_rank_examples(m, rank):
    assert numeric_rank(m) == rank


def test_numeric_rank_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        numeric_rank([[np.nan, 0], [0, 1]])


def test_nullspace_of_zero_row_is_everything():
    ns = nullspace(np.zeros((1, 4)))
    assert len(ns) == 4
    assert span_distance(ns, list(np.eye(4))) < 1e-12


def test_nullspace_of_single_bra():
    ns = nullspace(basis4(0)[None, :])
    assert len(ns) == 3
    assert span_distance(ns, [basis4(1), basis4(2), basis4(3)]) < 1e-12


def test_nullspace_two_singlet_bras_on_three_qubits():
    Y = SINGLET.reshape(2, 2)
    rows = []
    for k in (K0, K1):
        rows.append(np.einsum("ab,c->abc", Y, k).reshape(8).conj())  # <Y|_12 <k|_3
        rows.append(np.einsum("ac,b->abc", Y, k).reshape(8).conj())  # <Y|_13 <k|_2
    ns = nullspace(np.array(rows))
    assert len(ns) == 4
    for v in ns:
        assert np.linalg.norm(np.array(rows) @ v) <= 1e-8


def test_nullspace_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        nullspace([[np.inf, 0]])


def test_orthonormalize_examples():
    assert len(orthonormalize([basis4(0), basis4(0)])) == 1
    two = orthonormalize([basis4(0), basis4(3)])
    assert len(two) == 2 and abs(np.vdot(two[0], two[1])) < 1e-15
    mixed = orthonormalize([basis4(0), (basis4(0) + basis4(3)) / np.sqrt(2)])
    assert span_distance(mixed, [basis4(0), basis4(3)]) < 1e-12


def test_orthonormalize_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        orthonormalize([K0, basis4(0)])


def test_span_distance_examples():
    assert span_distance([K0], [np.exp(0.7j) * K0]) < 1e-15
    assert span_distance([K0], [K1]) == pytest.approx(np.sqrt(2))
    plus, minus = (K0 + K1) / np.sqrt(2), (K0 - K1) / np.sqrt(2)
    assert span_distance([K0, K1], [plus, minus]) < 1e-12
    with pytest.raises(InvalidInputError):
        span_distance([K0], [basis4(0)])


def test_perp_parallel_swap_phase():
    v = np.array([0.6, 0.8j])
    assert abs(np.vdot(v, perp(v))) < 1e-15
    assert parallel(v, 1j * v) and not parallel(v, perp(v))
    w = kron_all([K0, K1])
    assert np.allclose(swap_factors(w), kron_all([K1, K0]))
    c = canonical_phase(np.array([0, -1j, 1]))
    assert c[1].real > 0 and abs(c[1].imag) < 1e-15


def test_product_gram_matches_dense():
    rng = np.random.default_rng(3)
    states = [[rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(3)] for _ in range(4)]
    dense = np.array([kron_all(s) for s in states])
    assert np.allclose(product_gram(states), dense.conj() @ dense.T)


def _cplx(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), rows=st.integers(1, 6), cols=st.integers(1, 6), r=st.integers(0, 6))
def test_rank_nullity_for_constructed_rank(seed, rows, cols, r):
    rng = np.random.default_rng(seed)
    r = min(r, rows, cols)
    m = _cplx(rng, (rows, r)) @ _cplx(rng, (r, cols)) if r else np.zeros((rows, cols))
    assert numeric_rank(m) == r
    ns = nullspace(m)
    assert len(ns) + r == cols
    for v in ns:
        assert np.linalg.norm(m @ v) <= 1e-8 * max(1.0, np.linalg.norm(m))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), k=st.integers(1, 4), j=st.integers(1, 4))
def test_span_distance_symmetric_and_reflexive(seed, k, j):
    rng = np.random.default_rng(seed)
    a = list(_cplx(rng, (k, 5)))
    b = list(_cplx(rng, (j, 5)))
    assert span_distance(a, a) <= 1e-12
    assert span_distance(a, b) == pytest.approx(span_distance(b, a), abs=1e-12)
    # invariant under change of basis inside the span
    mix = _cplx(rng, (k, k)) @ np.array(a)
    assert span_distance(a, list(mix)) <= 1e-9
