import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from q2sat.errors import InvalidInputError, ParseError
from q2sat.instance import (
    alternation_defects, dumps_instance, from_json_dict, gen_chain, gen_dressed_symmetric,
    gen_from_2cnf, gen_loop, gen_quasi_loop, gen_random_mixed, gen_singlet_star, instances_equal,
    normalize, random_2cnf, read_instance, to_json_dict, write_instance,
)
from q2sat.numerics import span_distance
from q2sat.oracle import brute_kernel, count_2cnf

S = 1 / np.sqrt(2)
E = np.eye(4, dtype=complex)  # |00>, |01>, |10>, |11>


def dim(inst):
    return brute_kernel(inst)[0]


@pytest.mark.parametrize("raw, rank", [
    ([((0, 1), E[0]), ((0, 1), E[0])], 1),
    ([((0, 1), E[0]), ((0, 1), S * (E[0] + E[3]))], 2),
])
def test_normalize_ranks(raw, rank):
    inst = normalize(raw, 2)
    assert list(inst.blocks) == [(0, 1)] and inst.rank((0, 1)) == rank


def test_normalize_swaps_reversed_pairs():
    inst = normalize([((1, 0), E[1])], 2)
    assert span_distance(inst.blocks[(0, 1)], [E[2]]) < 1e-12


@pytest.mark.parametrize("raw", [
    [((0, 1), np.zeros(4))],
    [((0, 2), E[0])],
    [((0, 0), E[0])],
    [((0, 1), np.ones(2))],
])
def test_normalize_rejects(raw):
    with pytest.raises(InvalidInputError):
        normalize(raw, 2)


def test_rank_four_block_is_kept():
    inst = normalize([((0, 1), E[i]) for i in range(4)], 2)
    assert inst.rank((0, 1)) == 4


@pytest.mark.parametrize("k, expected", [(2, 3), (3, 4), (5, 6)])
def test_chain_dimension(k, expected):
    inst = gen_chain(k)
    assert len(inst.blocks) == k - 1
    assert dim(inst) == expected


def test_chain_three_classical_solutions():
    _, basis = brute_kernel(gen_chain(3))
    expected = [E8 for E8 in np.eye(8)[[0b000, 0b001, 0b011, 0b111]]]
    assert span_distance(basis, expected) < 1e-9


@pytest.mark.parametrize("k", [3, 4, 6])
def test_loop_dimension_two(k):
    d, basis = brute_kernel(gen_loop(k))
    assert d == 2
    allz = np.zeros(2 ** k); allz[0] = 1
    allo = np.zeros(2 ** k); allo[-1] = 1
    assert span_distance(basis, [allz, allo]) < 1e-9


@pytest.mark.parametrize("k", [3, 4, 5, 6])
def test_quasi_loop_dimension_and_forcing(k):
    d, basis = brute_kernel(gen_quasi_loop(k))
    assert d == k
    # qubit 0 (most significant) is |0> in every ground state
    for v in basis:
        assert np.linalg.norm(v[2 ** (k - 1):]) < 1e-9


def test_quasi_loop_three_solutions():
    _, basis = brute_kernel(gen_quasi_loop(3))
    assert span_distance(basis, list(np.eye(8)[[0b000, 0b001, 0b011]])) < 1e-9


@pytest.mark.parametrize("n, expected", [(2, 3), (3, 4), (5, 6)])
def test_singlet_star_dimension(n, expected):
    assert dim(gen_singlet_star(n)) == expected


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("seed", [0, 1, 7])
def test_dressed_dimension(n, seed):
    inst = gen_dressed_symmetric(n, seed)
    assert dim(inst) == n + 1


def test_dressed_identity_operators_give_singlets():
    inst = gen_dressed_symmetric(3, 0, operators=[np.eye(2)] * 3)
    assert dim(inst) == 4


def test_dressed_is_seeded():
    assert instances_equal(gen_dressed_symmetric(5, 3), gen_dressed_symmetric(5, 3))


@pytest.mark.parametrize("bad", [1, 0])
def test_generator_argument_checks(bad):
    for gen in (gen_chain, gen_singlet_star):
        with pytest.raises(InvalidInputError):
            gen(bad)
    for gen in (gen_loop, gen_quasi_loop):
        with pytest.raises(InvalidInputError):
            gen(bad + 1)


@pytest.mark.parametrize("k", range(3, 9))
def test_alternation_predicates(k):
    assert alternation_defects(gen_chain(k), range(k)) == []
    assert alternation_defects(gen_loop(k), range(k), closed=True) == []
    assert alternation_defects(gen_quasi_loop(k), range(k), closed=True) == [0]


def test_2cnf_single_clause():
    inst = gen_from_2cnf([(1, 2)], 2)
    assert span_distance(inst.blocks[(0, 1)], [E[0]]) < 1e-12
    assert dim(inst) == 3


def test_2cnf_unsat():
    assert dim(gen_from_2cnf([(1, 2), (-1, 2), (1, -2), (-1, -2)], 2)) == 0


@pytest.mark.parametrize("clause", [(1, -1), (1, 1), (1,), (1, 2, 3), (0, 1), (1, 5)])
def test_2cnf_rejects(clause):
    with pytest.raises(InvalidInputError):
        gen_from_2cnf([clause], 3)


@pytest.mark.parametrize("seed", range(5))
def test_2cnf_random_matches_count(seed):
    clauses = random_2cnf(8, 10, seed)
    assert dim(gen_from_2cnf(clauses, 8)) == count_2cnf(clauses, 8)


def test_round_trip(tmp_path):
    path = tmp_path / "c3.json"
    write_instance(gen_chain(3), path)
    assert instances_equal(read_instance(path), gen_chain(3))


def test_units_round_trip():
    inst = normalize([((0, 1), E[1])], 2, [(1, np.array([0.6, 0.8j]))])
    back = from_json_dict(json.loads(dumps_instance(inst)))
    assert instances_equal(inst, back)


def _doc(**over):
    doc = {"n": 2, "constraints": [{"qubits": [0, 1], "vectors": [[[1, 0], [0, 0], [0, 0], [0, 0]]]}]}
    doc.update(over)
    return doc


@pytest.mark.parametrize("doc, where", [
    (_doc(constraints=[{"qubits": [0, 2], "vectors": [[[1, 0]] * 4]}]), "constraints[0].qubits"),
    (_doc(constraints=[{"qubits": [0, 1], "vectors": [[[0, 0]] * 4]}]), "constraints[0].vectors[0]"),
    (_doc(extra=1), "instance"),
    (_doc(constraints=[{"qubits": [0, 1], "vectors": [[[1, 0]] * 3]}]), "constraints[0].vectors[0]"),
    (_doc(units=[{"qubit": 5, "vector": [[1, 0], [0, 0]]}]), "units[0].qubit"),
    (_doc(constraints=[{"qubits": [0, 1], "vectors": [[[1, 0], "x", [0, 0], [0, 0]]]}]), "constraints[0].vectors[0][1]"),
])
def test_parse_errors_carry_context(doc, where):
    with pytest.raises(ParseError) as info:
        from_json_dict(doc)
    assert info.value.context == where


def test_read_rejects_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{\"n\": 2,\n oops}")
    with pytest.raises(ParseError) as info:
        read_instance(path)
    assert "line 2" in str(info.value)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(2, 6), m=st.integers(1, 10))
def test_normalize_idempotent(seed, n, m):
    inst = gen_random_mixed(n, m, seed)
    again = from_json_dict(to_json_dict(inst))
    assert instances_equal(inst, again)
    for block in inst.blocks.values():
        assert np.allclose(block.conj() @ block.T, np.eye(len(block)), atol=1e-12)
