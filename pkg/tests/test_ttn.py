import json

import numpy as np
import pytest

from q2sat.dashedsolver import ProductBasisState
from q2sat.errors import PreconditionError, ResourceLimitError
from q2sat.instance import gen_chain, gen_random_mixed, gen_singlet_star, normalize
from q2sat.numerics import kron_all, span_distance
from q2sat.oracle import brute_kernel
from q2sat.pipeline import BASIS, DECIDE, solve
from q2sat.reduction import SATISFIABLE, FixedFactor, IsometryNode
from q2sat.ttn import (
    GroundSpaceDescription, TTNForest, dumps, forest_stats, from_json_dict, materialize, to_json_dict,
)

K0 = np.array([1, 0], dtype=complex)
K1 = np.array([0, 1], dtype=complex)
GHZ_U = np.array([[1, 0], [0, 0], [0, 0], [0, 1]], dtype=complex)


def desc(n, events, leaves, basis):
    return GroundSpaceDescription(SATISFIABLE, len(basis), TTNForest(n, events, {}, tuple(leaves)),
                                  [ProductBasisState(b) for b in basis])


def test_single_isometry_replay():
    d = desc(2, [IsometryNode(2, (0, 1), GHZ_U)], [2], [{2: K0}, {2: K1}])
    out = materialize(d)
    assert np.allclose(out[0], [1, 0, 0, 0]) and np.allclose(out[1], [0, 0, 0, 1])


def test_empty_forest_is_identity():
    d = desc(2, [], [0, 1], [{0: K0, 1: K1}])
    assert np.allclose(materialize(d)[0], kron_all([K0, K1]))


def test_fixed_factor_tensored_into_place():
    # qubit 1 fixed to |1>, qubits 0 and 2 remain
    d = desc(3, [FixedFactor((1,), K1)], [0, 2], [{0: K0, 2: K1}])
    assert np.allclose(materialize(d)[0], kron_all([K0, K1, K1]))


def test_star_three_spans_symmetric_subspace():
    d = solve(gen_singlet_star(3), BASIS())
    states = materialize(d)
    assert len(states) == 4
    assert span_distance(states, brute_kernel(gen_singlet_star(3))[1]) <= 1e-7


def test_materialize_guards():
    d = desc(20, [], list(range(20)), [{q: K0 for q in range(20)}])
    with pytest.raises(ResourceLimitError):
        materialize(d)
    with pytest.raises(PreconditionError):
        materialize(solve(gen_chain(3), DECIDE))


def test_forest_stats():
    assert forest_stats(desc(3, [], [0, 1, 2], [])) == (0, 0, 3)
    chained = [IsometryNode(3, (0, 1), GHZ_U), IsometryNode(4, (3, 2), GHZ_U)]
    assert forest_stats(desc(3, chained, [4], [])) == (1, 2, 1)
    mixed = [IsometryNode(4, (0, 1), GHZ_U), FixedFactor((2, 3), np.array([0, 1, 0, 0], dtype=complex))]
    assert forest_stats(desc(4, mixed, [4], [])) == (1, 1, 1)


def test_gram_preserved_by_isometries():
    rng = np.random.default_rng(1)
    U = np.linalg.qr(rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2)))[0]
    leaves = [{2: v / np.linalg.norm(v)} for v in rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))]
    d = desc(2, [IsometryNode(2, (0, 1), U)], [2], leaves)
    out = np.array(materialize(d))
    leaf = np.array([l[2] for l in leaves])
    assert np.allclose(out.conj() @ out.T, leaf.conj() @ leaf.T, atol=1e-8)


@pytest.mark.parametrize("seed", range(8))
def test_json_round_trip(seed):
    inst = gen_random_mixed(5, 6, seed, rank_weights=(0.5, 0.4, 0.1))
    d = solve(inst, BASIS())
    data = json.loads(dumps(d))
    assert data["schema"] == "v1" and data["dimension"] == str(d.dimension)
    back = from_json_dict(data)
    assert back.dimension == d.dimension and back.verdict == d.verdict
    if d.dimension:
        assert span_distance(materialize(back), materialize(d)) < 1e-9


def test_decide_dimension_is_null():
    data = to_json_dict(solve(gen_chain(3), DECIDE))
    assert data["dimension"] is None and data["verdict"] == "SATISFIABLE"
    assert from_json_dict(data).dimension is None


def test_frustrated_json():
    inst = normalize([((0, 1), np.eye(4)[i]) for i in range(4)], 2)
    data = to_json_dict(solve(inst, BASIS()))
    assert data["verdict"] == "FRUSTRATED" and data["dimension"] == "0"


def test_unknown_schema_rejected():
    data = to_json_dict(solve(gen_chain(3)))
    data["schema"] = "v0"
    with pytest.raises(PreconditionError):
        from_json_dict(data)
