import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from q2sat.errors import PreconditionError
from q2sat.graphsimplify import (
    Collision, EdgeKind, InteractionGraph, SimplifiedGraph, classify_edge, extract_local_frame,
    simplify, slide_type1, slide_type2,
)
from q2sat.instance import (
    gen_chain, gen_dressed_symmetric, gen_random_entangled, gen_random_mixed, gen_singlet_star,
    normalize,
)
from q2sat.numerics import SINGLET, parallel, span_distance
from q2sat.oracle import graph_kernel_distance
from q2sat.reduction import FRUSTRATED, reduce_to_homogeneous

K0 = np.array([1, 0], dtype=complex)
K1 = np.array([0, 1], dtype=complex)
BELL = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def graph(raw, n):
    return InteractionGraph.from_instance(normalize(raw, n))


@pytest.mark.parametrize("v, kind", [(SINGLET, EdgeKind.SOLID), (BELL, EdgeKind.SOLID),
                                     (np.kron(K0, K0), EdgeKind.DASHED)])
def test_classify_examples(v, kind):
    got, factors = classify_edge(v)
    assert got is kind
    if kind is EdgeKind.DASHED:
        assert parallel(factors[0], K0) and parallel(factors[1], K0)


def test_classify_dashed_factors_reconstruct():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = rng.normal(size=2) + 1j * rng.normal(size=2)
        b = rng.normal(size=2) + 1j * rng.normal(size=2)
        v = np.kron(a, b) / np.linalg.norm(np.kron(a, b))
        kind, (alpha, beta) = classify_edge(v)
        assert kind is EdgeKind.DASHED
        assert span_distance([v], [np.kron(alpha, beta)]) < 1e-9


def test_determinant_agrees_with_singular_values():
    rng = np.random.default_rng(42)
    disagreements = 0
    for i in range(10_000):
        a, b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        noise = rng.normal(size=4) + 1j * rng.normal(size=4)
        v = np.kron(a, b) + 10.0 ** rng.uniform(-14, 0) * noise
        v /= np.linalg.norm(v)
        s = np.linalg.svd(v.reshape(2, 2), compute_uv=False)
        schmidt2 = s[0] * s[1] > 1e-9
        if abs(s[0] * s[1] - 1e-9) < 1e-12:
            continue  # on the cutoff itself either answer is fine
        disagreements += (classify_edge(v)[0] is EdgeKind.SOLID) != schmidt2
    assert disagreements == 0


@pytest.mark.parametrize("phi, L", [(SINGLET, np.eye(2)), (BELL, np.array([[0, 1], [-1, 0]]))])
def test_extract_local_frame_examples(phi, L):
    assert np.allclose(extract_local_frame(phi), L)


def test_extract_local_frame_rejects_product():
    with pytest.raises(PreconditionError):
        extract_local_frame(np.kron(K0, K0))


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 10**7))
def test_extract_local_frame_residual(seed):
    rng = np.random.default_rng(seed)
    phi = rng.normal(size=4) + 1j * rng.normal(size=4)
    phi /= np.linalg.norm(phi)
    if abs(phi[0] * phi[3] - phi[1] * phi[2]) < 1e-6:
        return
    L = extract_local_frame(phi)
    assert np.linalg.norm(np.kron(np.eye(2), L) @ SINGLET - phi) <= 1e-10


def test_type1_singlets():
    g = graph([((1, 2), SINGLET), ((1, 3), SINGLET)], 4)
    h = slide_type1(g, 1, 2, 3)
    assert set(h.edges) == {(1, 2), (2, 3)}
    assert span_distance(h.edges[(2, 3)], [SINGLET]) < 1e-12
    assert graph_kernel_distance(g, h, 4) <= 1e-7


def test_type1_bell():
    g = graph([((1, 2), SINGLET), ((1, 3), BELL)], 4)
    h = slide_type1(g, 1, 2, 3)
    assert span_distance(h.edges[(2, 3)], [BELL]) < 1e-12
    assert graph_kernel_distance(g, h, 4) <= 1e-7


def test_type1_triangle_duplicate_collapses():
    g = graph([((0, 1), SINGLET), ((0, 2), SINGLET), ((1, 2), SINGLET)], 3)
    h = slide_type1(g, 0, 1, 2)
    assert len(h.edges[(1, 2)]) == 2
    inst = h.to_instance(3)
    assert inst.rank((1, 2)) == 1
    assert graph_kernel_distance(g, h, 3) <= 1e-7


def test_type2_across_singlet_keeps_direction():
    alpha = np.array([0.6, 0.8j])
    g = graph([((0, 1), SINGLET), ((1, 2), np.kron(alpha, K0))], 3)
    h = slide_type2(g, 0, 1, 2)
    kind, (a, b) = classify_edge(h.vec(0, 2))
    assert kind is EdgeKind.DASHED and parallel(a, alpha) and parallel(b, K0)


def test_type2_across_bell_flips():
    g = graph([((1, 2), BELL), ((2, 3), np.kron(K0, K0))], 4)
    h = slide_type2(g, 1, 2, 3)
    _, (a, b) = classify_edge(h.vec(1, 3))
    assert parallel(a, K1) and parallel(b, K0)
    assert graph_kernel_distance(g, h, 4) <= 1e-7


def test_type2_rejects_r_equal_p():
    g = graph([((0, 1), SINGLET), ((1, 2), np.kron(K0, K0))], 3)
    with pytest.raises(PreconditionError):
        slide_type2(g, 0, 1, 0)
    with pytest.raises(PreconditionError):
        slide_type2(g, 1, 2, 0)  # (1,2) is not solid


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_random_slides_preserve_kernel(seed):
    rng = np.random.default_rng(seed)
    phi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    prod = np.kron(rng.normal(size=2) + 1j * rng.normal(size=2), rng.normal(size=2) + 1j * rng.normal(size=2))
    g1 = graph([((0, 1), phi), ((0, 2), psi)], 3)
    assert graph_kernel_distance(g1, slide_type1(g1, 0, 1, 2), 3) <= 1e-7
    g2 = graph([((0, 1), phi), ((1, 2), prod)], 3)
    assert graph_kernel_distance(g2, slide_type2(g2, 0, 1, 2), 3) <= 1e-7


def test_simplify_star_is_one_tail():
    sg = simplify(InteractionGraph.from_instance(gen_singlet_star(4)))
    assert isinstance(sg, SimplifiedGraph)
    assert len(sg.tails) == 1 and sorted(sg.tails[0].path) == [0, 1, 2, 3]
    assert sg.dashed == {}


def test_simplify_chain_is_backbone():
    sg = simplify(InteractionGraph.from_instance(gen_chain(5)))
    assert sg.tails == [] and set(sg.dashed) == {(i, i + 1) for i in range(4)}


def test_simplify_collision_then_merge():
    alpha = np.array([0.6, 0.8])
    raw = [((1, 2), SINGLET), ((2, 3), np.kron(K0, K1)), ((1, 3), np.kron(K1, K1))]
    inst = normalize(raw, 4)
    res = simplify(InteractionGraph.from_instance(inst))
    assert isinstance(res, Collision)
    assert res.graph.to_instance(4).rank(res.pairs[0]) == 2
    assert graph_kernel_distance(InteractionGraph.from_instance(inst), res.graph, 4) <= 1e-7
    del alpha


def test_tail_frames_make_singlets():
    inst = gen_dressed_symmetric(6, 3)
    sg = simplify(InteractionGraph.from_instance(inst))
    (tail,) = sg.tails
    for x, y in zip(tail.path, tail.path[1:]):
        Mx, My = tail.frames[x], tail.frames[y]
        back = np.kron(np.linalg.inv(Mx), np.linalg.inv(My)) @ sg.graph.vec(x, y)
        assert span_distance([back], [SINGLET]) < 1e-9


def test_simplify_requires_single_edges():
    g = graph([((0, 1), SINGLET)], 2)
    g.edges[(0, 1)].append(BELL)
    with pytest.raises(PreconditionError):
        simplify(g)


def test_dot_dump():
    dot = graph([((0, 1), SINGLET), ((1, 2), np.kron(K0, K0))], 3).to_dot()
    assert "0 -- 1 [style=solid]" in dot and "1 -- 2 [style=dashed]" in dot


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(3, 7), m=st.integers(2, 12),
       p=st.sampled_from([0.0, 0.3, 0.7]))
def test_every_simplify_step_preserves_kernel(seed, n, m, p):
    inst = gen_random_mixed(n, m, seed, p_product=p, rank_weights=(1, 0, 0))
    post, _ = reduce_to_homogeneous(inst)
    if post is FRUSTRATED:
        return
    trace = []
    g = InteractionGraph.from_instance(post)
    res = simplify(g, trace=trace)
    for step in trace:
        assert graph_kernel_distance(step.before, step.after, n) <= 1e-7, step.label
    assert graph_kernel_distance(g, res.graph, n) <= 1e-7
    if isinstance(res, SimplifiedGraph):
        interior = {v for t in res.tails for v in t.path[1:]}
        for pair in res.dashed:
            assert not set(pair) & interior


def test_simplify_is_deterministic():
    g = InteractionGraph.from_instance(gen_random_entangled(7, 6, 5))
    a, b = simplify(g), simplify(g)
    assert [t.path for t in a.tails] == [t.path for t in b.tails]
    assert graph_kernel_distance(a.graph, b.graph, 7) < 1e-12
