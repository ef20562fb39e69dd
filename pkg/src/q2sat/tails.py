"""Solid tails of a simplified graph.

In its singlet frame a tail on qubits K allows exactly the symmetric subspace
of K. Attached to the backbone at qubit a, the combined ground space is

    (S0 (x) Sym_K)  +  sum_j  S_j (x) |alpha_j^perp>^{(x)|K|}

where S0 holds backbone states that leave a free and S_j those that pin a to
|alpha_j^perp>. The symmetric subspace of k qubits is spanned by k + 1 tensor
powers of pairwise non-parallel single-qubit states, so the result is again a
product span.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dashedsolver import DashedGraph, ProductBasisState, solve_dashed, DEFAULT_BASIS_CAP
from .errors import PreconditionError, ResourceLimitError
from .graphsimplify import SimplifiedGraph, Tail
from .numerics import DEFAULT_TOL, KET0, KET1, Tolerance, normalize, parallel, perp, product_gram

INDEPENDENCE_TOL = 1e-6


def symmetric_spanning_states(k: int) -> list[np.ndarray]:
    """k + 1 single-qubit states whose k-fold tensor powers span Sym_k.

    Relative phases are the (k+1)-th roots of unity, so the powers expand in
    the Dicke basis through a Fourier matrix. Real angles would give a
    Vandermonde system whose conditioning decays exponentially in k.
    """
    phases = np.exp(2j * np.pi * np.arange(k + 1) / (k + 1))
    return [np.array([1.0, w], dtype=complex) / np.sqrt(2) for w in phases]


def bloch_pool(size: int) -> list[np.ndarray]:
    """Deterministic, roughly uniform single-qubit states (Fibonacci sphere)."""
    i = np.arange(size) + 0.5
    theta = np.arccos(1.0 - 2.0 * i / size)
    phi = np.pi * (1.0 + np.sqrt(5.0)) * i
    return [np.array([np.cos(t / 2), np.exp(1j * f) * np.sin(t / 2)]) for t, f in zip(theta, phi)]


TAIL_POOL_SIZE = 512


def _balancing_map(maps: list[np.ndarray]) -> np.ndarray:
    """U with sum_v (N_v U)^dag (N_v U) / |N_v|^2 proportional to I."""
    A = sum(N.conj().T @ N / np.linalg.norm(N) ** 2 for N in maps) / len(maps)
    w, V = np.linalg.eigh(A)
    return V @ np.diag(1.0 / np.sqrt(w)) @ V.conj().T


def tail_spanning_states(k: int, maps: list[np.ndarray]) -> list[np.ndarray]:
    """k + 1 frame states whose mapped tensor powers stay well conditioned.

    Sym_k is invariant under U^{(x)k}, so candidates are first pushed through a
    map that balances the tail frames. Pivoted Cholesky on the Gram matrix of
    the normalized physical images then picks them greedily by largest
    residual.
    """
    U = _balancing_map(maps)
    pool = [normalize(U @ c) for c in symmetric_spanning_states(k) + bloch_pool(TAIL_POOL_SIZE)]
    images = [[normalize(m @ c) for m in maps] for c in pool]
    G = product_gram(images)
    residual = np.real(np.diag(G)).copy()
    L = np.zeros((len(pool), k + 1), dtype=complex)
    chosen = []
    for j in range(k + 1):
        p = int(np.argmax(residual))
        if residual[p] <= 0.0:
            raise AssertionError("symmetric spanning set degenerated")
        chosen.append(p)
        col = (G[:, p] - L[:, :j] @ L[p, :j].conj()) / np.sqrt(residual[p])
        L[:, j] = col
        residual -= np.abs(col) ** 2
        residual[chosen] = 0.0
    return [pool[p] for p in chosen]


def tail_factor_maps(tail: Tail) -> dict:
    """Per tail qubit, the map from singlet-frame states to physical states."""
    return {v: np.linalg.inv(M).conj().T for v, M in tail.frames.items()}


@dataclass
class SpanDecomposition:
    vertex: int
    free: list  # ProductBasisState over the remaining qubits (a stripped)
    pinned: list = field(default_factory=list)  # [(alpha_j, [ProductBasisState, ...])]

    @property
    def dimension(self) -> int:
        """Dimension of the decomposed space S (a included)."""
        return 2 * len(self.free) + sum(len(s) for _, s in self.pinned)


def _directions_at(g: DashedGraph, a: int, tol: Tolerance) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for d in [d for _, d, _ in g.incident(a)] + list(g.units.get(a, [])):
        if not any(parallel(d, e, tol) for e in out):
            out.append(d)
    return out


class _IndependentSet:
    """Greedy linearly independent subset of product states via an incremental
    Cholesky factor of their Gram matrix."""

    def __init__(self, order):
        self.order = list(order)
        self.states: list[list[np.ndarray]] = []
        self.L = np.zeros((0, 0), dtype=complex)

    def _overlaps(self, s: list[np.ndarray]) -> np.ndarray:
        g = np.ones(len(self.states), dtype=complex)
        for site in range(len(self.order)):
            if not self.states:
                break
            A = np.array([t[site] for t in self.states])
            g *= A.conj() @ s[site]
        return g

    def add(self, state: ProductBasisState) -> bool:
        s = [normalize(v) for v in state.ordered(self.order)]
        g = self._overlaps(s)
        if len(g):
            y = np.linalg.solve(self.L, g) if self.L.size else g
            res2 = 1.0 - float(np.vdot(y, y).real)
        else:
            y, res2 = g, 1.0
        if res2 <= INDEPENDENCE_TOL ** 2:
            return False
        k = len(self.states)
        L = np.zeros((k + 1, k + 1), dtype=complex)
        L[:k, :k] = self.L
        L[k, :k] = y.conj()
        L[k, k] = np.sqrt(res2)
        self.L = L
        self.states.append(s)
        return True


def decompose_at_vertex(g: DashedGraph, a: int, rest_tails=(), tol: Tolerance = DEFAULT_TOL,
                        cap: int = DEFAULT_BASIS_CAP) -> SpanDecomposition:
    """Split the ground space of ``g`` (plus ``rest_tails``) by the state of qubit ``a``.

    The free part solves the graph without ``a`` with every neighbor forced
    orthogonal to its edge's other direction; each pinned class ``alpha_j``
    solves it with only the edges non-parallel to ``alpha_j`` enforced, keeping
    just the states independent of everything already collected.
    """
    if a not in g.vertices:
        raise PreconditionError(f"qubit {a} is not in the backbone")
    inc = g.incident(a)
    units_a = list(g.units.get(a, []))

    def reduced(skip_parallel_to=None):
        h = g.copy()
        h.units.pop(a, None)
        for w, da, dw in inc:
            if skip_parallel_to is not None and parallel(da, skip_parallel_to, tol):
                continue
            h.add_unit(w, dw)
        h.remove_vertices([a])
        return h

    free: list = []
    if not units_a:
        free = solve_with_tails(reduced(), rest_tails, tol, cap)
    if free:
        order = sorted(free[0].factors)
    else:
        order = None
    chosen = None
    pinned = []
    for alpha in _directions_at(g, a, tol):
        if any(not parallel(u, alpha, tol) for u in units_a):
            continue
        full = solve_with_tails(reduced(alpha), rest_tails, tol, cap)
        if not full:
            pinned.append((alpha, []))
            continue
        if chosen is None:
            order = order or sorted(full[0].factors)
            chosen = _IndependentSet(order)
            for s in free:
                assert chosen.add(s), "free-part basis is not independent"
        picked = [s for s in full if chosen.add(s)]
        pinned.append((alpha, picked))
    return SpanDecomposition(a, free, pinned)


def extend_with_tail(dec: SpanDecomposition, tail: Tail, want_basis: bool = True):
    """Combine a decomposition at the tail's root with the tail itself.

    Returns ``(dimension, basis or None)``.
    """
    if tail.root != dec.vertex:
        raise PreconditionError("tail is not attached at the decomposed vertex")
    k = len(tail.path)
    dimension = len(dec.free) * (k + 1) + sum(len(s) for _, s in dec.pinned)
    if not want_basis:
        return dimension, None
    maps = tail_factor_maps(tail)
    basis = []
    sym = tail_spanning_states(k, [maps[v] for v in tail.path])
    for s in dec.free:
        for theta in sym:
            f = dict(s.factors)
            for v in tail.path:
                f[v] = normalize(maps[v] @ theta)
            basis.append(ProductBasisState(f))
    for alpha, states in dec.pinned:
        c = perp(alpha)
        for s in states:
            f = dict(s.factors)
            for v in tail.path:
                f[v] = normalize(maps[v] @ c)
            basis.append(ProductBasisState(f))
    assert len(basis) == dimension
    return dimension, basis


def solve_with_tails(g: DashedGraph, tails, tol: Tolerance = DEFAULT_TOL,
                     cap: int = DEFAULT_BASIS_CAP) -> list:
    """Product basis of a dashed backbone with tails, one tail at a time."""
    tails = list(tails)
    roots = [t.root for t in tails]
    if len(set(roots)) != len(roots):
        raise PreconditionError("tails must attach at distinct vertices")
    if not tails:
        return solve_dashed(g, want_basis=True, tol=tol, cap=cap).basis
    tails.sort(key=lambda t: t.root)
    first, rest = tails[0], tails[1:]
    dec = decompose_at_vertex(g, first.root, rest, tol, cap)
    dim, basis = extend_with_tail(dec, first)
    if dim > cap:
        raise ResourceLimitError(f"ground-space dimension {dim} exceeds basis cap {cap}", dimension=dim)
    return basis


def _chain_direction(existing: list[np.ndarray], tol: Tolerance) -> np.ndarray:
    candidates = [KET0, KET1, normalize([1, 1])]
    k = 2
    while True:
        for c in candidates:
            if all(abs(np.vdot(c, e)) <= 1.0 - tol.eps_rank for e in existing):
                return c
        candidates = [normalize([1, k])]
        k += 1


def tail_to_chain(sg: SimplifiedGraph, tol: Tolerance = DEFAULT_TOL) -> DashedGraph:
    """Replace every solid tail by an alternating dashed chain of the same length.

    The chain's direction at the root differs from every dashed direction
    already present there, which keeps the ground-space dimension unchanged.
    """
    g = DashedGraph(set(sg.backbone_vertices))
    for (a, b), (alpha, beta) in sorted(sg.dashed.items()):
        g.add_edge(a, b, alpha, beta)
    for tail in sorted(sg.tails, key=lambda t: t.root):
        path = tail.path
        root = path[0]
        omega = _chain_direction([d for _, d, _ in g.incident(root)], tol)
        g.add_edge(root, path[1], omega, KET0) if root < path[1] else g.add_edge(path[1], root, KET0, omega)
        for x, y in zip(path[1:], path[2:]):
            if x < y:
                g.add_edge(x, y, KET1, KET0)
            else:
                g.add_edge(y, x, KET0, KET1)
    return g


def backbone_graph(sg: SimplifiedGraph) -> DashedGraph:
    g = DashedGraph(set(sg.backbone_vertices))
    for (a, b), (alpha, beta) in sorted(sg.dashed.items()):
        g.add_edge(a, b, alpha, beta)
    return g
