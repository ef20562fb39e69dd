"""Ground spaces of product-constraint (dashed) graphs.

The recursion follows the inductive structure of the product case:

* unit constraints are propagated first (a unit |g> on q pins q to |g^perp>);
* disconnected pieces are solved separately and combined multiplicatively;
* a vertex whose incident directions are all parallel to |g> splits the
  space into ``|g>_a (x) K_A  +  |g^perp>_a (x) K_B``;
* otherwise an alternating walk finds either a quasi-alternating loop, whose
  special vertex is forced, or an alternating loop, which splits into the two
  product states ``|0...0>`` and ``|1...1>`` in the loop's local frame.

The recursion tree (``BranchNode``) doubles as a counting certificate: its
leaves and branch labels are the 0/1 choices, and summing leaf contributions
reproduces the dimension.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceLimitError
from .numerics import DEFAULT_TOL, KET0, KET1, Tolerance, normalize, parallel, perp

UNIFORM_VERTEX = "UNIFORM_VERTEX"
ALT_LOOP = "ALT_LOOP"
QUASI_FORCE = "QUASI_FORCE"
FREE_QUBITS = "FREE_QUBITS"
COMPONENTS = "COMPONENTS"
EMPTY_LEAF = "EMPTY_LEAF"
DEAD_LEAF = "DEAD_LEAF"

DEFAULT_BASIS_CAP = 4096
FRAME_ORTH_TOL = 1e-8


@dataclass
class DashedGraph:
    """Product constraints ``alpha_a (x) beta_b`` keyed by ``(a, b)``, ``a < b``."""

    vertices: set
    edges: dict = field(default_factory=dict)
    units: dict = field(default_factory=dict)

    def copy(self) -> "DashedGraph":
        return DashedGraph(set(self.vertices), dict(self.edges),
                           {q: list(us) for q, us in self.units.items()})

    def add_edge(self, a: int, b: int, alpha, beta) -> None:
        alpha, beta = normalize(alpha), normalize(beta)
        if a > b:
            a, b, alpha, beta = b, a, beta, alpha
        if (a, b) in self.edges:
            raise ValueError(f"pair ({a}, {b}) already has a constraint")
        self.vertices.update((a, b))
        self.edges[(a, b)] = (alpha, beta)

    def add_unit(self, q: int, u) -> None:
        self.units.setdefault(q, []).append(normalize(u))

    def incident(self, v: int) -> list[tuple[int, np.ndarray, np.ndarray]]:
        """``(neighbor, direction at v, direction at neighbor)`` sorted by neighbor."""
        out = []
        for (a, b), (alpha, beta) in self.edges.items():
            if a == v:
                out.append((b, alpha, beta))
            elif b == v:
                out.append((a, beta, alpha))
        out.sort(key=lambda t: t[0])
        return out

    def remove_vertices(self, vs) -> None:
        vs = set(vs)
        self.vertices -= vs
        self.edges = {p: d for p, d in self.edges.items() if not (set(p) & vs)}
        for v in vs:
            self.units.pop(v, None)

    def components(self) -> tuple[list[int], list[list[int]]]:
        """(isolated vertices, connected vertex sets with at least one edge)."""
        adj = {v: [] for v in self.vertices}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        seen, isolated, comps = set(), [], []
        for v in sorted(self.vertices):
            if v in seen:
                continue
            seen.add(v)
            if not adj[v]:
                isolated.append(v)
                continue
            comp, stack = [], [v]
            while stack:
                x = stack.pop()
                comp.append(x)
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            comps.append(sorted(comp))
        return isolated, comps

    def subgraph(self, vs) -> "DashedGraph":
        vs = set(vs)
        return DashedGraph(vs, {p: d for p, d in self.edges.items() if set(p) <= vs},
                           {q: list(u) for q, u in self.units.items() if q in vs})


@dataclass
class BranchNode:
    kind: str
    vertices: tuple = ()
    label: str | None = None
    assigned: dict = field(default_factory=dict)
    children: list = field(default_factory=list)
    dimension: int = 0

    def to_json(self) -> dict:
        out = {"kind": self.kind, "vertices": list(self.vertices),
               "dimension": str(self.dimension)}
        if self.label is not None:
            out["label"] = self.label
        if self.children:
            out["children"] = [c.to_json() for c in self.children]
        return out


def certificate_dimension(node: BranchNode) -> int:
    """Recompute a node's dimension from its leaves, ignoring stored values."""
    if node.kind == EMPTY_LEAF:
        return 1
    if node.kind == DEAD_LEAF:
        return 0
    if node.kind == FREE_QUBITS:
        return 2 ** len(node.vertices)
    vals = [certificate_dimension(c) for c in node.children]
    if node.kind == COMPONENTS:
        out = 1
        for v in vals:
            out *= v
        return out
    return sum(vals)


def validate_certificate(node: BranchNode) -> bool:
    """True iff every node's stored dimension matches its recomputed value."""
    ok = node.dimension == certificate_dimension(node)
    return ok and all(validate_certificate(c) for c in node.children)


@dataclass
class ProductBasisState:
    factors: dict  # qubit -> C^2 unit vector

    def ordered(self, order) -> list[np.ndarray]:
        return [self.factors[q] for q in order]

    def dense(self, order) -> np.ndarray:
        out = np.ones(1, dtype=complex)
        for q in order:
            out = np.kron(out, self.factors[q])
        return out

    def in_frame(self, frames: dict) -> "ProductBasisState":
        out = {}
        for q, v in self.factors.items():
            L = frames.get(q)
            out[q] = normalize(np.linalg.solve(L, v)) if L is not None else v
        return ProductBasisState(out)


def find_uniform_vertex(g: DashedGraph, tol: Tolerance = DEFAULT_TOL):
    """Lowest vertex whose incident directions are pairwise parallel, or None."""
    for v in sorted(g.vertices):
        inc = g.incident(v)
        if not inc:
            continue
        first = inc[0][1]
        if all(parallel(first, d, tol) for _, d, _ in inc[1:]):
            return v, first
    return None


@dataclass
class LoopStructure:
    kind: str  # "ALT_LOOP" or "QUASI_LOOP"
    loop: list
    out_dirs: list  # direction at loop[i] of edge (loop[i], loop[i+1])
    in_dirs: list  # direction at loop[i] of edge (loop[i-1], loop[i])

    @property
    def special(self) -> int | None:
        return self.loop[0] if self.kind == "QUASI_LOOP" else None


def find_alternating_structure(g: DashedGraph, tol: Tolerance = DEFAULT_TOL) -> LoopStructure:
    """Alternating walk from the lowest non-isolated vertex until a revisit."""
    start = min(v for v in g.vertices if g.incident(v))
    path = [start]
    pos = {start: 0}
    outs: list[np.ndarray] = []
    ins: list[np.ndarray | None] = [None]
    v, arrival = start, None
    for _ in range(len(g.vertices) + 1):
        step = None
        for w, dv, dw in g.incident(v):
            if arrival is None or not parallel(dv, arrival, tol):
                step = (w, dv, dw)
                break
        assert step is not None, f"vertex {v} is uniform; walk precondition violated"
        w, dv, dw = step
        outs.append(dv)
        if w in pos:
            i = pos[w]
            loop = path[i:]
            out_dirs = outs[i:]
            in_dirs = [dw] + ins[i + 1:]
            kind = "QUASI_LOOP" if parallel(out_dirs[0], dw, tol) else "ALT_LOOP"
            return LoopStructure(kind, loop, out_dirs, in_dirs)
        pos[w] = len(path)
        path.append(w)
        ins.append(dw)
        v, arrival = w, dw
    raise AssertionError("alternating walk did not close")


@dataclass
class DashedSolution:
    dimension: int
    tree: BranchNode
    basis: list | None
    frames: dict
    frame_conflicts: list


class _Solver:
    def __init__(self, tol: Tolerance, decide: bool):
        self.tol = tol
        self.decide = decide
        self.frames: dict = {}
        self.conflicts: list = []

    def _require_frame(self, q: int, s0, s1) -> None:
        """Ask that the frame on q make ``s0`` and ``s1`` orthogonal."""
        L = self.frames.get(q)
        if L is None:
            self.frames[q] = np.column_stack([normalize(s0), normalize(s1)])
            return
        x, y = normalize(np.linalg.solve(L, s0)), normalize(np.linalg.solve(L, s1))
        if abs(np.vdot(x, y)) > FRAME_ORTH_TOL:
            self.conflicts.append(q)

    def _propagate(self, g: DashedGraph, assigned: dict) -> bool:
        tol = self.tol
        while g.units:
            q = min(g.units)
            us = g.units.pop(q)
            if any(not parallel(us[0], u, tol) for u in us[1:]):
                return False
            s = perp(us[0])
            assigned[q] = s
            for w, dq, dw in g.incident(q):
                if abs(np.vdot(dq, s)) > tol.eps_rank:
                    g.add_unit(w, dw)
            g.remove_vertices([q])
        return True

    def solve(self, g: DashedGraph, pre: dict | None = None) -> BranchNode:
        g = g.copy()
        assigned = dict(pre or {})
        if not self._propagate(g, assigned):
            return BranchNode(DEAD_LEAF, assigned=assigned, dimension=0)
        isolated, comps = g.components()
        parts = []
        if isolated:
            parts.append(BranchNode(FREE_QUBITS, tuple(isolated), dimension=2 ** len(isolated)))
        for comp in comps:
            node = self._connected(g.subgraph(comp))
            parts.append(node)
            if node.dimension == 0:
                break
        if not parts:
            node = BranchNode(EMPTY_LEAF, dimension=1)
        elif len(parts) == 1:
            node = parts[0]
        else:
            dim = 1
            for p in parts:
                dim *= p.dimension
            node = BranchNode(COMPONENTS, tuple(sorted(g.vertices)), children=parts, dimension=dim)
        node.assigned = {**assigned, **node.assigned}
        return node

    def _branch(self, node: BranchNode, options) -> BranchNode:
        for label, make in options:
            child = make()
            child.label = label
            node.children.append(child)
            node.dimension += child.dimension
            if self.decide and node.dimension > 0:
                break
        return node

    def _connected(self, g: DashedGraph) -> BranchNode:
        tol = self.tol
        found = find_uniform_vertex(g, tol)
        if found is not None:
            a, gamma = found
            gamma_perp = perp(gamma)
            self._require_frame(a, gamma, gamma_perp)
            node = BranchNode(UNIFORM_VERTEX, (a,))

            def aligned():
                h = g.copy()
                for w, _, dw in h.incident(a):
                    h.add_unit(w, dw)
                h.remove_vertices([a])
                return self.solve(h, {a: gamma})

            def free():
                h = g.copy()
                h.remove_vertices([a])
                return self.solve(h, {a: gamma_perp})

            return self._branch(node, [("aligned", aligned), ("perp", free)])

        st = find_alternating_structure(g, tol)
        if st.kind == "QUASI_LOOP":
            w = st.special
            h = g.copy()
            h.add_unit(w, st.out_dirs[0])
            child = self.solve(h)
            return BranchNode(QUASI_FORCE, (w,), children=[child], dimension=child.dimension)

        loop = st.loop
        states0 = [perp(d) for d in st.out_dirs]
        states1 = [perp(d) for d in st.in_dirs]
        for q, s0, s1 in zip(loop, states0, states1):
            self._require_frame(q, s0, s1)
        node = BranchNode(ALT_LOOP, tuple(loop))
        on_loop = set(loop)

        def branch(states):
            def make():
                pin = dict(zip(loop, states))
                h = g.copy()
                for (a, b), (alpha, beta) in g.edges.items():
                    ca = abs(np.vdot(alpha, pin[a])) if a in on_loop else None
                    cb = abs(np.vdot(beta, pin[b])) if b in on_loop else None
                    if ca is not None and cb is not None:
                        if ca > tol.eps_rank and cb > tol.eps_rank:
                            return BranchNode(DEAD_LEAF, assigned=pin, dimension=0)
                    elif ca is not None and ca > tol.eps_rank:
                        h.add_unit(b, beta)
                    elif cb is not None and cb > tol.eps_rank:
                        h.add_unit(a, alpha)
                h.remove_vertices(loop)
                return self.solve(h, pin)
            return make

        return self._branch(node, [("all-0", branch(states0)), ("all-1", branch(states1))])

    def emit(self, node: BranchNode) -> list[dict]:
        if node.kind == DEAD_LEAF:
            return []
        if node.kind == EMPTY_LEAF:
            states = [{}]
        elif node.kind == FREE_QUBITS:
            options = []
            for q in node.vertices:
                L = self.frames.get(q)
                if L is None:
                    options.append([(q, KET0), (q, KET1)])
                else:
                    options.append([(q, normalize(L[:, 0])), (q, normalize(L[:, 1]))])
            states = [dict(combo) for combo in itertools.product(*options)]
        elif node.kind == COMPONENTS:
            states = [{}]
            for child in node.children:
                sub = self.emit(child)
                states = [{**s, **t} for s in states for t in sub]
        else:
            states = [s for child in node.children for s in self.emit(child)]
        return [{**node.assigned, **s} for s in states]


def solve_dashed(g: DashedGraph, want_basis: bool = False, tol: Tolerance = DEFAULT_TOL,
                 cap: int = DEFAULT_BASIS_CAP, decide: bool = False) -> DashedSolution:
    """Dimension (exact int), certificate tree and optionally a product basis.

    In ``decide`` mode branches are abandoned once a nonzero one is found, so
    only ``dimension > 0`` is meaningful.
    """
    solver = _Solver(tol, decide and not want_basis)
    tree = solver.solve(g)
    basis = None
    if want_basis:
        if tree.dimension > cap:
            raise ResourceLimitError(
                f"ground-space dimension {tree.dimension} exceeds basis cap {cap}",
                dimension=tree.dimension)
        basis = [ProductBasisState(s) for s in solver.emit(tree)]
        assert len(basis) == tree.dimension
    return DashedSolution(tree.dimension, tree, basis, solver.frames, sorted(set(solver.conflicts)))


def dashed_graph_from_instance(inst, tol: Tolerance = DEFAULT_TOL) -> DashedGraph:
    """Dashed graph of an instance whose blocks are all rank-1 product vectors."""
    from .graphsimplify import EdgeKind, classify_edge

    g = DashedGraph(set(inst.qubits))
    for (a, b), vs in sorted(inst.blocks.items()):
        if len(vs) != 1:
            raise ValueError(f"block on {(a, b)} has rank {len(vs)}")
        kind, factors = classify_edge(vs[0], tol)
        if kind is not EdgeKind.DASHED:
            raise ValueError(f"block on {(a, b)} is entangled")
        g.add_edge(a, b, *factors)
    for q, us in inst.units.items():
        for u in us:
            g.add_unit(q, u)
    return g
