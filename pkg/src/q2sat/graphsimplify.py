"""Interaction graphs of homogeneous instances and their simplification.

Every entangled two-qubit vector is (I x L)|Y> for an invertible L, with
|Y> the singlet. Picking such an L per qubit along a spanning tree of a solid
component puts that component in a frame where all its tree constraints are
singlets; in that frame the component's states are permutation symmetric, so
any other constraint inside the component, or any dashed endpoint on it, can
be moved to any vertex of the component. Composing single-step slides
(``slide``) gives exactly these moves; ``simplify`` applies the composite in
closed form.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .instance import Instance, add_block_vectors, oriented
from .numerics import (
    DEFAULT_TOL,
    SINGLET,
    Tolerance,
    condition_number,
    normalize,
    orthonormalize,
    swap_factors,
)

FRAME_COND_WARN = 1e8


class EdgeKind(enum.Enum):
    SOLID = "solid"
    DASHED = "dashed"


def classify_edge(v, tol: Tolerance = DEFAULT_TOL):
    """Return ``(kind, factors)``; ``factors`` is ``(alpha, beta)`` for DASHED, else None."""
    M = np.asarray(v, dtype=complex).reshape(2, 2)
    if abs(np.linalg.det(M)) > tol.eps_rank:
        return EdgeKind.SOLID, None
    U, s, Vh = np.linalg.svd(M)
    return EdgeKind.DASHED, (U[:, 0].copy(), Vh[0].copy())


def extract_local_frame(phi, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Invertible L with (I x L)|Y> = phi for an entangled two-qubit ``phi``."""
    phi = np.asarray(phi, dtype=complex).reshape(4)
    kind, _ = classify_edge(phi, tol)
    if kind is not EdgeKind.SOLID:
        raise PreconditionError("product vector has no invertible singlet frame")
    a, b, c, d = phi
    L = np.sqrt(2) * np.array([[-c, a], [-d, b]], dtype=complex)
    residual = np.linalg.norm(np.kron(np.eye(2), L) @ SINGLET - phi)
    assert residual <= max(tol.eps_residual, 1e-12 * np.linalg.norm(phi)) * 10, residual
    return L


@dataclass
class InteractionGraph:
    """Homogeneous constraint graph. ``edges[pair]`` lists stacked vectors.

    More than one vector on a pair is a transient multi-edge.
    """

    vertices: set
    edges: dict = field(default_factory=dict)

    @classmethod
    def from_instance(cls, inst: Instance, tol: Tolerance = DEFAULT_TOL) -> "InteractionGraph":
        if inst.units:
            raise PreconditionError("graph building needs an instance without unit constraints")
        g = cls(set(inst.qubits))
        for pair, vs in inst.blocks.items():
            g.edges[pair] = [v.copy() for v in vs]
        return g

    def copy(self) -> "InteractionGraph":
        return InteractionGraph(set(self.vertices),
                                {k: [v.copy() for v in vs] for k, vs in self.edges.items()})

    def vec(self, x: int, y: int) -> np.ndarray:
        """The single constraint on {x, y}, oriented with x as the left factor."""
        vs = self.edges[(min(x, y), max(x, y))]
        if len(vs) != 1:
            raise PreconditionError(f"pair ({x}, {y}) carries {len(vs)} constraints")
        return vs[0] if x < y else swap_factors(vs[0])

    def kind(self, x: int, y: int, tol: Tolerance = DEFAULT_TOL) -> EdgeKind:
        return classify_edge(self.vec(x, y), tol)[0]

    def neighbors(self, x: int) -> list[int]:
        return sorted(b if a == x else a for a, b in self.edges if x in (a, b))

    def stack(self, x: int, y: int, v: np.ndarray) -> None:
        pair, w = oriented((x, y), normalize(v))
        self.edges.setdefault(pair, []).append(w)

    def unstack(self, x: int, y: int, v: np.ndarray) -> None:
        """Remove one stacked vector (given oriented with x on the left) from {x, y}."""
        pair, w = oriented((x, y), v)
        vs = self.edges[pair]
        i = min(range(len(vs)), key=lambda j: np.linalg.norm(vs[j] - w))
        del vs[i]
        if not vs:
            del self.edges[pair]

    def remove(self, x: int, y: int) -> None:
        del self.edges[(min(x, y), max(x, y))]

    def to_instance(self, n: int, tol: Tolerance = DEFAULT_TOL) -> Instance:
        inst = Instance(n, qubits=frozenset(self.vertices))
        for pair in sorted(self.edges):
            add_block_vectors(inst, pair, self.edges[pair], tol)
        return inst

    def to_dot(self, tol: Tolerance = DEFAULT_TOL) -> str:
        lines = ["graph G {"]
        for v in sorted(self.vertices):
            lines.append(f"  {v};")
        for (a, b), vs in sorted(self.edges.items()):
            for v in vs:
                style = "solid" if classify_edge(v, tol)[0] is EdgeKind.SOLID else "dashed"
                lines.append(f"  {a} -- {b} [style={style}];")
        lines.append("}")
        return "\n".join(lines)


def slide(g: InteractionGraph, x: int, y: int, r: int, tol: Tolerance = DEFAULT_TOL) -> InteractionGraph:
    """Move the endpoint ``x`` of the constraint on {x, r} across the solid edge {x, y}.

    With the pivot written as (I x L)|Y> on (x, y), the moved constraint c on
    (x, r) becomes (L x I)c on (y, r). If {y, r} already carries a constraint
    the new one is stacked as a multi-edge.
    """
    if len({x, y, r}) != 3:
        raise PreconditionError("slide needs three distinct vertices")
    L = extract_local_frame(g.vec(x, y), tol)
    c = g.vec(x, r)
    out = g.copy()
    out.remove(x, r)
    out.stack(y, r, np.kron(L, np.eye(2)) @ c)
    return out


def slide_type1(g: InteractionGraph, p: int, q: int, r: int, tol: Tolerance = DEFAULT_TOL) -> InteractionGraph:
    """Solid (p,q) and solid (p,r) become solid (p,q) and solid (q,r)."""
    if g.kind(p, q, tol) is not EdgeKind.SOLID or g.kind(p, r, tol) is not EdgeKind.SOLID:
        raise PreconditionError("type-I slide needs two solid edges")
    return slide(g, p, q, r, tol)


def slide_type2(g: InteractionGraph, p: int, q: int, r: int, tol: Tolerance = DEFAULT_TOL) -> InteractionGraph:
    """Dashed (q,r) slides across solid (p,q) to dashed (p,r).

    The direction at the moved end becomes L^-1 alpha, where (p,q) = (I x L)|Y>.
    """
    if r == p:
        raise PreconditionError("r == p is not a slide; stack on (p, q) instead")
    if g.kind(p, q, tol) is not EdgeKind.SOLID or g.kind(q, r, tol) is not EdgeKind.DASHED:
        raise PreconditionError("type-II slide needs solid (p,q) and dashed (q,r)")
    return slide(g, q, p, r, tol)


@dataclass
class Tail:
    """A solid path ``path[0] - path[1] - ...`` attached to the backbone at ``path[0]``.

    ``frames[v]`` is M_v with the constraint on (path[i], path[i+1]) equal to
    (M_i x M_{i+1})|Y> up to scale; ``frames[path[0]]`` is the identity.
    """

    path: tuple[int, ...]
    frames: dict

    @property
    def root(self) -> int:
        return self.path[0]


@dataclass
class SimplifiedGraph:
    backbone_vertices: set
    dashed: dict  # pair -> (alpha at pair[0], beta at pair[1])
    tails: list
    graph: InteractionGraph
    warnings: list = field(default_factory=list)


@dataclass
class Collision:
    """Stacked independent constraints on some pairs; ``graph`` holds the stacks."""

    pairs: list
    graph: InteractionGraph
    warnings: list = field(default_factory=list)


@dataclass
class SimplifyStep:
    label: str
    before: InteractionGraph
    after: InteractionGraph


def solid_components(g: InteractionGraph, tol: Tolerance = DEFAULT_TOL) -> list[list[int]]:
    adj = {v: [] for v in g.vertices}
    for (a, b), vs in g.edges.items():
        if classify_edge(vs[0], tol)[0] is EdgeKind.SOLID:
            adj[a].append(b)
            adj[b].append(a)
    seen, comps = set(), []
    for v in sorted(g.vertices):
        if v in seen or not adj[v]:
            continue
        comp, stack = [], [v]
        seen.add(v)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        comps.append(sorted(comp))
    return comps


def _tree_frames(g: InteractionGraph, comp: list[int], root: int, tol: Tolerance):
    """Spanning tree by DFS preorder from ``root`` with singlet frames per vertex."""
    members = set(comp)
    frames = {root: np.eye(2, dtype=complex)}
    order, tree = [], set()
    stack = [root]
    visited = {root}
    while stack:
        u = stack.pop()
        order.append(u)
        for v in reversed(g.neighbors(u)):
            if v in members and v not in visited and g.kind(u, v, tol) is EdgeKind.SOLID:
                visited.add(v)
                tree.add((min(u, v), max(u, v)))
                phi = np.kron(np.linalg.inv(frames[u]), np.eye(2)) @ g.vec(u, v)
                M = extract_local_frame(normalize(phi), tol)
                frames[v] = M / np.linalg.norm(M)
                stack.append(v)
    return order, tree, frames


def _relocation(frames, u, x) -> np.ndarray:
    return frames[x] @ np.linalg.inv(frames[u])


def simplify(g: InteractionGraph, tol: Tolerance = DEFAULT_TOL, trace: list | None = None):
    """Reduce a homogeneous graph to a dashed backbone plus solid tails.

    Returns a ``SimplifiedGraph``, or a ``Collision`` when moved constraints
    stack linearly independent vectors on a pair. With ``trace`` a list, every
    kernel-preserving step is appended as a ``SimplifyStep``.
    """
    for pair, vs in g.edges.items():
        if len(vs) != 1:
            raise PreconditionError(f"pair {pair} carries a multi-edge; graph is not homogeneous")
    work = g.copy()
    warnings: list[str] = []
    comps = solid_components(work, tol)
    owner: dict[int, int] = {}
    tails: list[Tail] = []
    for ci, comp in enumerate(comps):
        members = set(comp)
        with_dashed = [v for v in comp
                       if any(work.kind(v, w, tol) is EdgeKind.DASHED for w in work.neighbors(v))]
        root = min(with_dashed) if with_dashed else comp[0]
        order, tree, frames = _tree_frames(work, comp, root, tol)
        for v, M in frames.items():
            if condition_number(M) > FRAME_COND_WARN:
                warnings.append(f"near-singular frame on qubit {v} (cond {condition_number(M):.2e})")
        before = work.copy() if trace is not None else None
        extra = []
        for (a, b) in [p for p in work.edges if p[0] in members and p[1] in members]:
            c = work.vec(a, b)
            if classify_edge(c, tol)[0] is not EdgeKind.SOLID:
                extra.append((a, b, c))  # dashed inside the component; folded below
                continue
            work.remove(a, b)
            if (a, b) in tree:
                continue
            primed = np.kron(np.linalg.inv(frames[a]), np.linalg.inv(frames[b])) @ c
            primed = normalize(primed)
            if abs(np.vdot(SINGLET, primed)) >= 1.0 - tol.eps_rank:
                continue
            extra.append((a, b, c))
        for i in range(len(order) - 1):
            x, y = order[i], order[i + 1]
            work.stack(x, y, np.kron(frames[x], frames[y]) @ SINGLET)
        v0, v1 = order[0], order[1]
        solid_extra = [(a, b, c) for a, b, c in extra if classify_edge(c, tol)[0] is EdgeKind.SOLID]
        for a, b, c in solid_extra:
            moved = np.kron(_relocation(frames, a, v0), _relocation(frames, b, v1)) @ c
            work.stack(v0, v1, moved)
        if trace is not None:
            trace.append(SimplifyStep(f"linearize component {comp}", before, work.copy()))
        for a, b, c in extra:
            if classify_edge(c, tol)[0] is EdgeKind.SOLID:
                continue
            before = work.copy() if trace is not None else None
            moved = np.kron(_relocation(frames, a, v0), _relocation(frames, b, v1)) @ c
            work.unstack(a, b, c)
            work.stack(v0, v1, moved)
            if trace is not None:
                trace.append(SimplifyStep(f"fold dashed ({a},{b}) onto ({v0},{v1})", before, work.copy()))
        for v in comp:
            owner[v] = ci
        tails.append(Tail(tuple(order), frames))

    # dashed edges leaving a component: move endpoints to the attachment vertex
    for (a, b) in sorted(work.edges):
        if (a, b) not in work.edges or len(work.edges[(a, b)]) != 1:
            continue
        c = work.edges[(a, b)][0]
        if classify_edge(c, tol)[0] is not EdgeKind.DASHED:
            continue
        ta = tails[owner[a]] if a in owner else None
        tb = tails[owner[b]] if b in owner else None
        if ta is tb and ta is not None:
            continue  # already folded
        na = ta.root if ta is not None else a
        nb = tb.root if tb is not None else b
        if (na, nb) == (a, b):
            continue
        before = work.copy() if trace is not None else None
        Ta = _relocation(ta.frames, a, na) if ta is not None else np.eye(2)
        Tb = _relocation(tb.frames, b, nb) if tb is not None else np.eye(2)
        work.remove(a, b)
        work.stack(na, nb, np.kron(Ta, Tb) @ c)
        if trace is not None:
            trace.append(SimplifyStep(f"slide dashed ({a},{b}) to ({na},{nb})", before, work.copy()))

    collisions = []
    for pair in sorted(work.edges):
        vs = orthonormalize(work.edges[pair], tol)
        if len(vs) > 1:
            collisions.append(pair)
        else:
            work.edges[pair] = [normalize(work.edges[pair][0])]
    if collisions:
        return Collision(collisions, work, warnings)

    interior = {v for t in tails for v in t.path[1:]}
    dashed = {}
    for pair, (v,) in work.edges.items():
        kind, factors = classify_edge(v, tol)
        if kind is EdgeKind.DASHED:
            assert not (set(pair) & interior), "dashed edge left on a tail interior"
            dashed[pair] = factors
    return SimplifiedGraph(set(work.vertices) - interior, dashed, tails, work, warnings)
