"""Rank case analysis: fix rank-3 blocks, merge rank-2 blocks into one
logical qubit, propagate single-qubit constraints, and log every rewrite.

Every rewrite is a linear map G from the post-rewrite register into the
pre-rewrite register (a fixed state tensored in, or a 1 -> 2 qubit isometry).
A constraint <v| touching G's output qubits pulls back to <v|G, expanded over
any output qubits the constraint does not touch.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import PreconditionError
from .instance import Instance, add_block_vectors, add_unit_vectors, oriented
from .numerics import DEFAULT_TOL, Tolerance, nullspace, orthonormalize, perp


class Verdict(enum.Enum):
    SATISFIABLE = "SATISFIABLE"
    FRUSTRATED = "FRUSTRATED"


FRUSTRATED = Verdict.FRUSTRATED
SATISFIABLE = Verdict.SATISFIABLE


@dataclass
class IsometryNode:
    """Logical qubit ``parent`` encodes the pair ``children`` via ``matrix`` (4x2)."""

    parent: int
    children: tuple[int, int]
    matrix: np.ndarray


@dataclass
class FixedFactor:
    qubits: tuple[int, ...]
    state: np.ndarray


Event = Union[IsometryNode, FixedFactor]


@dataclass
class ReductionLog:
    events: list = field(default_factory=list)
    next_id: int = 0

    def fresh(self) -> int:
        q = self.next_id
        self.next_id += 1
        return q


class _Frustration(Exception):
    pass


def _map_tensor(event: Event) -> tuple[tuple[int, ...], tuple[int, ...], np.ndarray]:
    """(output qubits, input qubits, tensor with output legs first)."""
    if isinstance(event, FixedFactor):
        k = len(event.qubits)
        return tuple(event.qubits), (), event.state.reshape((2,) * k)
    return tuple(event.children), (event.parent,), event.matrix.reshape(2, 2, 2)


def pull_back(qubits: tuple[int, ...], v: np.ndarray, event: Event,
              tol: Tolerance = DEFAULT_TOL) -> list[tuple[tuple[int, ...], np.ndarray]]:
    """Constraints equivalent to ``<v|`` on ``qubits`` after applying ``event``.

    Returns ``(target qubits, vector)`` pairs. An empty target tuple with a
    returned vector means a nonzero scalar, i.e. the constraint cannot be met.
    """
    out_q, in_q, G = _map_tensor(event)
    k = len(qubits)
    labels_v = list(range(k))
    lab = dict(zip(qubits, labels_v))
    nxt = k
    labels_out = []
    for q in out_q:
        if q in lab:
            labels_out.append(lab[q])
        else:
            labels_out.append(nxt)
            nxt += 1
    labels_in = list(range(nxt, nxt + len(in_q)))
    rem = [q for q in qubits if q not in out_q]
    spect = [q for q in out_q if q not in qubits]
    res_labels = [lab[q] for q in rem] + [labels_out[out_q.index(q)] for q in spect] + labels_in
    R = np.einsum(v.conj().reshape((2,) * k), labels_v, G, labels_out + labels_in, res_labels)
    R = np.asarray(R).reshape(1 << len(rem), 1 << len(spect), 1 << len(in_q))
    target = tuple(rem) + tuple(in_q)
    derived = []
    for s in range(R.shape[1]):
        w = R[:, s, :].reshape(-1).conj()
        norm = np.linalg.norm(w)
        if norm > tol.eps_rank:
            derived.append((target, w / norm))
    return derived


def _add_constraint(inst: Instance, qubits: tuple[int, ...], v: np.ndarray, tol: Tolerance) -> None:
    if len(qubits) == 0:
        raise _Frustration()
    if len(qubits) == 1:
        add_unit_vectors(inst, qubits[0], [v], tol)
    else:
        pair, w = oriented(qubits, v)
        add_block_vectors(inst, pair, [w], tol)


def apply_event(inst: Instance, event: Event, tol: Tolerance = DEFAULT_TOL) -> Instance:
    """Rewrite ``inst`` through ``event``; raises ``_Frustration`` on a violated scalar."""
    out_q, in_q, _ = _map_tensor(event)
    for q in out_q:
        if q not in inst.qubits:
            raise PreconditionError(f"qubit {q} is not active")
    post = inst.copy()
    touched = []
    for pair in list(post.blocks):
        if set(pair) & set(out_q):
            for v in post.blocks.pop(pair):
                touched.append((pair, v))
    for q in list(post.units):
        if q in out_q:
            for v in post.units.pop(q):
                touched.append(((q,), v))
    post.qubits = (post.qubits - set(out_q)) | set(in_q)
    for qubits, v in touched:
        for target, w in pull_back(qubits, v, event, tol):
            _add_constraint(post, target, w, tol)
    # derived constraints that fill a whole local space leave nothing
    if any(len(u) >= 2 for u in post.units.values()) or any(len(b) >= 4 for b in post.blocks.values()):
        raise _Frustration()
    return post


Listener = Callable[[Event, Instance, Instance], None]


def _record(log: ReductionLog, event: Event, pre: Instance, post: Instance,
            on_event: Listener | None) -> None:
    log.events.append(event)
    if on_event is not None:
        on_event(event, pre, post)


def contract_fixed(inst: Instance, factor: FixedFactor, tol: Tolerance = DEFAULT_TOL):
    """Contract a fixed state into every constraint touching its qubits.

    Returns the rewritten instance, or FRUSTRATED when some constraint cannot
    be satisfied by the fixed state.
    """
    try:
        return apply_event(inst, factor, tol)
    except _Frustration:
        return FRUSTRATED


def rank3_fix(inst: Instance, pair, tol: Tolerance = DEFAULT_TOL):
    """Fix the pair to the unique state orthogonal to a rank-3 block.

    Returns ``(instance or FRUSTRATED, FixedFactor)``.
    """
    pair = tuple(pair)
    if inst.blocks.get(pair) is None or len(inst.blocks[pair]) != 3:
        raise PreconditionError(f"block on {pair} is not rank 3")
    (chi,) = nullspace(inst.blocks[pair].conj(), tol)
    factor = FixedFactor(pair, chi)
    return contract_fixed(inst, factor, tol), factor


def rank2_merge(inst: Instance, pair, new_qubit: int, tol: Tolerance = DEFAULT_TOL):
    """Encode the 2-dim kernel of a rank-2 block into logical qubit ``new_qubit``.

    Returns ``(instance or FRUSTRATED, IsometryNode)``.
    """
    pair = tuple(pair)
    if inst.blocks.get(pair) is None or len(inst.blocks[pair]) != 2:
        raise PreconditionError(f"block on {pair} is not rank 2")
    if new_qubit in inst.qubits:
        raise PreconditionError(f"qubit id {new_qubit} already active")
    kernel = orthonormalize(nullspace(inst.blocks[pair].conj(), tol), tol)
    U = np.column_stack(kernel)
    node = IsometryNode(new_qubit, pair, U)
    try:
        return apply_event(inst, node, tol), node
    except _Frustration:
        return FRUSTRATED, node


def propagate_units(inst: Instance, log: ReductionLog | None = None,
                    tol: Tolerance = DEFAULT_TOL, on_event: Listener | None = None):
    """Resolve single-qubit constraints to a fixpoint.

    Each unit |g> on q fixes q to the orthogonal state; two independent units
    on one qubit frustrate the instance. Returns ``(instance or FRUSTRATED,
    list of FixedFactor)``.
    """
    factors = []
    while inst.units:
        q = min(inst.units)
        us = inst.units[q]
        if len(us) >= 2:
            return FRUSTRATED, factors
        factor = FixedFactor((q,), perp(us[0]))
        post = contract_fixed(inst, factor, tol)
        factors.append(factor)
        if log is not None:
            _record(log, factor, inst, post, on_event)
        if post is FRUSTRATED:
            return FRUSTRATED, factors
        inst = post
    return inst, factors


def reduce_to_homogeneous(inst: Instance, log: ReductionLog | None = None,
                          tol: Tolerance = DEFAULT_TOL, on_event: Listener | None = None):
    """Apply rank reductions until every block has rank 1 and no units remain.

    Priority: frustration checks, unit propagation, rank-3 fix, rank-2 merge.
    Returns ``(instance or FRUSTRATED, log)``.
    """
    if log is None:
        log = ReductionLog(next_id=max(inst.qubits, default=-1) + 1)
    log.next_id = max(log.next_id, max(inst.qubits, default=-1) + 1)
    budget = 2 * inst.num_active + len(inst.blocks) + 1
    iterations = 0
    while True:
        if any(len(v) >= 4 for v in inst.blocks.values()):
            return FRUSTRATED, log
        if any(len(v) >= 2 for v in inst.units.values()):
            return FRUSTRATED, log
        before = inst.num_active
        if inst.units:
            inst, _ = propagate_units(inst, log, tol, on_event)
            if inst is FRUSTRATED:
                return FRUSTRATED, log
        else:
            rank3 = sorted(p for p, v in inst.blocks.items() if len(v) == 3)
            rank2 = sorted(p for p, v in inst.blocks.items() if len(v) == 2)
            if rank3:
                post, event = rank3_fix(inst, rank3[0], tol)
            elif rank2:
                post, event = rank2_merge(inst, rank2[0], log.fresh(), tol)
            else:
                return inst, log
            _record(log, event, inst, post, on_event)
            if post is FRUSTRATED:
                return FRUSTRATED, log
            inst = post
        iterations += 1
        assert inst.num_active < before, "reduction made no progress"
        assert iterations <= budget, "reduction exceeded its iteration bound"
