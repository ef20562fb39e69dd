"""Ground-space descriptions as a forest of isometries over a product span.

Leaf product states live on the qubits that survive reduction. Replaying the
reduction log backwards (each isometry re-expands one logical qubit into its
two children, each fixed factor tensors its frozen state back in) lifts them to
the original register.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dashedsolver import BranchNode, ProductBasisState
from .errors import PreconditionError, ResourceLimitError
from .reduction import FixedFactor, IsometryNode, Verdict

SCHEMA_VERSION = "v1"
MATERIALIZE_CAP = 14


@dataclass
class TTNForest:
    n: int
    events: list = field(default_factory=list)
    frames: dict = field(default_factory=dict)
    leaf_qubits: tuple = ()


@dataclass
class GroundSpaceDescription:
    verdict: Verdict
    dimension: int
    forest: TTNForest
    leaf_basis: list | None = None
    certificate: BranchNode | None = None
    warnings: list = field(default_factory=list)
    frame_conflicts: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.forest.n


def lift(tensor: np.ndarray, qubits: list, event) -> tuple[np.ndarray, list]:
    """Undo one reduction event on a state tensor with one axis per qubit."""
    if isinstance(event, FixedFactor):
        k = len(event.qubits)
        return np.multiply.outer(tensor, event.state.reshape((2,) * k)), qubits + list(event.qubits)
    if isinstance(event, IsometryNode):
        i = qubits.index(event.parent)
        U = event.matrix.reshape(2, 2, 2)
        out = np.tensordot(tensor, U, axes=([i], [2]))
        return out, qubits[:i] + qubits[i + 1:] + list(event.children)
    raise TypeError(f"unknown event {event!r}")


def lift_dense(vec: np.ndarray, qubits: list, events) -> tuple[np.ndarray, list]:
    """Lift a dense vector over ``qubits`` through ``events`` (latest first)."""
    t = np.asarray(vec, dtype=complex).reshape((2,) * len(qubits)) if qubits else np.asarray(vec).reshape(())
    qubits = list(qubits)
    for ev in events:
        t, qubits = lift(t, qubits, ev)
    order = sorted(qubits)
    t = np.transpose(t, [qubits.index(q) for q in order]) if qubits else t
    return t.reshape(-1), order


def materialize(desc: GroundSpaceDescription, cap: int = MATERIALIZE_CAP) -> list[np.ndarray]:
    """Dense unit-norm states over all n original qubits (qubit 0 most significant)."""
    if desc.n > cap:
        raise ResourceLimitError(f"materialization limited to {cap} qubits, instance has {desc.n}")
    if desc.leaf_basis is None:
        raise PreconditionError("description carries no leaf basis (solve in BASIS mode)")
    leaves = sorted(desc.forest.leaf_qubits)
    events = list(reversed(desc.forest.events))
    out = []
    for state in desc.leaf_basis:
        t = np.ones((), dtype=complex)
        for q in leaves:
            t = np.multiply.outer(t, state.factors[q])
        vec, order = lift_dense(t.reshape(-1), leaves, events)
        assert order == list(range(desc.n)), order
        out.append(vec / np.linalg.norm(vec))
    return out


def forest_stats(desc: GroundSpaceDescription) -> tuple[int, int, int]:
    """(number of isometry trees, maximum depth, number of leaf qubits)."""
    isos = [e for e in desc.forest.events if isinstance(e, IsometryNode)]
    by_parent = {e.parent: e for e in isos}
    consumed = {c for e in isos for c in e.children}

    def depth(node: IsometryNode) -> int:
        return 1 + max((depth(by_parent[c]) for c in node.children if c in by_parent), default=0)

    roots = [e for e in isos if e.parent not in consumed]
    return len(roots), max((depth(r) for r in roots), default=0), len(desc.forest.leaf_qubits)


def _cvec(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v).reshape(-1)]


def to_json_dict(desc: GroundSpaceDescription) -> dict:
    events = []
    for e in desc.forest.events:
        if isinstance(e, IsometryNode):
            events.append({"type": "isometry", "parent": e.parent, "children": list(e.children),
                           "matrix": [_cvec(row) for row in e.matrix]})
        else:
            events.append({"type": "fixed", "qubits": list(e.qubits), "state": _cvec(e.state)})
    out = {
        "schema": SCHEMA_VERSION,
        "verdict": desc.verdict.value,
        "dimension": None if desc.dimension is None else str(desc.dimension),
        "n": desc.n,
        "events": events,
        "frames": {str(q): [_cvec(row) for row in L] for q, L in sorted(desc.forest.frames.items())},
        "leaf_qubits": sorted(desc.forest.leaf_qubits),
        "warnings": list(desc.warnings),
    }
    if desc.leaf_basis is not None:
        out["leaf_basis"] = [{str(q): _cvec(s.factors[q]) for q in sorted(s.factors)}
                             for s in desc.leaf_basis]
    if desc.certificate is not None:
        out["certificate"] = desc.certificate.to_json()
    return out


def dumps(desc: GroundSpaceDescription) -> str:
    return json.dumps(to_json_dict(desc), sort_keys=True, indent=1)


def _dec(raw) -> np.ndarray:
    return np.array([complex(re, im) for re, im in raw], dtype=complex)


def from_json_dict(data: dict) -> GroundSpaceDescription:
    """Rebuild a description (without its certificate) from its v1 JSON form."""
    if data.get("schema") != SCHEMA_VERSION:
        raise PreconditionError(f"unsupported description schema {data.get('schema')!r}")
    events = []
    for e in data["events"]:
        if e["type"] == "isometry":
            events.append(IsometryNode(e["parent"], tuple(e["children"]),
                                       np.array([_dec(r) for r in e["matrix"]])))
        else:
            events.append(FixedFactor(tuple(e["qubits"]), _dec(e["state"])))
    forest = TTNForest(
        data["n"], events,
        {int(q): np.array([_dec(r) for r in L]) for q, L in data["frames"].items()},
        tuple(data["leaf_qubits"]),
    )
    basis = None
    if "leaf_basis" in data:
        basis = [ProductBasisState({int(q): _dec(v) for q, v in s.items()}) for s in data["leaf_basis"]]
    return GroundSpaceDescription(Verdict(data["verdict"]),
                                  None if data["dimension"] is None else int(data["dimension"]), forest, basis,
                                  None, list(data.get("warnings", [])))
