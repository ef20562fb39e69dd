"""Brute-force ground truth: dense kernels, classical model counts, checks.

Nothing here depends on the rewriting pipeline; it only reads constraint
vectors and builds the full 2^n-dimensional Hamiltonian.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceLimitError
from .instance import Instance
from .numerics import DEFAULT_TOL, Tolerance, nullspace, span_distance

ORACLE_MAX_QUBITS = 12
CNF_MAX_VARS = 24


def _embed_indices(n: int, positions: list[int]):
    """Index helpers for an operator on ``positions`` of an n-qubit register.

    Qubit at position 0 is the most significant bit. Returns the base indices
    (bits at ``positions`` cleared) and the offset of each local basis state.
    """
    shifts = [n - 1 - p for p in positions]
    mask = 0
    for s in shifts:
        mask |= 1 << s
    base = np.array([i for i in range(1 << n) if not i & mask], dtype=np.int64)
    k = len(positions)
    offsets = []
    for local in range(1 << k):
        off = 0
        for j, s in enumerate(shifts):
            if (local >> (k - 1 - j)) & 1:
                off |= 1 << s
        offsets.append(off)
    return base, offsets


def hamiltonian(inst: Instance, order: list[int] | None = None) -> np.ndarray:
    """Dense sum of constraint projectors over the active qubits (sorted order)."""
    order = sorted(inst.qubits) if order is None else list(order)
    n = len(order)
    pos = {q: i for i, q in enumerate(order)}
    H = np.zeros((1 << n, 1 << n), dtype=complex)
    for qubits, v in inst.constraint_list():
        base, offsets = _embed_indices(n, [pos[q] for q in qubits])
        P = np.outer(v, v.conj())
        for x, ox in enumerate(offsets):
            for y, oy in enumerate(offsets):
                if P[x, y] != 0:
                    H[base + ox, base + oy] += P[x, y]
    return H


def brute_kernel(inst: Instance, cap: int = ORACLE_MAX_QUBITS,
                 tol: Tolerance = DEFAULT_TOL) -> tuple[int, list[np.ndarray]]:
    """Kernel of the stacked constraint bras; basis states use sorted active-qubit order.

    Qubits are added one at a time. The kernel of the constraints supported on
    the first t + 1 qubits lies in K_t (x) C^2, so each step only takes the
    nullspace of the new qubit's constraints restricted to that subspace.
    """
    n = inst.num_active
    if n > cap:
        raise ResourceLimitError(f"oracle limited to {cap} qubits, instance has {n}")
    if n == 0:
        # a scalar: satisfiable unless a constraint acts on nothing
        return 1, [np.ones(1, dtype=complex)]
    order = sorted(inst.qubits)
    pos = {q: i for i, q in enumerate(order)}
    by_last: dict[int, list] = {}
    for qubits, v in inst.constraint_list():
        by_last.setdefault(max(pos[q] for q in qubits), []).append(([pos[q] for q in qubits], v))
    K = np.ones((1, 1), dtype=complex)
    for t in range(n):
        d = K.shape[1]
        # columns: old kernel vector (x) |0>, then (x) |1>
        C = np.zeros((K.shape[0], 2, 2 * d), dtype=complex)
        C[:, 0, :d] = K
        C[:, 1, d:] = K
        C = C.reshape(-1, 2 * d)
        rows = []
        for axes, v in by_last.get(t, []):
            T = np.moveaxis(C.reshape((2,) * (t + 1) + (2 * d,)), axes, list(range(len(axes))))
            rows.append((v.conj() @ T.reshape(1 << len(axes), -1)).reshape(-1, 2 * d))
        if rows:
            null = nullspace(np.vstack(rows), tol)
            if not null:
                return 0, []
            K = C @ np.column_stack(null)
        else:
            K = C
    basis = [K[:, i].copy() for i in range(K.shape[1])]
    return len(basis), basis


def count_2cnf(clauses, n: int, cap: int = CNF_MAX_VARS) -> int:
    """Exhaustive model count of a 2-CNF formula in DIMACS literal convention."""
    if n > cap:
        raise ResourceLimitError(f"classical counter limited to {cap} variables")
    if n == 0:
        return 1
    assignments = np.array(list(itertools.product([0, 1], repeat=n)), dtype=bool)
    ok = np.ones(len(assignments), dtype=bool)
    for clause in clauses:
        sat = np.zeros(len(assignments), dtype=bool)
        for lit in clause:
            col = assignments[:, abs(lit) - 1]
            sat |= col if lit > 0 else ~col
        ok &= sat
    return int(ok.sum())


def constraint_residuals(inst: Instance, states: list[np.ndarray]) -> list[tuple[tuple[int, ...], float]]:
    """Largest |<constraint|state>| norm over ``states``, per constraint."""
    order = sorted(inst.qubits)
    n = len(order)
    pos = {q: i for i, q in enumerate(order)}
    table = []
    for qubits, v in inst.constraint_list():
        worst = 0.0
        axes = [pos[q] for q in qubits]
        for s in states:
            t = s.reshape((2,) * n)
            t = np.moveaxis(t, axes, list(range(len(axes))))
            t = t.reshape(1 << len(axes), -1)
            r = np.linalg.norm(v.conj() @ t) / max(np.linalg.norm(s), 1e-300)
            worst = max(worst, float(r))
        table.append((tuple(qubits), worst))
    return table


@dataclass
class CheckReport:
    dims_match: bool
    solver_dim: int
    oracle_dim: int
    span_dist: float
    max_residual: float
    residuals: list = field(default_factory=list)
    tol: Tolerance = DEFAULT_TOL

    @property
    def passed(self) -> bool:
        return (
            self.dims_match
            and self.span_dist <= self.tol.eps_span
            and self.max_residual <= self.tol.eps_residual
        )

    def table(self) -> str:
        lines = [
            f"dims      solver={self.solver_dim} oracle={self.oracle_dim} "
            f"{'ok' if self.dims_match else 'MISMATCH'}",
            f"span_dist {self.span_dist:.3e} (<= {self.tol.eps_span:g})",
            f"residual  {self.max_residual:.3e} (<= {self.tol.eps_residual:g})",
        ]
        for qubits, r in self.residuals:
            flag = "" if r <= self.tol.eps_residual else "  FAIL"
            lines.append(f"  {str(list(qubits)):>10}  {r:.3e}{flag}")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def check_states(inst: Instance, dimension: int, states: list[np.ndarray],
                 tol: Tolerance = DEFAULT_TOL, cap: int = ORACLE_MAX_QUBITS) -> CheckReport:
    """Compare a claimed ground space (dimension plus dense states) with the oracle."""
    odim, obasis = brute_kernel(inst, cap, tol)
    residuals = constraint_residuals(inst, states) if states else []
    max_res = max((r for _, r in residuals), default=0.0)
    if states or odim:
        sd = span_distance(states, obasis, tol) if states and obasis else float(
            np.sqrt(len(states) + len(obasis)))
    else:
        sd = 0.0
    return CheckReport(
        dims_match=(dimension == odim and len(states) == odim),
        solver_dim=dimension,
        oracle_dim=odim,
        span_dist=sd,
        max_residual=max_res,
        residuals=residuals,
        tol=tol,
    )


def check_solution(inst: Instance, desc, tol: Tolerance = DEFAULT_TOL,
                   cap: int = ORACLE_MAX_QUBITS) -> CheckReport:
    """Materialize a ground-space description and referee it against the oracle."""
    from .ttn import materialize

    states = materialize(desc, cap=cap) if desc.dimension else []
    return check_states(inst, desc.dimension, states, tol, cap)


def event_kernel_distance(pre: Instance, post, event, tol: Tolerance = DEFAULT_TOL,
                          cap: int = ORACLE_MAX_QUBITS) -> float:
    """Span distance between K(pre) and the image of K(post) under ``event``.

    ``post`` may be the FRUSTRATED verdict, in which case the image is empty.
    Zero (within tolerance) means the rewrite preserved the ground space.
    """
    from .ttn import lift_dense

    _, before = brute_kernel(pre, cap, tol)
    if not isinstance(post, Instance):
        return float(np.sqrt(len(before)))
    _, after = brute_kernel(post, cap, tol)
    lifted = [lift_dense(v, sorted(post.qubits), [event])[0] for v in after]
    if not before or not lifted:
        return float(np.sqrt(len(before) + len(lifted)))
    return span_distance(before, lifted, tol)


def graph_kernel_distance(before, after, n: int, tol: Tolerance = DEFAULT_TOL,
                          cap: int = ORACLE_MAX_QUBITS) -> float:
    """Span distance between the kernels of two interaction graphs on the same vertices."""
    _, a = brute_kernel(before.to_instance(n, tol), cap, tol)
    _, b = brute_kernel(after.to_instance(n, tol), cap, tol)
    if not a or not b:
        return float(np.sqrt(len(a) + len(b)))
    return span_distance(a, b, tol)
