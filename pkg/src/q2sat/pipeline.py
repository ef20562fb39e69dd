"""End-to-end solver: reduce, simplify, solve the dashed backbone, add tails."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

from .dashedsolver import DEFAULT_BASIS_CAP, solve_dashed
from .errors import ResourceLimitError
from .graphsimplify import Collision, InteractionGraph, simplify
from .instance import Instance
from .numerics import DEFAULT_TOL, Tolerance
from .reduction import FRUSTRATED, SATISFIABLE, ReductionLog, reduce_to_homogeneous
from .tails import backbone_graph, solve_with_tails, tail_factor_maps, tail_to_chain
from .ttn import GroundSpaceDescription, TTNForest


class Mode(enum.Enum):
    DECIDE = "decide"
    COUNT = "count"
    BASIS = "basis"


@dataclass(frozen=True)
class SolveMode:
    kind: Mode = Mode.COUNT
    max_dimension: int = DEFAULT_BASIS_CAP

    def __post_init__(self):
        if self.kind is Mode.BASIS and self.max_dimension < 1:
            raise ValueError("BASIS cap must be at least 1")


DECIDE = SolveMode(Mode.DECIDE)
COUNT = SolveMode(Mode.COUNT)


def BASIS(max_dimension: int = DEFAULT_BASIS_CAP) -> SolveMode:
    return SolveMode(Mode.BASIS, max_dimension)


StageHook = Callable[[str, object], None]


def solve(inst: Instance, mode: SolveMode = COUNT, tol: Tolerance = DEFAULT_TOL,
          on_event=None, on_stage: StageHook | None = None,
          simplify_trace: list | None = None) -> GroundSpaceDescription:
    """Solve a normalized instance.

    ``on_event(event, pre, post)`` sees every reduction rewrite,
    ``on_stage(label, instance)`` the instance at each stage boundary, and
    ``simplify_trace`` collects every simplification step.
    """
    n = inst.n
    log = ReductionLog(next_id=max(n, max(inst.qubits, default=-1) + 1))
    current = inst.copy()
    warnings: list[str] = []

    def frustrated() -> GroundSpaceDescription:
        return GroundSpaceDescription(FRUSTRATED, 0, TTNForest(n, list(log.events)),
                                      [] if mode.kind is Mode.BASIS else None,
                                      warnings=warnings)

    while True:
        before = current.num_active
        current, log = reduce_to_homogeneous(current, log, tol, on_event)
        if current is FRUSTRATED:
            return frustrated()
        if on_stage:
            on_stage("homogeneous", current)
        result = simplify(InteractionGraph.from_instance(current, tol), tol, simplify_trace)
        warnings.extend(w for w in result.warnings if w not in warnings)
        if not isinstance(result, Collision):
            break
        current = result.graph.to_instance(n, tol)
        if on_stage:
            on_stage("collision", current)
        # a collision stacks independent constraints, so the next reduction merges qubits
        assert current.num_active <= before
    sg = result
    leaves = tuple(sorted(current.qubits))
    chain = tail_to_chain(sg, tol)
    counted = solve_dashed(chain, want_basis=False, tol=tol, decide=mode.kind is Mode.DECIDE)
    dimension = counted.dimension
    forest = TTNForest(n, list(log.events), {}, leaves)
    verdict = SATISFIABLE if dimension > 0 else FRUSTRATED
    if mode.kind is Mode.DECIDE:
        dimension = None if dimension > 0 else 0
        return GroundSpaceDescription(verdict, dimension, forest, None, counted.tree, warnings)
    if mode.kind is Mode.COUNT:
        return GroundSpaceDescription(verdict, dimension, forest, None, counted.tree, warnings)

    if dimension > mode.max_dimension:
        raise ResourceLimitError(
            f"ground-space dimension {dimension} exceeds basis cap {mode.max_dimension}",
            dimension=dimension)
    conflicts: list = []
    if sg.tails:
        basis = solve_with_tails(backbone_graph(sg), sg.tails, tol, mode.max_dimension)
        for tail in sg.tails:
            forest.frames.update(tail_factor_maps(tail))
    else:
        sol = solve_dashed(backbone_graph(sg), want_basis=True, tol=tol, cap=mode.max_dimension)
        basis = sol.basis
        forest.frames.update(sol.frames)
        conflicts = sol.frame_conflicts
    assert len(basis) == dimension, (
        f"tail extension produced {len(basis)} states, counting gave {dimension}")
    return GroundSpaceDescription(verdict, dimension, forest, basis, counted.tree, warnings, conflicts)


def decide(inst: Instance, tol: Tolerance = DEFAULT_TOL):
    return solve(inst, DECIDE, tol).verdict


def count(inst: Instance, tol: Tolerance = DEFAULT_TOL) -> int:
    return solve(inst, COUNT, tol).dimension
