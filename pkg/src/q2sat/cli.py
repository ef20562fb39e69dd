"""Command-line front end.

Exit codes: 0 success / satisfiable / check passed, 1 frustrated / check
failed, 2 usage or input error, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import instance as inst_mod
from . import ttn
from .errors import InvalidInputError, ParseError, PreconditionError, ResourceLimitError
from .graphsimplify import InteractionGraph, slide
from .numerics import Tolerance
from .oracle import ORACLE_MAX_QUBITS, check_states
from .pipeline import BASIS, COUNT, DECIDE, solve
from .reduction import SATISFIABLE

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


def _tolerance(args) -> Tolerance:
    return Tolerance(
        eps_rank=args.eps_rank,
        eps_span=getattr(args, "tol", None) or Tolerance.eps_span,
        eps_residual=getattr(args, "residual_tol", None) or Tolerance.eps_residual,
    )


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_solve(args) -> int:
    tol = _tolerance(args)
    inst = inst_mod.read_instance(args.file, tol)
    if args.basis or args.materialize:
        mode = BASIS(args.max_dim)
    elif args.count:
        mode = COUNT
    else:
        mode = DECIDE
    desc = solve(inst, mode, tol)
    data = ttn.to_json_dict(desc)
    if args.materialize and desc.leaf_basis is not None:
        data["materialized"] = [[[float(z.real), float(z.imag)] for z in v]
                                for v in ttn.materialize(desc, args.max_qubits)]
    if args.output:
        Path(args.output).write_text(json.dumps(data, sort_keys=True, indent=1) + "\n")
    dim = "" if desc.dimension is None else f" dim={desc.dimension}"
    print(f"{desc.verdict.value}{dim}")
    for w in desc.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK if desc.verdict is SATISFIABLE else EXIT_FAIL


def _corrupt(states: list[np.ndarray], n: int, seed: int) -> list[np.ndarray]:
    """Negative control: push the first state off the ground space."""
    rng = np.random.default_rng(seed)
    noise = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    if not states:
        return [noise / np.linalg.norm(noise)]
    bad = states[0] + 0.1 * noise / np.linalg.norm(noise)
    return [bad / np.linalg.norm(bad)] + states[1:]


def cmd_check(args) -> int:
    tol = _tolerance(args)
    inst = inst_mod.read_instance(args.file, tol)
    if inst.n > ORACLE_MAX_QUBITS:
        raise ResourceLimitError(f"oracle limited to {ORACLE_MAX_QUBITS} qubits, instance has {inst.n}")
    desc = solve(inst, BASIS(args.max_dim), tol)
    states = ttn.materialize(desc, ORACLE_MAX_QUBITS) if desc.dimension else []
    if args.corrupt:
        states = _corrupt(states, inst.n, args.seed)
    report = check_states(inst, desc.dimension, states, tol)
    print(report.table())
    return EXIT_OK if report.passed else EXIT_FAIL


def read_dimacs(text: str) -> tuple[list[tuple[int, int]], int]:
    """Parse DIMACS CNF where every clause has exactly two literals."""
    n = None
    clauses, current = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith(("c", "%")):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("malformed problem line", f"line {lineno}")
            n = int(parts[2])
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", f"line {lineno}") from None
            if lit == 0:
                if len(current) != 2:
                    raise ParseError(f"clause has {len(current)} literals, need exactly 2", f"line {lineno}")
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if current:
        raise ParseError("last clause is not terminated by 0", "end of file")
    if n is None:
        n = max((abs(l) for c in clauses for l in c), default=0)
    return clauses, n


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise InvalidInputError(f"family {args.family!r} needs --{name}")


def cmd_gen(args) -> int:
    fam = args.family
    if fam in ("chain", "loop", "quasiloop"):
        _need(args, "k")
        gen = {"chain": inst_mod.gen_chain, "loop": inst_mod.gen_loop,
               "quasiloop": inst_mod.gen_quasi_loop}[fam]
        inst = gen(args.k)
    elif fam == "star":
        _need(args, "n")
        inst = inst_mod.gen_singlet_star(args.n)
    elif fam == "dressed":
        _need(args, "n")
        inst = inst_mod.gen_dressed_symmetric(args.n, args.seed)
    elif fam in ("random-product", "random-entangled"):
        _need(args, "n")
        m = args.m if args.m is not None else args.n
        gen = inst_mod.gen_random_product if fam == "random-product" else inst_mod.gen_random_entangled
        inst = gen(args.n, m, args.seed)
    else:
        if args.file:
            clauses, n = read_dimacs(Path(args.file).read_text())
        else:
            _need(args, "n")
            n = args.n
            clauses = inst_mod.random_2cnf(n, args.m if args.m is not None else n, args.seed)
        inst = inst_mod.gen_from_2cnf(clauses, n)
    _emit(inst_mod.dumps_instance(inst), args.output)
    return EXIT_OK


def cmd_slide(args) -> int:
    tol = _tolerance(args)
    inst = inst_mod.read_instance(args.file, tol)
    if not inst.is_homogeneous() or inst.units:
        raise PreconditionError("slide needs a homogeneous instance without unit constraints")
    before = InteractionGraph.from_instance(inst, tol)
    after = slide(before, args.x, args.y, args.r, tol)
    payload = {
        "before": inst_mod.to_json_dict(before.to_instance(inst.n, tol)),
        "after": inst_mod.to_json_dict(after.to_instance(inst.n, tol)),
        "dot_before": before.to_dot(tol),
        "dot_after": after.to_dot(tol),
    }
    _emit(json.dumps(payload, indent=1), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="q2sat", description="Quantum 2-SAT solver and ground-space counter.")
    parser.add_argument("--eps-rank", type=float, default=Tolerance.eps_rank,
                        help="relative singular-value cutoff for rank decisions")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="decide, count or describe the ground space")
    p.add_argument("file")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--count", action="store_true", help="compute the exact dimension")
    group.add_argument("--basis", action="store_true", help="emit a product-span basis")
    p.add_argument("--materialize", action="store_true", help="include dense ground states (implies --basis)")
    p.add_argument("--max-dim", type=int, default=4096, help="basis size cap")
    p.add_argument("--max-qubits", type=int, default=ttn.MATERIALIZE_CAP, help="materialization cap")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="compare the solver against the brute-force oracle")
    p.add_argument("file")
    p.add_argument("--tol", type=float, help="span-distance tolerance")
    p.add_argument("--residual-tol", type=float, help="per-constraint residual tolerance")
    p.add_argument("--max-dim", type=int, default=4096)
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="write a generated instance as JSON")
    p.add_argument("family", choices=["chain", "loop", "quasiloop", "star", "dressed",
                                      "random-product", "random-entangled", "cnf"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int, help="number of constraints for random families")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--file", help="DIMACS 2-CNF input for the cnf family")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("slide", help="slide the constraint on {x,r} across the solid edge {x,y}")
    p.add_argument("file")
    p.add_argument("x", type=int)
    p.add_argument("y", type=int)
    p.add_argument("r", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_slide)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidInputError, PreconditionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
