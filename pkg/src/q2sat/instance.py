"""Problem data model: two-qubit projector blocks, single-qubit constraints,
normalization, JSON serialization and instance generators.

Basis convention everywhere: a block on pair ``(a, b)`` with ``a < b`` stores
vectors in C^4 ordered |00>, |01>, |10>, |11> with qubit ``a`` the left factor.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError, ParseError
from .numerics import (
    DEFAULT_TOL,
    SINGLET,
    Tolerance,
    as_vector,
    canonical_phase,
    condition_number,
    orthonormalize,
    span_distance,
    swap_factors,
)

Pair = tuple[int, int]


@dataclass
class Instance:
    """A quantum 2-SAT instance.

    ``blocks`` maps an ordered pair ``(a, b)``, ``a < b``, to an ``(r, 4)``
    array whose rows are orthonormal constraint vectors (the forbidden
    two-qubit states). ``units`` maps a qubit to a ``(k, 2)`` array of
    orthonormal forbidden single-qubit states. ``qubits`` is the active
    qubit set; it starts as ``range(n)`` and changes as the reduction pipeline
    fixes or merges qubits (merged qubits get fresh ids ``>= n``).
    """

    n: int
    blocks: dict[Pair, np.ndarray] = field(default_factory=dict)
    units: dict[int, np.ndarray] = field(default_factory=dict)
    qubits: frozenset[int] | None = None

    def __post_init__(self):
        if self.qubits is None:
            self.qubits = frozenset(range(self.n))
        else:
            self.qubits = frozenset(self.qubits)

    def copy(self) -> "Instance":
        return Instance(
            self.n,
            {k: v.copy() for k, v in self.blocks.items()},
            {k: v.copy() for k, v in self.units.items()},
            self.qubits,
        )

    @property
    def num_active(self) -> int:
        return len(self.qubits)

    def rank(self, pair: Pair) -> int:
        return len(self.blocks[pair])

    def pairs_touching(self, q: int) -> list[Pair]:
        return sorted(p for p in self.blocks if q in p)

    def is_homogeneous(self) -> bool:
        return not self.units and all(len(v) == 1 for v in self.blocks.values())

    def constraint_list(self) -> list[tuple[tuple[int, ...], np.ndarray]]:
        """All constraints as ``(qubits, vector)`` in a deterministic order."""
        out = []
        for pair in sorted(self.blocks):
            for v in self.blocks[pair]:
                out.append((pair, v))
        for q in sorted(self.units):
            for v in self.units[q]:
                out.append(((q,), v))
        return out


def oriented(pair: Sequence[int], vec: np.ndarray) -> tuple[Pair, np.ndarray]:
    """Return ``((a, b), v)`` with ``a < b``, swapping tensor factors if needed."""
    x, y = int(pair[0]), int(pair[1])
    if x == y:
        raise InvalidInputError(f"pair ({x}, {y}) names the same qubit twice")
    if x < y:
        return (x, y), vec
    return (y, x), swap_factors(vec)


def add_block_vectors(inst: Instance, pair: Pair, vectors, tol: Tolerance = DEFAULT_TOL) -> None:
    """Merge vectors into the block on ``pair`` (in place), keeping rows orthonormal."""
    existing = list(inst.blocks.get(pair, ()))
    merged = orthonormalize(existing + [as_vector(v) for v in vectors], tol)
    if merged:
        inst.blocks[pair] = np.array([canonical_phase(v, tol) for v in merged])


def add_unit_vectors(inst: Instance, q: int, vectors, tol: Tolerance = DEFAULT_TOL) -> None:
    existing = list(inst.units.get(q, ()))
    merged = orthonormalize(existing + [as_vector(v) for v in vectors], tol)
    if merged:
        inst.units[q] = np.array([canonical_phase(v, tol) for v in merged])


def normalize(raw, n: int, raw_units=(), tol: Tolerance = DEFAULT_TOL) -> Instance:
    """Group raw ``(pair, vector)`` constraints into orthonormal projector blocks."""
    inst = Instance(int(n))
    if inst.n < 0:
        raise InvalidInputError("qubit count must be nonnegative")
    grouped: dict[Pair, list[np.ndarray]] = {}
    for pair, vec in raw:
        if len(pair) != 2:
            raise InvalidInputError(f"constraint must name two qubits, got {pair!r}")
        for q in pair:
            if not 0 <= int(q) < inst.n:
                raise InvalidInputError(f"qubit index {q} out of range [0, {inst.n})")
        vec = as_vector(vec)
        if vec.shape != (4,):
            raise InvalidInputError(f"two-qubit constraint needs 4 entries, got {vec.shape[0]}")
        if np.linalg.norm(vec) == 0.0:
            raise InvalidInputError(f"zero constraint vector on pair {tuple(pair)}")
        key, vec = oriented(pair, vec)
        grouped.setdefault(key, []).append(vec)
    for key in sorted(grouped):
        add_block_vectors(inst, key, grouped[key], tol)
    for q, vec in raw_units:
        if not 0 <= int(q) < inst.n:
            raise InvalidInputError(f"qubit index {q} out of range [0, {inst.n})")
        vec = as_vector(vec)
        if vec.shape != (2,):
            raise InvalidInputError(f"unit constraint needs 2 entries, got {vec.shape[0]}")
        if np.linalg.norm(vec) == 0.0:
            raise InvalidInputError(f"zero unit constraint on qubit {q}")
        add_unit_vectors(inst, int(q), [vec], tol)
    return inst


def instances_equal(a: Instance, b: Instance, tol: Tolerance = DEFAULT_TOL) -> bool:
    if a.n != b.n or a.qubits != b.qubits:
        return False
    if set(a.blocks) != set(b.blocks) or set(a.units) != set(b.units):
        return False
    for k in a.blocks:
        if span_distance(a.blocks[k], b.blocks[k], tol) > tol.eps_span:
            return False
    for k in a.units:
        if span_distance(a.units[k], b.units[k], tol) > tol.eps_span:
            return False
    return True


_PRODUCT_CUTOFF = 1e-9


def _edge_direction(inst: Instance, at: int, other: int) -> np.ndarray:
    """Single-qubit direction at ``at`` of the rank-1 product block on {at, other}."""
    pair = (min(at, other), max(at, other))
    if pair not in inst.blocks or len(inst.blocks[pair]) != 1:
        raise InvalidInputError(f"no rank-1 block on {pair}")
    u, s, vh = np.linalg.svd(inst.blocks[pair][0].reshape(2, 2))
    if s[1] > _PRODUCT_CUTOFF * s[0]:
        raise InvalidInputError(f"block on {pair} is entangled")
    return u[:, 0] if at == pair[0] else vh[0].conj()


def alternation_defects(inst: Instance, walk: Sequence[int], closed: bool = False,
                        margin: float = 1e-9) -> list[int]:
    """Vertices on a dashed path (or cycle) whose two incident directions coincide.

    A vertex passes when ``|<u|v>| < 1 - margin`` for the directions ``u``,
    ``v`` of its two walk edges. An empty result means the walk alternates.
    """
    walk = list(walk)
    k = len(walk)
    inner = range(k) if closed else range(1, k - 1)
    bad = []
    for i in inner:
        v = walk[i]
        u1 = _edge_direction(inst, v, walk[i - 1])
        u2 = _edge_direction(inst, v, walk[(i + 1) % k])
        if abs(np.vdot(u1, u2)) >= 1.0 - margin:
            bad.append(v)
    return bad


# --- serialization --------------------------------------------------------

def _encode_vec(v) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in v]


def to_json_dict(inst: Instance) -> dict:
    if inst.qubits != frozenset(range(inst.n)):
        raise InvalidInputError("only instances over qubits 0..n-1 can be serialized")
    return {
        "n": inst.n,
        "constraints": [
            {"qubits": [a, b], "vectors": [_encode_vec(v) for v in inst.blocks[(a, b)]]}
            for a, b in sorted(inst.blocks)
        ],
        "units": [
            {"qubit": q, "vector": _encode_vec(v)}
            for q in sorted(inst.units)
            for v in inst.units[q]
        ],
    }


def _decode_vec(raw, length: int, context: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != length:
        raise ParseError(f"expected a list of {length} [re, im] pairs", context)
    out = []
    for i, z in enumerate(raw):
        if (
            not isinstance(z, list)
            or len(z) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in z)
        ):
            raise ParseError("complex entry must be [re, im]", f"{context}[{i}]")
        out.append(complex(z[0], z[1]))
    v = np.array(out, dtype=complex)
    if not np.all(np.isfinite(v)):
        raise ParseError("non-finite entry", context)
    if np.linalg.norm(v) == 0.0:
        raise ParseError("zero constraint vector", context)
    return v


def _check_keys(obj, allowed: set, required: set, context: str) -> None:
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", context)
    unknown = set(obj) - allowed
    if unknown:
        raise ParseError(f"unknown field(s) {sorted(unknown)}", context)
    missing = required - set(obj)
    if missing:
        raise ParseError(f"missing field(s) {sorted(missing)}", context)


def from_json_dict(data, tol: Tolerance = DEFAULT_TOL) -> Instance:
    _check_keys(data, {"n", "constraints", "units"}, {"n", "constraints"}, "instance")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ParseError("n must be a nonnegative integer", "n")
    raw = []
    for i, c in enumerate(data["constraints"]):
        ctx = f"constraints[{i}]"
        _check_keys(c, {"qubits", "vectors"}, {"qubits", "vectors"}, ctx)
        qs = c["qubits"]
        if not (isinstance(qs, list) and len(qs) == 2 and all(isinstance(q, int) for q in qs)):
            raise ParseError("qubits must be two integers", f"{ctx}.qubits")
        for q in qs:
            if not 0 <= q < n:
                raise ParseError(f"qubit index {q} out of range [0, {n})", f"{ctx}.qubits")
        if qs[0] == qs[1]:
            raise ParseError("qubits must differ", f"{ctx}.qubits")
        if not isinstance(c["vectors"], list) or not c["vectors"]:
            raise ParseError("vectors must be a nonempty list", f"{ctx}.vectors")
        for j, v in enumerate(c["vectors"]):
            raw.append((tuple(qs), _decode_vec(v, 4, f"{ctx}.vectors[{j}]")))
    units = []
    for i, u in enumerate(data.get("units", [])):
        ctx = f"units[{i}]"
        _check_keys(u, {"qubit", "vector"}, {"qubit", "vector"}, ctx)
        q = u["qubit"]
        if not isinstance(q, int) or not 0 <= q < n:
            raise ParseError(f"qubit index {q!r} out of range [0, {n})", f"{ctx}.qubit")
        units.append((q, _decode_vec(u["vector"], 2, f"{ctx}.vector")))
    return normalize(raw, n, units, tol)


def dumps_instance(inst: Instance) -> str:
    return json.dumps(to_json_dict(inst), indent=1)


def write_instance(inst: Instance, path) -> None:
    Path(path).write_text(dumps_instance(inst) + "\n")


def read_instance(path, tol: Tolerance = DEFAULT_TOL) -> Instance:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    return from_json_dict(data, tol)


# --- generators -----------------------------------------------------------

def _product(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.kron(x, y)


_K0 = np.array([1, 0], dtype=complex)
_K1 = np.array([0, 1], dtype=complex)


def gen_chain(k: int) -> Instance:
    """Alternating chain: |1>_i |0>_{i+1} on every consecutive pair."""
    if k < 2:
        raise InvalidInputError("chain needs k >= 2")
    return normalize([((i, i + 1), _product(_K1, _K0)) for i in range(k - 1)], k)


def gen_loop(k: int) -> Instance:
    if k < 3:
        raise InvalidInputError("loop needs k >= 3")
    return normalize([((i, (i + 1) % k), _product(_K1, _K0)) for i in range(k)], k)


def gen_quasi_loop(k: int) -> Instance:
    """Loop whose vertex 0 sees direction |1> on both incident edges."""
    if k < 3:
        raise InvalidInputError("quasi-loop needs k >= 3")
    raw = [((i, i + 1), _product(_K1, _K0)) for i in range(k - 1)]
    raw.append(((k - 1, 0), _product(_K1, _K1)))
    return normalize(raw, k)


def gen_singlet_star(n: int) -> Instance:
    if n < 2:
        raise InvalidInputError("singlet star needs n >= 2")
    return normalize([((0, i), SINGLET) for i in range(1, n)], n)


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_invertible(rng: np.random.Generator, max_cond: float = 1e3) -> np.ndarray:
    while True:
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        if condition_number(m) <= max_cond:
            return m


def random_connected_edges(rng: np.random.Generator, n: int, m: int) -> list[Pair]:
    """A random connected simple graph on ``n`` vertices with ``m`` edges.

    ``m`` is clipped to the range [n - 1, n(n - 1)/2].
    """
    if n < 2:
        return []
    m = max(n - 1, min(m, n * (n - 1) // 2))
    order = rng.permutation(n)
    edges = set()
    for i in range(1, n):
        j = int(rng.integers(i))
        a, b = int(order[i]), int(order[j])
        edges.add((min(a, b), max(a, b)))
    rest = [p for p in itertools.combinations(range(n), 2) if p not in edges]
    extra = rng.permutation(len(rest))[: m - len(edges)]
    edges.update(rest[int(i)] for i in extra)
    return sorted(edges)


def gen_dressed_symmetric(n: int, seed=0, operators=None) -> Instance:
    """Connected singlet graph dressed by per-qubit invertible operators.

    The ground space is the image of the n-qubit symmetric subspace under a
    product of invertible operators, so its dimension is exactly ``n + 1``.
    """
    if n < 2:
        raise InvalidInputError("dressed instance needs n >= 2")
    rng = np.random.default_rng(seed)
    if operators is None:
        operators = [random_invertible(rng) for _ in range(n)]
    elif len(operators) != n:
        raise InvalidInputError("need one operator per qubit")
    edges = random_connected_edges(rng, n, n)
    raw = []
    for a, b in edges:
        raw.append(((a, b), np.kron(operators[a], operators[b]) @ SINGLET))
    return normalize(raw, n)


def _literal(lit: int, n: int) -> tuple[int, int]:
    """DIMACS literal -> (variable, forbidden bit)."""
    if not isinstance(lit, (int, np.integer)) or lit == 0:
        raise InvalidInputError(f"bad literal {lit!r}")
    var = abs(int(lit)) - 1
    if var >= n:
        raise InvalidInputError(f"literal {lit} names variable beyond n={n}")
    return var, 0 if lit > 0 else 1


def gen_from_2cnf(clauses: Iterable[tuple[int, int]], n: int) -> Instance:
    """Embed a 2-CNF formula; literals use DIMACS convention (``+v`` / ``-v``, 1-based).

    Clause ``(l_a or l_b)`` forbids exactly one assignment of its two
    variables, which becomes a computational-basis product constraint.
    """
    raw = []
    for clause in clauses:
        if len(clause) != 2:
            raise InvalidInputError(f"clause {clause!r} does not have two literals")
        (va, xa), (vb, xb) = (_literal(l, n) for l in clause)
        if va == vb:
            raise InvalidInputError(f"clause {clause!r} uses one variable twice")
        basis = (_K0, _K1)
        raw.append(((va, vb), np.kron(basis[xa], basis[xb])))
    return normalize(raw, n)


def random_2cnf(n: int, m: int, seed=0) -> list[tuple[int, int]]:
    rng = np.random.default_rng(seed)
    clauses = []
    for _ in range(m):
        a, b = rng.choice(n, size=2, replace=False)
        sa, sb = rng.choice([-1, 1], size=2)
        clauses.append((int(sa * (a + 1)), int(sb * (b + 1))))
    return clauses


def gen_random_product(n: int, m: int, seed=0) -> Instance:
    """Random homogeneous instance of product constraints on a connected graph."""
    rng = np.random.default_rng(seed)
    raw = [((a, b), np.kron(random_state(rng, 2), random_state(rng, 2)))
           for a, b in random_connected_edges(rng, n, m)]
    return normalize(raw, n)


def gen_random_entangled(n: int, m: int, seed=0) -> Instance:
    rng = np.random.default_rng(seed)
    raw = [((a, b), random_state(rng, 4)) for a, b in random_connected_edges(rng, n, m)]
    return normalize(raw, n)


def gen_random_mixed(n: int, m: int, seed=0, p_product: float = 0.5,
                     rank_weights=(0.8, 0.15, 0.05)) -> Instance:
    """Random instance mixing product/entangled rank-1 blocks with rank-2/3 blocks.

    Edges are drawn on a random (not necessarily connected) graph; ranks follow
    ``rank_weights`` for ranks 1, 2, 3.
    """
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    m = min(m, len(pairs))
    chosen = [pairs[int(i)] for i in sorted(rng.permutation(len(pairs))[:m])]
    raw = []
    for pair in chosen:
        rank = int(rng.choice([1, 2, 3], p=np.asarray(rank_weights) / sum(rank_weights)))
        for _ in range(rank):
            if rng.random() < p_product:
                v = np.kron(random_state(rng, 2), random_state(rng, 2))
            else:
                v = random_state(rng, 4)
            raw.append((pair, v))
    return normalize(raw, n)
