"""Quantum 2-SAT: decide satisfiability, count the ground space exactly and
describe it as isometry trees over a product span."""

from .errors import InvalidInputError, ParseError, PreconditionError, Q2SatError, ResourceLimitError
from .instance import (
    Instance,
    gen_chain,
    gen_dressed_symmetric,
    gen_from_2cnf,
    gen_loop,
    gen_quasi_loop,
    gen_random_entangled,
    gen_random_mixed,
    gen_random_product,
    gen_singlet_star,
    normalize,
    read_instance,
    write_instance,
)
from .numerics import DEFAULT_TOL, Tolerance
from .oracle import brute_kernel, check_solution, count_2cnf
from .pipeline import BASIS, COUNT, DECIDE, count, decide, solve
from .reduction import FRUSTRATED, SATISFIABLE, Verdict
from .ttn import GroundSpaceDescription, materialize

__version__ = "0.1.0"

__all__ = [
    "BASIS", "COUNT", "DECIDE", "DEFAULT_TOL", "FRUSTRATED", "GroundSpaceDescription",
    "Instance", "InvalidInputError", "ParseError", "PreconditionError", "Q2SatError",
    "ResourceLimitError", "SATISFIABLE", "Tolerance", "Verdict", "brute_kernel",
    "check_solution", "count", "count_2cnf", "decide", "gen_chain", "gen_dressed_symmetric",
    "gen_from_2cnf", "gen_loop", "gen_quasi_loop", "gen_random_entangled", "gen_random_mixed",
    "gen_random_product", "gen_singlet_star", "materialize", "normalize", "read_instance",
    "solve", "write_instance",
]
