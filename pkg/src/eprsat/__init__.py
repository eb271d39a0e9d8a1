"""Satisfiability and model building for function-free first-order clauses.

The solver decides finite-domain clause sets by building a candidate model
out of constrained literals, learning a new clause at every conflict, and
backjumping; a brute-force ground oracle ships alongside for differential
checking.
"""

from .constrained import CLit, conjunction, difference, elim_free_vars, is_empty
from .constraints import BOT, TOP, Constraint, normalize
from .oracle import brute_sat, gen_benchmark, gen_random_instance, verify_model
from .parser import parse_problem
from .solver import RunConfig, Solver, Verdict
from .syntax import Clause, Lit, Signature

__all__ = [
    "BOT",
    "CLit",
    "Clause",
    "Constraint",
    "Lit",
    "RunConfig",
    "Signature",
    "Solver",
    "TOP",
    "Verdict",
    "brute_sat",
    "conjunction",
    "difference",
    "elim_free_vars",
    "gen_benchmark",
    "gen_random_instance",
    "is_empty",
    "normalize",
    "parse_problem",
    "verify_model",
]
