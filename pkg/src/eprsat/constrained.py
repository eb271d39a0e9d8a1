"""Constrained literals and their three core operations.

A constrained literal pairs a literal with a normalized dismatching
constraint whose lhs variables all occur in the literal.  It denotes the set
of ground literals whose grounding solves the constraint.  Conjunction
intersects two covers, difference subtracts them (as a set of disjoint
pieces), emptiness asks whether the cover is empty.  Closures arising during
solving may carry extra "free" lhs variables; those are existential and get
eliminated by instantiation before a literal is ever placed on the trail.
"""
from __future__ import annotations

from dataclasses import dataclass


from .constraints import (
    BOT,
    TOP,
    Constraint,
    apply_constraint,
    conj,
    find_solution_enum,
    lvars,
    normalize,
    rename_constraint,
    rename_rhs_fresh,
    rvars,
    violates,
)
from .syntax import (
    Lit,
    Subst,
    apply_lit,
    compose,
    ground_assignments,
    lit_vars,
    mgu_atoms,
    renaming_for,
)


@dataclass(frozen=True)
class CLit:
    """Literal plus normalized constraint; lhs variables live in the literal."""

    lit: Lit
    pi: Constraint

    def __post_init__(self) -> None:
        if __debug__:
            lv = set(lvars(self.pi))
            assert lv <= set(lit_vars(self.lit)), "free lhs variable in CLit"
            assert not (set(rvars(self.pi)) & set(lit_vars(self.lit)))

    @property
    def atom(self) -> "CLit":
        return CLit(self.lit.atom, self.pi) if self.lit.neg else self


def make_clit(lit: Lit, pi: Constraint) -> CLit:
    return CLit(lit, normalize(pi))


def rename_clit_fresh(lit: Lit, pi: Constraint) -> tuple[Lit, Constraint, Subst]:
    """Whole-expression variant with fresh variables; returns the renaming."""
    ren = renaming_for(lit_vars(lit) + lvars(pi) + rvars(pi))
    return apply_lit(lit, ren), rename_constraint(pi, ren), ren


def free_lvars(lit: Lit, pi: Constraint) -> list[int]:
    lv = lit_vars(lit)
    return [v for v in lvars(pi) if v not in lv]


# ---------------------------------------------------------------------------
# semantics

def cover(lit: Lit, pi: Constraint, n: int) -> set[Lit]:
    """Gnd: ground instances of `lit` whose grounding solves `pi`.

    Extra lhs variables of `pi` are treated existentially.
    """
    vs = lit_vars(lit)
    extra = [v for v in lvars(pi) if v not in vs]
    out: set[Lit] = set()
    for d in ground_assignments(vs + extra, n):
        if not violates(d, pi):
            out.add(apply_lit(lit, d))
    return out


def clit_cover(cl: CLit, n: int) -> set[Lit]:
    return cover(cl.lit, cl.pi, n)


def is_empty(lit: Lit, pi: Constraint, n: int) -> bool:
    """True iff the cover is empty (enumeration-based satisfiability)."""
    if pi.is_bot:
        return True
    vs = lit_vars(lit)
    extra = [v for v in lvars(pi) if v not in vs]
    return find_solution_enum(pi, vs + extra, n) is None


def clit_is_empty(cl: CLit, n: int) -> bool:
    return is_empty(cl.lit, cl.pi, n)


# ---------------------------------------------------------------------------
# conjunction

def conjunction(a: CLit, b: CLit) -> CLit:
    """Cover intersection; operands are renamed apart first."""
    lit_b, pi_b, _ = rename_clit_fresh(b.lit, b.pi)
    pi_a = rename_rhs_fresh(a.pi)
    if a.lit.neg != lit_b.neg:
        return CLit(a.lit, BOT)
    sigma = mgu_atoms(a.lit.atom, lit_b.atom)
    if sigma is None:
        return CLit(a.lit, BOT)
    lit = apply_lit(a.lit, sigma)
    pi = normalize(_and(apply_constraint(pi_a, sigma), apply_constraint(pi_b, sigma)))
    return CLit(lit, pi)


def _and(a: Constraint, b: Constraint) -> Constraint:
    if a.is_bot or b.is_bot:
        return BOT
    subs = (a.subs if a.kind == "and" else ()) + (b.subs if b.kind == "and" else ())
    return conj(subs)


def overlaps(a: CLit, b: CLit, n: int) -> bool:
    """Do the atom covers of a and b share a ground atom?"""
    if a.lit.pred != b.lit.pred:
        return False
    c = conjunction(a.atom, b.atom)
    return not clit_is_empty(c, n)


# ---------------------------------------------------------------------------
# difference

def diff_pairs(lit1: Lit, pi1: Constraint, lit2: Lit, pi2: Constraint,
               ) -> list[tuple[Subst, Constraint]]:
    """Difference of atom covers as disjoint pieces (tau, pi).

    Each piece denotes (lit1*tau; pi); together they cover
    Gnd(lit1; pi1) minus Gnd(lit2; pi2).  Operand 2 must already be
    variable-disjoint from operand 1 (callers rename).  Polarity is the
    caller's business: only the atoms matter here.
    """
    sigma = mgu_atoms(lit1.atom, lit2.atom)
    if sigma is None:
        return [({}, pi1)]
    if lit1.atom == lit2.atom:
        return _diff_same(pi1, pi2)
    # distinct unifiable literals: keep the non-instances, recurse on common
    out: list[tuple[Subst, Constraint]] = []
    args = lit1.args
    ren = renaming_for([t for t in (sigma.get(a, a) for a in args) if t < 0])
    guard = (args, tuple(ren.get(sigma.get(a, a), sigma.get(a, a)) for a in args))
    keep = normalize(_and(pi1, conj([guard])))
    if not keep.is_bot:
        out.append(({}, keep))
    common_pi1 = normalize(apply_constraint(pi1, sigma))
    common_pi2 = normalize(apply_constraint(pi2, sigma))
    if not common_pi1.is_bot:
        for tau, pi in _diff_same(common_pi1, common_pi2):
            out.append((compose(sigma, tau), pi))
    return out


def _diff_same(pi1: Constraint, pi2: Constraint) -> list[tuple[Subst, Constraint]]:
    """Same-literal difference via the induced substitutions of pi2."""
    if pi2.is_top:
        return []
    if pi2.is_bot:
        return [({}, pi1)] if not pi1.is_bot else []
    out: list[tuple[Subst, Constraint]] = []
    etas = list(pi2.subs)
    for i, (lhs_i, rhs_i) in enumerate(etas):
        tau = dict(zip(lhs_i, rhs_i))
        parts = [apply_constraint(pi1, tau)]
        for lhs_j, rhs_j in etas[:i]:
            parts.append(apply_constraint(Constraint("and", ((lhs_j, rhs_j),)), tau))
        pi = normalize(_and_many(parts))
        if not pi.is_bot:
            out.append((tau, pi))
    return out


def _and_many(parts: list[Constraint]) -> Constraint:
    acc = TOP
    for p in parts:
        acc = _and(acc, p)
        if acc.is_bot:
            return BOT
    return acc


def difference(a: CLit, b: CLit) -> list[CLit]:
    """Cover difference of two constrained literals, as disjoint pieces."""
    if a.lit.neg != b.lit.neg:
        return [a]
    lit_b, pi_b, _ = rename_clit_fresh(b.lit, b.pi)
    pi_a = rename_rhs_fresh(a.pi)
    pieces = diff_pairs(a.lit, pi_a, lit_b, pi_b)
    return [CLit(apply_lit(a.lit, tau), pi) for tau, pi in pieces if not pi.is_bot]


# ---------------------------------------------------------------------------
# free-variable elimination

def elim_free_vars(lit: Lit, pi: Constraint, sigma: Subst, n: int,
                   ) -> list[tuple[Lit, Constraint, Subst]]:
    """Instantiate free lhs variables over the domain.

    Returns pieces (lit, pi, sigma') with no free lhs variables and non-BOT
    constraints; the producing substitution is extended alongside.  Pieces
    need not be disjoint.
    """
    pi = normalize(pi)
    if pi.is_bot:
        return []
    work = [(lit, pi, sigma)]
    done: list[tuple[Lit, Constraint, Subst]] = []
    while work:
        l, p, s = work.pop(0)
        free = free_lvars(l, p)
        if not free:
            done.append((l, p, s))
            continue
        x = min(free, key=lambda v: -v - 1)  # lowest variable id first
        for d in range(n):
            p2 = normalize(apply_constraint(p, {x: d}))
            if not p2.is_bot:
                work.append((apply_lit(l, {x: d}), p2, compose(s, {x: d})))
    return done
