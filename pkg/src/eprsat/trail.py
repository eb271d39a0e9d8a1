"""The trail: annotated constrained closures defining a partial model.

Entries are decisions (integer level annotation, empty closure) or deduced
literals (annotated with the clause that implied them plus the producing
substitution).  Strong consistency -- pairwise disjoint atom covers -- is an
invariant the solver maintains and the auditor re-checks.  The trail also
induces the ordering used for redundancy: atoms compare by the position of
their defining entry (undefined atoms maximal), ties broken by a fixed base
order, lifted to literals and, by multiset extension, to clauses.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .constrained import CLit, cover
from .constraints import Constraint, lvars, violates
from .syntax import (
    Clause,
    Lit,
    Subst,
    apply_clause,
    clause_vars,
    ground_assignments,
    match_args,
)

TRUE, FALSE, UNDEF = 1, -1, 0


@dataclass
class TrailEntry:
    lit: Lit                     # the instantiated literal on the trail
    pi: Constraint
    level: int
    pos: int
    reason: Optional[int] = None      # clause index; None for decisions
    reason_lit: int = -1              # index of the propagated literal
    sigma: Subst = field(default_factory=dict)  # over the reason clause vars

    @property
    def is_decision(self) -> bool:
        return self.reason is None

    @property
    def clit(self) -> CLit:
        return CLit(self.lit, self.pi)


class Trail:
    """Single-owner mutable sequence of entries with per-predicate buckets."""

    def __init__(self, n: int):
        self.n = n                    # domain size
        self.entries: list[TrailEntry] = []
        self._buckets: dict[str, list[TrailEntry]] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def level(self) -> int:
        for e in reversed(self.entries):
            if e.is_decision:
                return e.level
        return 0

    def for_pred(self, pred: str) -> list[TrailEntry]:
        return self._buckets.get(pred, [])

    def push(self, entry: TrailEntry) -> None:
        entry.pos = len(self.entries)
        self.entries.append(entry)
        self._buckets.setdefault(entry.lit.pred, []).append(entry)

    def pop(self) -> TrailEntry:
        e = self.entries.pop()
        self._buckets[e.lit.pred].remove(e)
        return e

    def truncate(self, length: int) -> list[TrailEntry]:
        removed = []
        while len(self.entries) > length:
            removed.append(self.pop())
        return removed

    def prefix_entries(self, length: int) -> list[TrailEntry]:
        return self.entries[:length]

    def level_prefix_len(self, lvl: int) -> int:
        """Entries up to (excluding) the first decision above `lvl`."""
        for i, e in enumerate(self.entries):
            if e.is_decision and e.level > lvl:
                return i
        return len(self.entries)

    # -- truth values -------------------------------------------------------

    def defining_entry(self, atom: Lit, upto: Optional[int] = None) -> Optional[TrailEntry]:
        """The entry covering this ground atom, if any (strong consistency
        makes it unique)."""
        limit = len(self.entries) if upto is None else upto
        for e in self.for_pred(atom.pred):
            if e.pos >= limit:
                continue
            d = match_args(e.lit.args, atom.args)
            if d is not None and not violates(d, e.pi):
                return e
        return None

    def value_of(self, lit: Lit, upto: Optional[int] = None) -> int:
        e = self.defining_entry(lit.atom, upto)
        if e is None:
            return UNDEF
        return TRUE if e.lit.neg == lit.neg else FALSE

    def level_of(self, lit: Lit) -> int:
        e = self.defining_entry(lit.atom)
        assert e is not None, "level_of on an undefined literal"
        return e.level

    def induced_interpretation(self) -> set[Lit]:
        out: set[Lit] = set()
        for e in self.entries:
            if not e.lit.neg:
                out |= cover(e.lit, e.pi, self.n)
        return out


# ---------------------------------------------------------------------------
# constrained-clause truth value, assertiveness

def clause_instances(clause: Clause, sigma: Subst, pi: Constraint, n: int,
                     ) -> list[Clause]:
    """Ground instances of (clause*sigma; pi); free lhs vars existential."""
    base = apply_clause(clause, sigma)
    vs = clause_vars(base)
    extra = [v for v in lvars(pi) if v not in vs]
    out: list[Clause] = []
    seen = set()
    for d in ground_assignments(vs + extra, n):
        if violates(d, pi):
            continue
        g = apply_clause(base, d)
        if g not in seen:
            seen.add(g)
            out.append(g)
    return out


def clause_value(trail: Trail, clause: Clause, sigma: Subst, pi: Constraint,
                 upto: Optional[int] = None) -> int:
    """FALSE iff every covered instance is false; TRUE iff every one true."""
    insts = clause_instances(clause, sigma, pi, trail.n)
    if not insts:
        return UNDEF
    all_false = all_true = True
    for g in insts:
        vals = [trail.value_of(l, upto) for l in g]
        if not any(v == TRUE for v in vals):
            all_true = False
        if not all(v == FALSE for v in vals):
            all_false = False
        if not all_true and not all_false:
            return UNDEF
    return FALSE if all_false else TRUE


def is_assertive(trail: Trail, clause: Clause, sigma: Subst, pi: Constraint) -> bool:
    """Some covered ground instance is false with exactly one top-level literal."""
    top = trail.level
    for g in clause_instances(clause, sigma, pi, trail.n):
        vals = [trail.value_of(l) for l in g]
        if any(v != FALSE for v in vals):
            continue
        at_top = sum(1 for l in g if trail.level_of(l) == top)
        if at_top == 1:
            return True
    return False


# ---------------------------------------------------------------------------
# induced ordering

_INF = 1 << 60


@dataclass(frozen=True)
class InducedOrdering:
    """Snapshot ordering: trail position of the defining entry, then a fixed
    base order (predicate name, argument indices; negative above positive)."""

    entries: tuple[tuple[Lit, Constraint, int], ...]  # (lit, pi, pos)

    @staticmethod
    def from_trail(trail: Trail) -> "InducedOrdering":
        return InducedOrdering(tuple((e.lit, e.pi, e.pos) for e in trail.entries))

    def def_pos(self, atom: Lit) -> int:
        """Position of the defining entry; maximal when undefined."""
        for lit, pi, pos in self.entries:
            if lit.pred != atom.pred:
                continue
            d = match_args(lit.args, atom.args)
            if d is None:
                continue
            if not violates(d, pi):
                return pos
        return _INF

    def atom_key(self, atom: Lit):
        return (self.def_pos(atom), atom.pred, atom.args)

    def lit_key(self, lit: Lit):
        # same atom: the negative literal is the bigger one
        return (self.def_pos(lit.atom), lit.pred, lit.args, lit.neg)

    def cmp_atoms(self, p: Lit, q: Lit) -> int:
        kp, kq = self.atom_key(p), self.atom_key(q)
        return -1 if kp < kq else (0 if kp == kq else 1)

    def cmp_lits(self, p: Lit, q: Lit) -> int:
        kp, kq = self.lit_key(p), self.lit_key(q)
        return -1 if kp < kq else (0 if kp == kq else 1)

    def _abstract_clause(self, c: Clause):
        return sorted(((self.def_pos(l.atom), l.neg) for l in c), reverse=True)

    def _lit_multiset_key(self, c: Clause):
        return sorted((self.lit_key(l) for l in c), reverse=True)

    def cmp_clauses(self, c1: Clause, c2: Clause) -> int:
        a1, a2 = self._abstract_clause(c1), self._abstract_clause(c2)
        if a1 != a2:
            return -1 if _mul_less(a1, a2) else 1
        k1, k2 = self._lit_multiset_key(c1), self._lit_multiset_key(c2)
        if k1 == k2:
            return 0
        return -1 if _mul_less(k1, k2) else 1


def _mul_less(d1: list, d2: list) -> bool:
    """Multiset extension of a total order, on descending-sorted keys."""
    i = 0
    while i < len(d1) and i < len(d2):
        if d1[i] != d2[i]:
            return d1[i] < d2[i]
        i += 1
    return len(d1) < len(d2)
