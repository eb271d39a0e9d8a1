"""Runtime audits: the sound-state invariant and the regular-run properties.

The auditor hangs off the solver and re-derives, from first principles, what
each rule application was supposed to guarantee: strong consistency of the
trail, the per-entry propagation/decision conditions, falseness and
non-emptiness of conflict sets, the top-level-literal counts, the strict
decrease of the conflict-resolution measure, blocking of removed decisions
by case-(3) clauses, non-redundancy of every learned clause, and the model
property at success.  Violations are collected, not raised, so a test can
assert the list is empty.

Incremental schedule: pushes check the new entry against its prefix; each
resolution step checks the conflict set and the measure; Backjump and the
terminal rules trigger a full-trail sweep (including re-checking decisions
against the grown learned set).
"""
from __future__ import annotations

import functools
from typing import Optional

from .constrained import CLit, clit_is_empty, overlaps
from .derive import is_blocked
from .syntax import Clause, Signature, apply_clause, apply_lit, clause_vars
from .trail import FALSE, clause_instances, clause_value


class Auditor:
    def __init__(self, sig: Signature, clauses: list[Clause],
                 redundancy_ceiling: int = 24):
        self.sig = sig
        self.input_clauses = list(clauses)
        self.redundancy_ceiling = redundancy_ceiling
        self.violations: list[str] = []
        self.skipped: list[str] = []
        self._last_rules: list[str] = []
        self._measure: Optional[tuple[int, list[Clause]]] = None

    def _flag(self, msg: str) -> None:
        self.violations.append(msg)

    # -- hooks ----------------------------------------------------------------

    def after_rule(self, rule: str, solver) -> None:
        self._last_rules.append(rule)
        if rule == "Propagate":
            self._check_new_entry(solver, decision=False)
        elif rule == "Decide":
            self._check_new_entry(solver, decision=True)
        elif rule == "Conflict":
            self._check_conflict_set(solver, fresh=True)
            self._measure = self._measure_of(solver)
        elif rule in ("Skip", "Resolve", "Factorize"):
            self._check_conflict_set(solver, fresh=False)
            self._check_measure_decrease(rule, solver)
            self._check_immediate_conflict_factorize(rule)
        elif rule == "Backjump":
            self._full_sweep(solver)
            self._measure = None
        elif rule == "Success":
            self._full_sweep(solver)
        elif rule == "Failure":
            if not any(c == () for c in solver.pool):
                self._flag("Failure without the empty clause")

    def before_learn(self, solver, learned: Clause) -> None:
        from .oracle import check_nonredundant
        ordering = solver.conflict_ordering
        if ordering is None:
            self._flag("learning without a conflict snapshot")
            return
        got = check_nonredundant(learned, solver.pool, ordering, self.sig,
                                 ceiling=self.redundancy_ceiling)
        if got is None:
            self.skipped.append("non-redundancy check skipped (universe too big)")
        elif got is False:
            from .render import render_clause
            self._flag(f"learned clause is redundant: "
                       f"{render_clause(self.sig, learned)}")
        self._check_entailed_by_input(solver, learned)
        # a clause learned below a surviving decision must block it
        entry = solver.trail.entries[-1] if solver.trail.entries else None
        if entry is not None and entry.is_decision and learned != ():
            cs = solver.conflict
            from .trail import is_assertive
            if not is_assertive(solver.trail, cs.clause, cs.sigma, cs.pi):
                below = solver.trail.prefix_entries(len(solver.trail) - 1)
                probe = _PrefixTrail(solver.trail, len(solver.trail) - 1)
                wit = is_blocked(probe, entry.lit, entry.pi, [learned],
                                 solver.n)
                if wit is None:
                    self._flag("case-(3) clause does not block the removed decision")

    def at_success(self, solver) -> None:
        from .oracle import verify_model
        model = [CLit(e.lit, e.pi) for e in solver.trail.entries]
        ok, witness = verify_model(model, self.sig, self.input_clauses)
        if not ok:
            self._flag(f"success but the model misses an instance: {witness}")

    def _check_entailed_by_input(self, solver, learned: Clause) -> None:
        # sound-state item for the learned set: the inputs entail it
        from .oracle import DPLL_ATOM_CAP, OracleCeiling, _entails, ground_problem
        try:
            gp = ground_problem(self.sig, self.input_clauses,
                                ceiling=DPLL_ATOM_CAP)
        except OracleCeiling:
            self.skipped.append("entailment check skipped (universe too big)")
            return
        from .syntax import ground_assignments
        for d in ground_assignments(clause_vars(learned), self.sig.n):
            inst = apply_clause(learned, d)
            if not _entails(gp.ground_clauses, inst, self.sig):
                from .render import render_clause
                self._flag(f"learned clause not entailed by the input: "
                           f"{render_clause(self.sig, learned)}")
                return

    # -- entry checks -----------------------------------------------------------

    def _check_new_entry(self, solver, decision: bool) -> None:
        trail = solver.trail
        e = trail.entries[-1]
        n = solver.n
        if clit_is_empty(CLit(e.lit, e.pi), n):
            self._flag(f"pushed an empty assignment at pos {e.pos}")
        probe = CLit(e.lit, e.pi).atom
        for other in trail.entries[:-1]:
            if overlaps(probe, CLit(other.lit, other.pi).atom, n):
                self._flag(f"strong consistency broken: entries "
                           f"{other.pos} and {e.pos}")
        if not decision:
            clause = solver.pool[e.reason]
            rest = clause[:e.reason_lit] + clause[e.reason_lit + 1:]
            if rest and clause_value(trail, rest, e.sigma, e.pi,
                                     upto=e.pos) != FALSE:
                self._flag(f"reason remainder not false for entry {e.pos}")
            got = apply_lit(clause[e.reason_lit], e.sigma)
            if got != e.lit:
                self._flag(f"closure substitution does not produce entry {e.pos}")
        else:
            wit = is_blocked(_PrefixTrail(trail, e.pos), e.lit, e.pi,
                             solver.pool, n)
            if wit is not None:
                self._flag(f"blocked decision reached the trail at {e.pos}")

    # -- conflict-set checks ------------------------------------------------------

    def _check_conflict_set(self, solver, fresh: bool) -> None:
        cs = solver.conflict
        if cs is None:
            return
        trail = solver.trail
        insts = clause_instances(cs.clause, cs.sigma, cs.pi, solver.n)
        if not insts:
            self._flag("empty conflict set")
            return
        top = trail.level
        for g in insts:
            vals = [trail.value_of(l) for l in g]
            if not all(v == FALSE for v in vals):
                self._flag("conflict set holds a non-false instance")
                break
            if top > 0:
                at_top = sum(1 for l in g if trail.level_of(l) == top)
                need = 2 if fresh else 1
                if at_top < need:
                    self._flag(
                        f"conflict instance has {at_top} top-level literals, "
                        f"needs {need}")
                    break

    def _measure_of(self, solver):
        cs = solver.conflict
        if cs is None or solver.conflict_ordering is None:
            return None
        insts = clause_instances(cs.clause, cs.sigma, cs.pi, solver.n)
        key = functools.cmp_to_key(solver.conflict_ordering.cmp_clauses)
        return (len(solver.trail), sorted(insts, key=key, reverse=True))

    def _check_measure_decrease(self, rule: str, solver) -> None:
        before = self._measure
        after = self._measure_of(solver)
        self._measure = after
        if before is None or after is None:
            return
        ordering = solver.conflict_ordering
        if after[0] < before[0]:
            return
        if after[0] > before[0]:
            self._flag(f"{rule} grew the trail during resolution")
            return
        # same trail length: the instance multiset must strictly decrease
        if not _multiset_strictly_less(after[1], before[1], ordering):
            self._flag(f"{rule} did not decrease the resolution measure")

    def _check_immediate_conflict_factorize(self, rule: str) -> None:
        if (len(self._last_rules) >= 3
                and self._last_rules[-2] == "Conflict"
                and self._last_rules[-3] == "Decide"
                and rule != "Factorize"):
            self._flag(f"immediate conflict resolved by {rule}, not Factorize")

    # -- full sweep ----------------------------------------------------------------

    def _full_sweep(self, solver) -> None:
        trail = solver.trail
        n = solver.n
        decisions = [e for e in trail.entries if e.is_decision]
        levels = [e.level for e in decisions]
        if levels != sorted(levels) or len(set(levels)) != len(levels):
            self._flag("decision levels out of order or duplicated")
        if solver.level >= 0 and len(decisions) != solver.level:
            self._flag(f"{len(decisions)} decisions but level {solver.level}")
        for i, e in enumerate(trail.entries):
            probe = CLit(e.lit, e.pi).atom
            for other in trail.entries[i + 1:]:
                if overlaps(probe, CLit(other.lit, other.pi).atom, n):
                    self._flag(f"strong consistency broken: entries "
                               f"{e.pos} and {other.pos}")
        for e in trail.entries:
            if clit_is_empty(CLit(e.lit, e.pi), n):
                self._flag(f"entry {e.pos} is empty")
            if e.is_decision:
                wit = is_blocked(_PrefixTrail(trail, e.pos), e.lit, e.pi,
                                 solver.pool, n)
                if wit is not None:
                    self._flag(f"decision at {e.pos} is blocked w.r.t. the "
                               f"current clause sets")
            else:
                clause = solver.pool[e.reason]
                rest = clause[:e.reason_lit] + clause[e.reason_lit + 1:]
                if rest and clause_value(trail, rest, e.sigma, e.pi,
                                         upto=e.pos) != FALSE:
                    self._flag(f"reason remainder not false for entry {e.pos}")
                # every reason instance carries two literals of its level
                if e.level > 0:
                    self._check_two_per_level(solver, e)

    def _check_two_per_level(self, solver, e) -> None:
        clause = solver.pool[e.reason]
        for g in clause_instances(clause, e.sigma, e.pi, solver.n):
            count = 0
            for l in g:
                ent = solver.trail.defining_entry(l.atom)
                if ent is not None and ent.level == e.level:
                    count += 1
            if count < 2:
                self._flag(
                    f"reason instance of entry {e.pos} has {count} literals "
                    f"of level {e.level}")
                return


class _PrefixTrail:
    """Read-only view of a trail prefix, good enough for is_blocked."""

    def __init__(self, trail, length: int):
        self.n = trail.n
        self.entries = trail.entries[:length]

    def for_pred(self, pred: str):
        return [e for e in self.entries if e.lit.pred == pred]


def _multiset_strictly_less(after: list, before: list, ordering) -> bool:
    a, b = list(after), list(before)
    for x in list(a):
        for y in list(b):
            if ordering.cmp_clauses(x, y) == 0:
                a.remove(x)
                b.remove(y)
                break
    if not b:
        return False
    return all(any(ordering.cmp_clauses(x, y) < 0 for y in b) for x in a)
