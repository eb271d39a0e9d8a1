"""The transition system: conflict search, conflict resolution, learning.

State is the five-tuple (trail; input clauses; learned clauses; level;
indicator).  Conflict search runs exhaustive propagation through a priority
queue of candidates (smallest ground cover first), detecting conflicts
eagerly; decisions are drawn from a pool seeded with the input literals and
repaired by splitting whenever a candidate is blocked.  Conflict resolution
applies Skip / Factorize / Resolve until a clause can be learned, then
backjumps to the smallest level where the new clause propagates.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .constrained import (
    CLit,
    clit_is_empty,
    cover,
    diff_pairs,
    elim_free_vars,
    is_empty,
    rename_clit_fresh,
)
from .constraints import (
    BOT,
    TOP,
    Constraint,
    apply_constraint,
    conj,
    lvars,
    normalize,
    rename_rhs_fresh,
)
from .derive import find_candidates, is_blocked
from .syntax import (
    Clause,
    Lit,
    Signature,
    Subst,
    apply_clause,
    apply_lit,
    canonical_clause,
    canonical_variant,
    clause_vars,
    compose,
    factor_through,
    lit_vars,
    match_lit,
    mgu_atoms,
    renaming_for,
    restrict,
)
from .trail import FALSE, InducedOrdering, Trail, TrailEntry, is_assertive


class RuleRejected(Exception):
    """A rule was invoked on a state violating its preconditions."""


class StepCap(Exception):
    pass


@dataclass
class RunConfig:
    max_steps: int = 1_000_000
    seed: Optional[int] = None
    script: Optional[list[tuple[Lit, Constraint]]] = None
    use_watch_index: bool = False
    simplify: bool = True
    occurs_restriction: bool = True
    audit: bool = False
    combiner: str = "sum"
    renorm_conflicts: int = 128

    def __post_init__(self) -> None:
        if self.max_steps <= 0:
            raise ValueError("step cap must be positive")


@dataclass
class TraceEvent:
    step: int
    rule: str
    level: int
    payload: str


@dataclass
class ConflictSet:
    clause: Clause
    sigma: Subst
    pi: Constraint
    origin: Optional[int] = None   # pool index when it is an input/learned clause
    kind: str = "derived"          # 'pq-clash' | 'derived'


@dataclass
class Verdict:
    status: str                    # 'sat' | 'unsat' | 'stepcap'
    model: list[CLit] = field(default_factory=list)
    steps: int = 0
    learned: int = 0
    trace: list[TraceEvent] = field(default_factory=list)
    backjumps: int = 0


@dataclass
class PropCand:
    clause_idx: int
    lit_idx: int
    sigma: Subst                   # over the clause variables (plus sources)
    pi: Constraint

    def lit(self, pool: list[Clause]) -> Lit:
        return apply_lit(pool[self.clause_idx][self.lit_idx], self.sigma)


class Solver:
    def __init__(self, sig: Signature, clauses: list[Clause], cfg: RunConfig,
                 auditor=None):
        self.sig = sig
        self.n = sig.n
        self.cfg = cfg
        self.original = [canonical_clause(c) for c in clauses]
        self.pool: list[Clause] = list(self.original)
        self.deletion_log: list[str] = []
        if cfg.simplify:
            self.pool, self.deletion_log = simplify_pool(self.pool)
        self.n_input = len(self.pool)
        self.trail = Trail(self.n)
        self.level = 0
        self.conflict: Optional[ConflictSet] = None
        self.conflict_ordering: Optional[InducedOrdering] = None
        self.conflict_after_decide = False
        self.trace: list[TraceEvent] = []
        self.steps = 0
        self.backjumps = 0
        self.terminal: Optional[str] = None
        self.auditor = auditor
        self._rng = random.Random(cfg.seed) if cfg.seed is not None else None
        self._script = list(cfg.script) if cfg.script else []
        # propagation queue: (cover size, seq, candidate)
        self._pq: list[tuple[int, int, PropCand]] = []
        self._seq = 0
        # decision pool and its refinement trail
        self.pool_cands: list[tuple[Lit, Constraint]] = self._init_pool_cands()
        self._refinements: list[tuple[int, int, tuple[Lit, Constraint], int]] = []
        # scores: canonical literal -> value
        self.scores: dict[Lit, float] = {}
        self._bump = 1.0
        self._conflicts_seen = 0
        # index structures
        self._clauses_by_shape: dict[tuple[str, bool], list[int]] = {}
        self._rebuild_clause_index()
        self._watches: dict[int, tuple[int, int]] = {}
        if cfg.use_watch_index:
            self._setup_watches()

    # -- bookkeeping --------------------------------------------------------

    def _rebuild_clause_index(self) -> None:
        self._clauses_by_shape = {}
        for ci, c in enumerate(self.pool):
            for l in set((l.pred, l.neg) for l in c):
                self._clauses_by_shape.setdefault(l, []).append(ci)

    def _index_new_clause(self, ci: int) -> None:
        for key in set((l.pred, l.neg) for l in self.pool[ci]):
            self._clauses_by_shape.setdefault(key, []).append(ci)

    def _init_pool_cands(self) -> list[tuple[Lit, Constraint]]:
        cands: list[tuple[Lit, Constraint]] = []
        seen: set[tuple] = set()
        for c in self.pool:
            for l in c:
                shape = _var_shape(l)
                if shape in seen:
                    continue
                seen.add(shape)
                cands.append((l, TOP))
        return cands

    def _emit(self, rule: str, payload: str) -> None:
        self.steps += 1
        if self.steps > self.cfg.max_steps:
            raise StepCap
        self.trace.append(TraceEvent(self.steps, rule, self.level, payload))
        if self.auditor is not None:
            self.auditor.after_rule(rule, self)

    def _render_entry(self, e: TrailEntry) -> str:
        from .render import render_entry
        return render_entry(self.sig, e)

    def _render_conflict(self, cs: ConflictSet) -> str:
        from .render import render_conflict
        return render_conflict(self.sig, cs, self.n_input)

    # -- propagation queue ---------------------------------------------------

    def _enqueue(self, cand: PropCand) -> None:
        lit = cand.lit(self.pool)
        size = _cover_size(lit, cand.pi, self.n)
        if size == 0:
            return
        self._pq.append((size, self._seq, cand))
        self._seq += 1

    def _pq_sorted(self) -> list[tuple[int, int, PropCand]]:
        return sorted(self._pq, key=lambda t: (t[0], t[1]))

    def seed_units(self) -> None:
        for ci, c in enumerate(self.pool):
            if len(c) == 1:
                self._enqueue(PropCand(ci, 0, {}, TOP))

    # -- rules: conflict search ----------------------------------------------

    def rule_propagate(self, cand: PropCand, sigma: Subst, pi: Constraint) -> TrailEntry:
        clause = self.pool[cand.clause_idx]
        lit = apply_lit(clause[cand.lit_idx], sigma)
        if self.level < 0:
            raise RuleRejected("terminal state")
        if is_empty(lit, pi, self.n):
            raise RuleRejected("empty propagation")
        entry = self._push(lit, pi, reason=cand.clause_idx,
                           reason_lit=cand.lit_idx, sigma=sigma)
        self._emit("Propagate", self._render_entry(entry))
        return entry

    def rule_decide(self, lit: Lit, pi: Constraint) -> TrailEntry:
        if self.level < 0:
            raise RuleRejected("terminal state")
        if clit_is_empty(CLit(lit, pi), self.n):
            raise RuleRejected("empty decision")
        if not self._is_undefined(lit, pi):
            raise RuleRejected("decision covers a defined atom")
        wit = is_blocked(self.trail, lit, pi, self.pool, self.n)
        if wit is not None:
            raise RuleRejected(f"decision blocked by clause C{wit[0] + 1}")
        if self.cfg.occurs_restriction and not self._occurs_in_input(lit):
            raise RuleRejected("decision does not instantiate an input literal")
        self.level += 1
        entry = self._push(lit, pi, reason=None)
        entry.level = self.level
        self._emit("Decide", self._render_entry(entry))
        return entry

    def rule_conflict(self, cs: ConflictSet) -> None:
        if self.level < 0:
            raise RuleRejected("terminal state")
        if not cs.clause:
            raise RuleRejected("the empty clause cannot be a conflict set")
        self.conflict = cs
        self.conflict_ordering = InducedOrdering.from_trail(self.trail)
        self.conflict_after_decide = (
            bool(self.trail.entries) and self.trail.entries[-1].is_decision
        )
        self._pq.clear()
        self._bump_clause(cs.clause)
        self._emit("Conflict", self._render_conflict(cs))

    def rule_success(self) -> None:
        self.level = -1
        self.terminal = "sat"
        self._emit("Success", "model found")

    def rule_failure(self) -> None:
        self.level = 0
        self.terminal = "unsat"
        self._emit("Failure", "empty clause present")

    # -- rules: conflict resolution -------------------------------------------

    def rule_skip(self) -> None:
        cs = self.conflict
        entry = self.trail.entries[-1]
        if entry.is_decision:
            raise RuleRejected("cannot skip a decision")
        if self._resolvable_position(cs, entry) is not None:
            raise RuleRejected("rightmost literal touches the conflict")
        self.trail.pop()
        self._emit("Skip", self._render_entry(entry))

    def rule_resolve(self) -> None:
        cs = self.conflict
        entry = self.trail.entries[-1]
        if entry.is_decision:
            raise RuleRejected("cannot resolve against a decision")
        if self.level > 0 and is_assertive(self.trail, cs.clause, cs.sigma, cs.pi):
            raise RuleRejected("conflict is assertive; backjump instead")
        pos = self._resolvable_position(cs, entry)
        if pos is None:
            raise RuleRejected("no resolvable literal")
        lit = cs.clause[pos]
        reason = self.pool[entry.reason]
        # rename the reason clause apart when it shares variables
        shared = set(clause_vars(reason)) & set(clause_vars(cs.clause))
        rho = renaming_for(clause_vars(reason)) if shared else {}
        rp = apply_clause(reason, rho)
        lprime = rp[entry.reason_lit]
        eta = mgu_atoms(entry.lit.atom, apply_lit(lit, cs.sigma).atom)
        assert eta is not None
        eta0 = mgu_atoms(lprime.atom, apply_lit(lit, {}).atom)
        assert eta0 is not None, "eta exists, so eta0 must"
        rest = cs.clause[:pos] + cs.clause[pos + 1:]
        rest_r = rp[:entry.reason_lit] + rp[entry.reason_lit + 1:]
        new_clause_raw = apply_clause(rest + rest_r, eta0)
        new_clause = canonical_clause(new_clause_raw)
        inv_rho = {w: v for v, w in rho.items()}
        mu: Subst = {}
        for v in clause_vars(cs.clause):
            mu[v] = _apply_chain(v, [cs.sigma, eta])
        for u in clause_vars(rp):
            mu[u] = _apply_chain(inv_rho.get(u, u), [entry.sigma, eta])
        sigma_star = factor_through(eta0, mu,
                                    clause_vars(cs.clause) + clause_vars(rp))
        sigma_star = restrict(sigma_star, clause_vars(new_clause))
        entry_pi = rename_rhs_fresh(entry.pi)
        new_pi = normalize(_and2(apply_constraint(cs.pi, eta),
                                 apply_constraint(entry_pi, eta)))
        self._bump_clause(apply_clause(rest_r, eta0))
        self.conflict = ConflictSet(new_clause, sigma_star, new_pi)
        self._emit("Resolve", self._render_conflict(self.conflict))

    def rule_factorize(self) -> None:
        cs = self.conflict
        entry = self.trail.entries[-1]
        found = self._factorize_choice(cs, entry)
        if found is None:
            raise RuleRejected("no factorizable pair")
        i, j, eta = found
        li, lj = cs.clause[i], cs.clause[j]
        eta0 = mgu_atoms(li.atom, lj.atom)
        assert eta0 is not None
        new_clause_raw = apply_clause(
            tuple(l for p, l in enumerate(cs.clause) if p != j), eta0)
        new_clause = canonical_clause(new_clause_raw)
        mu = {v: _apply_chain(v, [cs.sigma, eta]) for v in clause_vars(cs.clause)}
        sigma_star = factor_through(eta0, mu, clause_vars(cs.clause))
        sigma_star = restrict(sigma_star, clause_vars(new_clause))
        new_pi = normalize(apply_constraint(cs.pi, eta))
        self.conflict = ConflictSet(new_clause, sigma_star, new_pi)
        self._emit("Factorize", self._render_conflict(self.conflict))

    def rule_backjump(self, case: int, target_len: int, target_level: int) -> int:
        cs = self.conflict
        learned = canonical_variant(cs.clause)
        if self.auditor is not None:
            self.auditor.before_learn(self, learned)
        self.pool.append(learned)
        ci = len(self.pool) - 1
        self._index_new_clause(ci)
        if self.cfg.use_watch_index:
            self._watch_clause(ci)
        mid_level = target_len != self.trail.level_prefix_len(target_level)
        self.trail.truncate(target_len)
        self.level = target_level
        self.conflict = None
        self.conflict_ordering = None
        self.backjumps += 1
        self._conflicts_seen += 1
        self._decay_scores()
        self._reroll_refinements(target_len)
        from .render import render_clause
        self._emit(
            "Backjump",
            f"case {case} | learn C{ci + 1}: "
            f"{render_clause(self.sig, learned)} | to level {target_level}",
        )
        self._pq.clear()
        if learned == ():
            return ci
        if mid_level:
            self._reseed_full()
        else:
            self._reseed_from_clause(ci)
        return ci

    # -- helpers shared by the rules ------------------------------------------

    def _push(self, lit: Lit, pi: Constraint, reason: Optional[int],
              reason_lit: int = -1, sigma: Optional[Subst] = None) -> TrailEntry:
        # every trail entry gets its own fresh variables
        ren = renaming_for(lit_vars(lit) + lvars(pi) + _rvars_list(pi))
        from .constraints import rename_constraint
        lit2 = apply_lit(lit, ren)
        pi2 = rename_constraint(pi, ren)
        sigma2 = compose(sigma or {}, ren) if reason is not None else {}
        entry = TrailEntry(lit2, pi2, level=self.level, pos=len(self.trail),
                           reason=reason, reason_lit=reason_lit, sigma=sigma2)
        self.trail.push(entry)
        if self.cfg.use_watch_index:
            self._adjust_watches(entry)
        return entry

    def _is_undefined(self, lit: Lit, pi: Constraint) -> bool:
        probe = CLit(lit, pi).atom
        from .constrained import overlaps
        for e in self.trail.for_pred(lit.pred):
            if overlaps(probe, CLit(e.lit, e.pi).atom, self.n):
                return False
        return True

    def _occurs_in_input(self, lit: Lit) -> bool:
        # optional fourth condition of Decide: |L| instantiates an input atom
        for c in self.original:
            for l in c:
                if l.pred != lit.pred:
                    continue
                l2 = apply_lit(l, renaming_for(lit_vars(l)))
                if match_lit(l2.atom, lit.atom) is not None:
                    return True
        return False

    def _resolvable_position(self, cs: ConflictSet, entry: TrailEntry) -> Optional[int]:
        for pos, lit in enumerate(cs.clause):
            if lit.neg == entry.lit.neg or lit.pred != entry.lit.pred:
                continue
            inst = apply_lit(lit, cs.sigma)
            eta = mgu_atoms(entry.lit.atom, inst.atom)
            if eta is None:
                continue
            entry_pi = rename_rhs_fresh(entry.pi)
            combined = normalize(_and2(apply_constraint(cs.pi, eta),
                                       apply_constraint(entry_pi, eta)))
            if combined.is_bot:
                continue
            if not self._combined_empty(cs.clause, cs.sigma, eta, combined):
                return pos
        return None

    def _factorize_choice(self, cs: ConflictSet, entry: TrailEntry):
        for i in range(len(cs.clause)):
            for j in range(i + 1, len(cs.clause)):
                li, lj = cs.clause[i], cs.clause[j]
                if li.neg != lj.neg or li.pred != lj.pred:
                    continue
                if entry.lit.neg == li.neg or entry.lit.pred != li.pred:
                    continue
                ai = apply_lit(li, cs.sigma).atom
                aj = apply_lit(lj, cs.sigma).atom
                eta = mgu_atoms(ai, aj)
                if eta is None:
                    continue
                eta = mgu_atoms(apply_lit(ai, eta), entry.lit.atom, base=eta)
                if eta is None:
                    continue
                entry_pi = rename_rhs_fresh(entry.pi)
                combined = normalize(_and2(apply_constraint(cs.pi, eta),
                                           apply_constraint(entry_pi, eta)))
                if combined.is_bot:
                    continue
                if self._combined_empty(cs.clause, cs.sigma, eta, combined):
                    continue
                return i, j, eta
        return None

    def _combined_empty(self, clause: Clause, sigma: Subst, eta: Subst,
                        combined: Constraint) -> bool:
        inst = apply_clause(apply_clause(clause, sigma), eta)
        vs = clause_vars(inst)
        extra = [v for v in lvars(combined) if v not in vs]
        from .constraints import find_solution_enum
        return find_solution_enum(combined, vs + extra, self.n) is None

    # -- propagation ----------------------------------------------------------

    def prop_loop(self) -> bool:
        """Exhaust the queue; False means a conflict is pending."""
        while self._pq:
            self._pq.sort(key=lambda t: (t[0], t[1]))
            _, _, cand = self._pq.pop(0)
            pieces = self._diff_against_trail(cand)
            for sigma, pi in pieces:
                lit = apply_lit(self.pool[cand.clause_idx][cand.lit_idx], sigma)
                if is_empty(lit, pi, self.n):
                    continue
                entry = self.rule_propagate(
                    PropCand(cand.clause_idx, cand.lit_idx, sigma, pi), sigma, pi)
                if not self.add_consequences(entry):
                    return False
        return True

    def _diff_against_trail(self, cand: PropCand) -> list[tuple[Subst, Constraint]]:
        base = self.pool[cand.clause_idx][cand.lit_idx]
        pieces = [(cand.sigma, cand.pi)]
        lit0 = apply_lit(base, cand.sigma)
        for e in self.trail.for_pred(lit0.pred):
            new_pieces: list[tuple[Subst, Constraint]] = []
            for sigma, pi in pieces:
                cur = apply_lit(base, sigma)
                e_lit, e_pi, _ = rename_clit_fresh(e.lit, e.pi)
                for tau, pi2 in diff_pairs(cur.atom, pi, e_lit.atom, e_pi):
                    if not pi2.is_bot:
                        new_pieces.append((compose(sigma, tau), pi2))
            pieces = new_pieces
            if not pieces:
                break
        return pieces

    def add_consequences(self, entry: TrailEntry) -> bool:
        """Conflict checks and new candidates after a push; False on conflict."""
        # type-1: an unprocessed queue candidate is falsified by the new entry
        for _, _, cand in self._pq_sorted():
            lit = cand.lit(self.pool)
            if lit.neg == entry.lit.neg or lit.pred != entry.lit.pred:
                continue
            delta = mgu_atoms(lit.atom, entry.lit.atom)
            if delta is None:
                continue
            entry_pi = rename_rhs_fresh(entry.pi)
            combined = normalize(_and2(apply_constraint(cand.pi, delta),
                                       apply_constraint(entry_pi, delta)))
            if combined.is_bot:
                continue
            clause = self.pool[cand.clause_idx]
            sig2 = compose(cand.sigma, delta)
            if self._conflict_set_empty(clause, sig2, combined):
                continue
            self.rule_conflict(ConflictSet(
                clause, restrict(sig2, clause_vars(clause)), combined,
                origin=cand.clause_idx, kind="pq-clash"))
            return False
        # derived consequences: every clause touching the new entry
        key = (entry.lit.pred, not entry.lit.neg)
        for ci in self._clauses_by_shape.get(key, []):
            if self.cfg.use_watch_index and self._fully_watched(ci):
                continue
            clause = self.pool[ci]
            leaves = find_candidates(ci, clause, list(self.trail.entries),
                                     newest_pos=entry.pos, need_newest=True,
                                     keep_limit=1)
            for leaf in leaves:
                if not leaf.remaining:
                    sigma = restrict(leaf.sigma, clause_vars(clause))
                    if self._conflict_set_empty(clause, sigma, leaf.pi):
                        continue
                    self.rule_conflict(ConflictSet(clause, sigma, leaf.pi,
                                                   origin=ci, kind="derived"))
                    return False
                lit_idx = leaf.remaining[0]
                lit = apply_lit(clause[lit_idx], leaf.sigma)
                for lit2, pi2, sigma2 in elim_free_vars(
                        lit, leaf.pi, leaf.sigma, self.n):
                    self._enqueue(PropCand(ci, lit_idx, sigma2, pi2))
        return True

    def _conflict_set_empty(self, clause: Clause, sigma: Subst, pi: Constraint) -> bool:
        inst = apply_clause(clause, sigma)
        vs = clause_vars(inst)
        extra = [v for v in lvars(pi) if v not in vs]
        from .constraints import find_solution_enum
        return find_solution_enum(pi, vs + extra, self.n) is None

    def _reseed_from_clause(self, ci: int) -> None:
        clause = self.pool[ci]
        leaves = find_candidates(ci, clause, list(self.trail.entries),
                                 keep_limit=1)
        for leaf in leaves:
            if not leaf.remaining:
                continue  # cannot happen after a proper backjump
            lit_idx = leaf.remaining[0]
            lit = apply_lit(clause[lit_idx], leaf.sigma)
            for lit2, pi2, sigma2 in elim_free_vars(lit, leaf.pi, leaf.sigma, self.n):
                self._enqueue(PropCand(ci, lit_idx, sigma2, pi2))

    def _reseed_full(self) -> None:
        for ci in range(len(self.pool)):
            self._reseed_from_clause(ci)

    def full_scan(self) -> Optional[ConflictSet]:
        """Exhaustion backstop before Success: find any conflict or candidate."""
        for ci, clause in enumerate(self.pool):
            leaves = find_candidates(ci, clause, list(self.trail.entries),
                                     keep_limit=1)
            for leaf in leaves:
                if not leaf.remaining:
                    sigma = restrict(leaf.sigma, clause_vars(clause))
                    if not self._conflict_set_empty(clause, sigma, leaf.pi):
                        return ConflictSet(clause, sigma, leaf.pi, origin=ci,
                                           kind="derived")
                else:
                    lit_idx = leaf.remaining[0]
                    lit = apply_lit(clause[lit_idx], leaf.sigma)
                    for lit2, pi2, sigma2 in elim_free_vars(
                            lit, leaf.pi, leaf.sigma, self.n):
                        cand = PropCand(ci, lit_idx, sigma2, pi2)
                        if self._diff_nonempty(cand):
                            self._enqueue(cand)
        return None

    def _diff_nonempty(self, cand: PropCand) -> bool:
        for sigma, pi in self._diff_against_trail(cand):
            lit = apply_lit(self.pool[cand.clause_idx][cand.lit_idx], sigma)
            if not is_empty(lit, pi, self.n):
                return True
        return False

    # -- decisions -------------------------------------------------------------

    def select_decision(self) -> Optional[tuple[Lit, Constraint]]:
        if self._script:
            lit, pi = self._script.pop(0)
            return lit, pi
        order = list(range(len(self.pool_cands)))
        if self.scores:
            combined = [self._combined_score(self.pool_cands[i][0]) for i in order]
        else:
            combined = [0.0] * len(order)
        if self._rng is not None:
            jitter = [self._rng.random() for _ in order]
        else:
            jitter = [0.0] * len(order)
        order.sort(key=lambda i: (-combined[i], jitter[i], i))
        for i in order:
            lit, pi = self.pool_cands[i]
            pieces = [
                (apply_lit(lit, sigma), piece_pi)
                for sigma, piece_pi in self._diff_lit_against_trail(lit, pi)
            ]
            got = self._repair_blocking(i, pieces)
            if got is not None:
                return got
        if not self.cfg.occurs_restriction:
            g = self._first_undefined_ground_atom()
            if g is not None:
                return Lit(True, g.pred, g.args), TOP
        return None

    def _diff_lit_against_trail(self, lit: Lit, pi: Constraint,
                                upto: Optional[int] = None,
                                ) -> list[tuple[Subst, Constraint]]:
        pieces = [({}, pi)]
        for e in self.trail.for_pred(lit.pred):
            if upto is not None and e.pos >= upto:
                continue
            new_pieces: list[tuple[Subst, Constraint]] = []
            for sigma, p in pieces:
                cur = apply_lit(lit, sigma)
                e_lit, e_pi, _ = rename_clit_fresh(e.lit, e.pi)
                for tau, p2 in diff_pairs(cur.atom, p, e_lit.atom, e_pi):
                    if not p2.is_bot:
                        new_pieces.append((compose(sigma, tau), p2))
            pieces = new_pieces
            if not pieces:
                break
        return pieces

    def _repair_blocking(self, pool_idx: int,
                         pieces: list[tuple[Lit, Constraint]],
                         ) -> Optional[tuple[Lit, Constraint]]:
        """Pick an unblocked decision among the undefined pieces, splitting
        blocked candidates until a ground (hence unblocked) one emerges.

        If any split happened, the pool entry is replaced by the refined
        piece list so the candidate pool keeps covering the original atoms;
        the replacement is undone when backjumping below this point.
        """
        work = list(pieces)
        split = False
        while work:
            d_lit, d_pi = work[0]
            if d_pi.is_bot or clit_is_empty(CLit(d_lit, d_pi), self.n):
                work.pop(0)
                continue
            wit = is_blocked(self.trail, d_lit, d_pi, self.pool, self.n)
            if wit is None:
                if split:
                    self._record_refinement(pool_idx, work)
                return d_lit, d_pi
            _, _, l1, l2 = wit
            d1 = match_lit(d_lit.atom, l1.atom)
            d2 = match_lit(d_lit.atom, l2.atom)
            assert d1 is not None and d2 is not None
            x = None
            for v in lit_vars(d_lit):
                if d1.get(v, v) != d2.get(v, v):
                    x = v
                    break
            assert x is not None, "distinct instances must differ on a variable"
            c1 = d1.get(x)
            assert c1 is not None and c1 >= 0
            inst = (apply_lit(d_lit, {x: c1}),
                    normalize(apply_constraint(d_pi, {x: c1})))
            rest = (d_lit, normalize(_and2(d_pi, conj([((x,), (c1,))]))))
            work[0:1] = [p for p in (inst, rest) if not p[1].is_bot]
            split = True
        if split:
            # everything split away as empty: drop the entry's pieces
            self._record_refinement(pool_idx, [])
        return None

    def _record_refinement(self, pool_idx: int,
                           new: list[tuple[Lit, Constraint]]) -> None:
        old = self.pool_cands[pool_idx]
        self._refinements.append((len(self.trail), pool_idx, old, len(new)))
        self.pool_cands[pool_idx:pool_idx + 1] = new

    def _reroll_refinements(self, trail_len: int) -> None:
        while self._refinements and self._refinements[-1][0] > trail_len:
            _, idx, old, count = self._refinements.pop()
            self.pool_cands[idx:idx + count] = [old]

    def _first_undefined_ground_atom(self) -> Optional[Lit]:
        for pred in sorted(self.sig.preds):
            ar = self.sig.preds[pred]
            import itertools as _it
            for args in _it.product(range(self.n), repeat=ar):
                atom = Lit(False, pred, args)
                if self.trail.defining_entry(atom) is None:
                    return atom
        return None

    # -- scores -----------------------------------------------------------------

    def _bump_clause(self, clause: Clause) -> None:
        for l in clause:
            key = _canon_lit(l)
            self.scores[key] = self.scores.get(key, 0.0) + self._bump

    def _decay_scores(self) -> None:
        self._bump /= 0.95
        if self._bump > 1e100 or (
                self.cfg.renorm_conflicts and
                self._conflicts_seen % self.cfg.renorm_conflicts == 0):
            scale = 1.0 / self._bump
            self.scores = {l: s * scale for l, s in self.scores.items()}
            self._bump = 1.0

    def _combined_score(self, lit: Lit) -> float:
        total = 0.0
        best = 0.0
        for l, s in self.scores.items():
            if l.neg != lit.neg or l.pred != lit.pred:
                continue
            l2 = apply_lit(l, renaming_for(lit_vars(l)))
            if mgu_atoms(l2.atom, lit.atom) is not None:
                total += s
                best = max(best, s)
        return best if self.cfg.combiner == "max" else total

    # -- watch layer --------------------------------------------------------------

    def _setup_watches(self) -> None:
        for ci in range(len(self.pool)):
            self._watch_clause(ci)

    def _watch_clause(self, ci: int) -> None:
        clause = self.pool[ci]
        free = [p for p in range(len(clause))
                if self._watchable(clause[p])]
        if len(free) >= 2:
            self._watches[ci] = (free[0], free[1])
        else:
            self._watches.pop(ci, None)

    def _watchable(self, lit: Lit) -> bool:
        # cheapest cannot-be-false approximation: no complement-unifiable entry
        for e in self.trail.for_pred(lit.pred):
            if e.lit.neg != lit.neg and mgu_atoms(
                    apply_lit(lit, renaming_for(lit_vars(lit))).atom,
                    e.lit.atom) is not None:
                return False
        return True

    def _fully_watched(self, ci: int) -> bool:
        return ci in self._watches

    def _adjust_watches(self, entry: TrailEntry) -> None:
        for ci in list(self._watches):
            p1, p2 = self._watches[ci]
            clause = self.pool[ci]
            bad = [p for p in (p1, p2)
                   if clause[p].pred == entry.lit.pred
                   and clause[p].neg != entry.lit.neg
                   and mgu_atoms(apply_lit(clause[p], renaming_for(lit_vars(clause[p]))).atom,
                                 entry.lit.atom) is not None]
            if not bad:
                continue
            self._watch_clause(ci)

    # -- the regular-run driver -----------------------------------------------

    def solve(self) -> Verdict:
        try:
            return self._solve()
        except StepCap:
            return Verdict("stepcap", steps=self.steps, trace=self.trace,
                           learned=len(self.pool) - self.n_input,
                           backjumps=self.backjumps)

    def _solve(self) -> Verdict:
        self.seed_units()
        while True:
            if self.conflict is not None:
                self._resolution_step()
                continue
            if any(c == () for c in self.pool):
                self.rule_failure()
                return self._verdict()
            if not self.prop_loop():
                continue  # conflict recorded by add_consequences
            d = self.select_decision()
            if d is not None:
                entry = self.rule_decide(*d)
                if not self.add_consequences(entry):
                    continue
                continue
            cs = self.full_scan()
            if cs is not None:
                self.rule_conflict(cs)
                continue
            if self._pq:
                continue
            if self.auditor is not None:
                self.auditor.at_success(self)
            self.rule_success()
            return self._verdict()

    def _resolution_step(self) -> None:
        cs = self.conflict
        if cs.clause == ():
            # the empty clause was derived (only level 0 can get here):
            # learn it, then Failure follows
            assert self.level == 0
            self.rule_backjump(1, len(self.trail), 0)
            return
        if self.level > 0 and is_assertive(self.trail, cs.clause, cs.sigma, cs.pi):
            tgt_len, tgt_level = self.compute_backjump_level(cs.clause)
            self.rule_backjump(2, tgt_len, tgt_level)
            return
        entry = self.trail.entries[-1]
        if entry.is_decision:
            if self._factorize_choice(cs, entry) is not None:
                self.rule_factorize()
                return
            tgt_len, tgt_level = self.compute_backjump_level(cs.clause)
            self.rule_backjump(3, tgt_len, tgt_level)
            return
        if self._resolvable_position(cs, entry) is None:
            self.rule_skip()
            return
        if self._factorize_choice(cs, entry) is not None:
            self.rule_factorize()
            return
        self.rule_resolve()

    def compute_backjump_level(self, learned: Clause) -> tuple[int, int]:
        """(trail prefix length, level) for the backjump target.

        Preference: the smallest level where the learned clause propagates
        (and has no false instance); fallback: the largest level with no
        false instance; last resort: the longest false-instance-free prefix
        of level 0.
        """
        k = self.trail.level
        assert k >= 1, "backjump level computed only above level 0"
        fallback = None
        for j in range(k):
            plen = self.trail.level_prefix_len(j)
            if self._falsifiable_under_prefix(learned, plen):
                break
            if self._propagatable_under_prefix(learned, plen):
                return plen, j
            fallback = (plen, j)
        if fallback is not None:
            return fallback
        # pathological: false already somewhere inside level 0
        lvl0 = self.trail.level_prefix_len(0)
        for m in range(lvl0, -1, -1):
            if not self._falsifiable_under_prefix(learned, m):
                return m, 0
        return 0, 0

    def _falsifiable_under_prefix(self, clause: Clause, plen: int) -> bool:
        if clause == ():
            return True
        from .syntax import ground_assignments
        vs = clause_vars(clause)
        for d in ground_assignments(vs, self.n):
            inst = apply_clause(clause, d)
            if all(self.trail.value_of(l, upto=plen) == FALSE for l in inst):
                return True
        return False

    def _propagatable_under_prefix(self, clause: Clause, plen: int) -> bool:
        # mirrors the Propagate path: subtract what the prefix defines and
        # ask whether a non-empty piece remains
        prefix = self.trail.prefix_entries(plen)
        leaves = find_candidates(-2, clause, prefix, keep_limit=1)
        for leaf in leaves:
            if not leaf.remaining:
                continue
            lit_idx = leaf.remaining[0]
            lit = apply_lit(clause[lit_idx], leaf.sigma)
            for lit2, pi2, sigma2 in elim_free_vars(lit, leaf.pi, leaf.sigma, self.n):
                pieces = self._diff_lit_against_trail(lit2, pi2, upto=plen)
                for tau, piece_pi in pieces:
                    if not is_empty(apply_lit(lit2, tau), piece_pi, self.n):
                        return True
        return False

    def _verdict(self) -> Verdict:
        model = [CLit(e.lit, e.pi) for e in self.trail.entries]
        return Verdict(self.terminal, model=model, steps=self.steps,
                       learned=len(self.pool) - self.n_input,
                       trace=self.trace, backjumps=self.backjumps)


# ---------------------------------------------------------------------------
# small helpers

def _and2(a: Constraint, b: Constraint) -> Constraint:
    if a.is_bot or b.is_bot:
        return BOT
    subs = (a.subs if a.kind == "and" else ()) + (b.subs if b.kind == "and" else ())
    return conj(subs)


def _apply_chain(v: int, chain: list[Subst]) -> int:
    from .syntax import apply_term
    t = v
    for s in chain:
        t = apply_term(t, s)
    return t


def _cover_size(lit: Lit, pi: Constraint, n: int) -> int:
    return len(cover(lit.atom, pi, n))


def _var_shape(l: Lit) -> tuple:
    seen: dict[int, int] = {}
    shape = []
    for a in l.args:
        if a >= 0:
            shape.append((0, a))
        else:
            if a not in seen:
                seen[a] = len(seen)
            shape.append((1, seen[a]))
    return (l.pred, l.neg, tuple(shape))


def _canon_lit(l: Lit) -> Lit:
    seen: dict[int, int] = {}
    args = []
    for a in l.args:
        if a >= 0:
            args.append(a)
        else:
            if a not in seen:
                seen[a] = -len(seen) - 1
            args.append(seen[a])
    return Lit(l.neg, l.pred, tuple(args))


def _rvars_list(pi: Constraint) -> list[int]:
    from .constraints import rvars
    return rvars(pi)


# ---------------------------------------------------------------------------
# admissible simplifications (preprocessing)

def is_tautology(c: Clause) -> bool:
    atoms = {(l.pred, l.args) for l in c if not l.neg}
    return any((l.pred, l.args) in atoms for l in c if l.neg)


def _match_restricted(want: Lit, sub: Lit, bindable: set[int]) -> Optional[Subst]:
    """Match `want` onto `sub`, binding only variables from `bindable`.

    Positions already instantiated to the subsumee's variables must agree
    exactly; binding those would fabricate substitutions the subsumee never
    made.
    """
    if want.neg != sub.neg or want.pred != sub.pred:
        return None
    s: Subst = {}
    for p, q in zip(want.args, sub.args):
        if p < 0 and p in bindable:
            if p in s:
                if s[p] != q:
                    return None
            else:
                s[p] = q
        elif p != q:
            return None
    return s


def subsumes(c: Clause, d: Clause) -> bool:
    """Some instance of c is a submultiset of d."""
    c = canonical_variant(c)
    cvars = set(clause_vars(c))

    def rec(i: int, used: set[int], sigma: Subst) -> bool:
        if i == len(c):
            return True
        want = apply_lit(c[i], sigma)
        for j, l in enumerate(d):
            if j in used:
                continue
            m = _match_restricted(want, l, cvars)
            if m is None:
                continue
            if rec(i + 1, used | {j}, compose(sigma, m)):
                return True
        return False

    return rec(0, set(), {})


def simplify_pool(pool: list[Clause]) -> tuple[list[Clause], list[str]]:
    """Tautology deletion, strict subsumption, subsumption resolution."""
    from .render import render_clause  # local to avoid cycles at import time
    log: list[str] = []
    clauses = list(pool)
    changed = True
    alive = [True] * len(clauses)
    while changed:
        changed = False
        for i, c in enumerate(clauses):
            if not alive[i]:
                continue
            if is_tautology(c):
                alive[i] = False
                log.append(f"tautology: deleted clause {i + 1}")
                changed = True
        # subsumption resolution: C or L with C*s subset of D deletes ~L*s from D
        for i, c in enumerate(clauses):
            if not alive[i] or not c:
                continue
            for j, d in enumerate(clauses):
                if i == j or not alive[j]:
                    continue
                res = _subsumption_resolvent(c, d)
                if res is not None and res != d:
                    clauses[j] = res
                    log.append(f"subsumption resolution: clause {j + 1} reduced")
                    changed = True
        for i, c in enumerate(clauses):
            if not alive[i]:
                continue
            for j, d in enumerate(clauses):
                if i == j or not alive[j]:
                    continue
                if subsumes(c, d) and not (len(c) == len(d) and subsumes(d, c) and i > j):
                    if len(c) < len(d) or not subsumes(d, c) or i < j:
                        alive[j] = False
                        log.append(f"subsumption: clause {j + 1} deleted by {i + 1}")
                        changed = True
    return [c for i, c in enumerate(clauses) if alive[i]], log


def _subsumption_resolvent(c: Clause, d: Clause) -> Optional[Clause]:
    """If c == C or L with C*s a subset of d minus ~L*s, drop that literal."""
    c = canonical_variant(c)
    cvars = set(clause_vars(c))

    def covers(rest: Clause, pool: Clause, used: set[int], sigma: Subst) -> bool:
        if not rest:
            return True
        want = apply_lit(rest[0], sigma)
        for j, l in enumerate(pool):
            if j in used:
                continue
            m = _match_restricted(want, l, cvars)
            if m is None:
                continue
            if covers(rest[1:], pool, used | {j}, compose(sigma, m)):
                return True
        return False

    for li in range(len(c)):
        lflip = c[li].negate()
        rest = c[:li] + c[li + 1:]
        for j, dl in enumerate(d):
            m = _match_restricted(lflip, dl, cvars)
            if m is None:
                continue
            remainder = d[:j] + d[j + 1:]
            if covers(rest, remainder, set(), m):
                return canonical_clause(remainder)
    return None
