"""Candidate derivation: resolving clause literals against trail entries.

A derivation tuple carries a remainder of a clause, the accumulated
substitution and constraint, and how often the newest trail entry was used.
Tuples whose remainder is empty are conflict candidates; single-literal
remainders are propagation candidates.  Every use of a trail entry renames
that entry fresh, so one entry can justify several independent instances in
a single derivation (constraints stay right-hand-side disjoint).

The same machinery decides blocked decisions: a decision candidate is added
as a pseudo-entry and a conflict derivation using it at two positions with
distinct ground instances is a blocking witness.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .constrained import rename_clit_fresh
from .constraints import (
    BOT,
    TOP,
    Constraint,
    apply_constraint,
    conj,
    lvars,
    normalize,
    violates,
)
from .syntax import (
    Clause,
    Lit,
    Subst,
    apply_clause,
    apply_lit,
    clause_vars,
    compose,
    ground_assignments,
    mgu_atoms,
)
from .trail import Trail, TrailEntry


@dataclass(frozen=True)
class DTuple:
    """One maximal derivation outcome for a clause against the trail."""

    clause_idx: int
    remaining: tuple[int, ...]          # unresolved literal positions
    sigma: Subst
    pi: Constraint
    uses_newest: int
    used: tuple[tuple[int, int], ...]   # (position, entry pos); extras negative


def _and(a: Constraint, b: Constraint) -> Constraint:
    if a.is_bot or b.is_bot:
        return BOT
    subs = (a.subs if a.kind == "and" else ()) + (b.subs if b.kind == "and" else ())
    return conj(subs)


def find_candidates(
    clause_idx: int,
    clause: Clause,
    sources: list[TrailEntry],
    newest_pos: Optional[int] = None,
    need_newest: bool = False,
    keep_limit: Optional[int] = 1,
    extra: Optional[list[tuple[Lit, Constraint]]] = None,
) -> list[DTuple]:
    """All maximal derivation tuples for `clause` against `sources`.

    keep_limit bounds the remainder size of reported tuples (None: no bound).
    With need_newest, only derivations touching entry `newest_pos` at least
    once are explored.  Extra pseudo-entries get pseudo-positions -1, -2, ...
    """
    pool: list[tuple[int, Lit, Constraint]] = [
        (e.pos, e.lit, e.pi) for e in sources
    ]
    if extra:
        pool += [(-1 - i, lit, pi) for i, (lit, pi) in enumerate(extra)]

    by_pred: dict[tuple[str, bool], list[tuple[int, Lit, Constraint]]] = {}
    for src in pool:
        by_pred.setdefault((src[1].pred, src[1].neg), []).append(src)

    def compatible(pos: int) -> list[tuple[int, Lit, Constraint]]:
        l = clause[pos]
        return by_pred.get((l.pred, not l.neg), [])

    newest_possible = [
        any(src[0] == newest_pos for src in compatible(p))
        for p in range(len(clause))
    ]

    out: list[DTuple] = []

    def leaf_ok(kept: list[int], sigma: Subst, pi: Constraint) -> bool:
        # maximality: no kept literal still resolves against any source
        for p in kept:
            lit = apply_lit(clause[p], sigma)
            for _, src_lit, src_pi in compatible(p):
                r_lit, r_pi, _ = rename_clit_fresh(src_lit, src_pi)
                theta = mgu_atoms(lit.atom, r_lit.atom)
                if theta is None:
                    continue
                combined = normalize(
                    _and(apply_constraint(pi, theta), apply_constraint(r_pi, theta))
                )
                if not combined.is_bot:
                    return False
        return True

    def rec(pos: int, kept: list[int], sigma: Subst, pi: Constraint,
            uses: int, used: list[tuple[int, int]]) -> None:
        if need_newest and uses == 0 and not any(newest_possible[p] for p in range(pos, len(clause))):
            return
        if pos == len(clause):
            if keep_limit is not None and len(kept) > keep_limit:
                return
            if need_newest and uses == 0:
                return
            if leaf_ok(kept, sigma, pi):
                out.append(DTuple(clause_idx, tuple(kept), sigma, pi, uses, tuple(used)))
            return
        # resolve this position against each compatible source
        lit = apply_lit(clause[pos], sigma)
        for src_pos, src_lit, src_pi in compatible(pos):
            r_lit, r_pi, _ = rename_clit_fresh(src_lit, src_pi)
            theta = mgu_atoms(lit.atom, r_lit.atom)
            if theta is None:
                continue
            combined = normalize(
                _and(apply_constraint(pi, theta), apply_constraint(r_pi, theta))
            )
            if combined.is_bot:
                continue
            rec(pos + 1, kept, compose(sigma, theta), combined,
                uses + (1 if src_pos == newest_pos else 0),
                used + [(pos, src_pos)])
        # or keep it (keep_limit bounds the remainder size)
        if keep_limit is None or len(kept) < keep_limit:
            rec(pos + 1, kept + [pos], sigma, pi, uses, used)

    rec(0, [], {}, TOP, 0, [])
    return out


# ---------------------------------------------------------------------------
# blocked decisions

def is_blocked(
    trail: Trail,
    d_lit: Lit,
    d_pi: Constraint,
    pool: list[Clause],
    n: int,
) -> Optional[tuple[int, Clause, Lit, Lit]]:
    """Witness (clause index, ground instance, L1, L2) or None.

    The decision must already be undefined in the trail (caller contract).
    A clause blocks the decision when some ground instance becomes false
    with two distinct literals falsified by the decision alone.
    """
    from .constrained import cover

    # decisions covering a single ground atom are never blocked
    d_cover = cover(d_lit.atom, d_pi, n)
    if len(d_cover) <= 1:
        return None

    for ci, clause in enumerate(pool):
        hits = [p for p, l in enumerate(clause)
                if l.pred == d_lit.pred and l.neg != d_lit.neg]
        if len(hits) < 2:
            continue
        leaves = find_candidates(
            ci, clause, list(trail.entries), keep_limit=0,
            extra=[(d_lit, d_pi)],
        )
        for leaf in leaves:
            d_positions = [p for p, src in leaf.used if src < 0]
            if len(d_positions) < 2:
                continue
            base = apply_clause(clause, leaf.sigma)
            vs = clause_vars(base)
            extra_vs = [v for v in lvars(leaf.pi) if v not in vs]
            for delta in ground_assignments(vs + extra_vs, n):
                if violates(delta, leaf.pi):
                    continue
                inst = apply_clause(base, delta)
                for i in range(len(d_positions)):
                    for j in range(i + 1, len(d_positions)):
                        l1 = inst[d_positions[i]]
                        l2 = inst[d_positions[j]]
                        if l1 != l2:
                            return ci, inst, l1, l2
    return None
