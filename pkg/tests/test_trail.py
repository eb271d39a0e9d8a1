import itertools
import random

from eprsat.constrained import clit_cover
from eprsat.constraints import TOP, conj, violates
from eprsat.trail import (
    FALSE,
    TRUE,
    UNDEF,
    InducedOrdering,
    Trail,
    TrailEntry,
    clause_value,
    is_assertive,
)
from eprsat.syntax import Lit, match_args, var_code

x, y, z, u, w, t = (var_code(i) for i in range(6))
v = var_code(30)
a, b, c = 0, 1, 2


def P3(*args):
    return Lit(False, "P", tuple(args))


def nP3(*args):
    return Lit(True, "P", tuple(args))


def Q(*args):
    return Lit(False, "Q", tuple(args))


def nQ(*args):
    return Lit(True, "Q", tuple(args))


def _trail_ex33() -> Trail:
    # (~P(c,x,x); TOP) as a unit propagation, then the decision (P(x,y,z); x != c)
    tr = Trail(3)
    tr.push(TrailEntry(nP3(c, x, x), TOP, level=0, pos=0, reason=0, reason_lit=0))
    tr.push(TrailEntry(P3(x, y, z), conj([((x,), (c,))]), level=1, pos=1))
    return tr


def test_value_of_worked_trail():
    tr = _trail_ex33()
    assert tr.value_of(P3(a, b, c)) == TRUE
    assert tr.value_of(P3(c, a, a)) == FALSE
    assert tr.value_of(P3(c, a, b)) == UNDEF


def test_level_of_worked_trail():
    tr = _trail_ex33()
    assert tr.level_of(P3(a, b, c)) == 1
    assert tr.level_of(P3(c, a, a)) == 0


def test_level_of_propagation_after_decision():
    tr = _trail_ex33()
    tr.push(TrailEntry(nQ(a, x), conj([((x,), (c,))]), level=1, pos=2,
                       reason=2, reason_lit=1))
    assert tr.level_of(Q(a, a)) == 1
    assert tr.level == 1


def test_clause_value_conflict_example():
    # clause 2 of the worked derivation is false under the extended trail
    tr = _trail_ex33()
    tr.push(TrailEntry(nQ(a, x), conj([((x,), (c,))]), level=1, pos=2,
                       reason=2, reason_lit=1))
    clause2 = (nP3(x, y, z), nP3(u, w, t), Q(x, u))
    sigma = {x: a}
    pi = conj([((u,), (c,))])
    assert clause_value(tr, clause2, sigma, pi) == FALSE


def test_clause_value_undefined_literal_gives_undef():
    tr = _trail_ex33()
    clause = (Q(x, y),)
    assert clause_value(tr, clause, {}, TOP) == UNDEF


def test_is_assertive_unit_learned_clause():
    tr = _trail_ex33()
    tr.push(TrailEntry(nQ(a, x), conj([((x,), (c,))]), level=1, pos=2,
                       reason=2, reason_lit=1))
    learned = (nP3(a, y, z),)
    assert is_assertive(tr, learned, {}, TOP)


def test_not_assertive_with_two_top_level_literals():
    tr = _trail_ex33()
    tr.push(TrailEntry(nQ(a, x), conj([((x,), (c,))]), level=1, pos=2,
                       reason=2, reason_lit=1))
    clause2 = (nP3(x, y, z), nP3(u, w, t), Q(x, u))
    assert not is_assertive(tr, clause2, {x: a}, conj([((u,), (c,))]))


def test_induced_interpretation_direct_cover():
    tr = Trail(3)
    tr.push(TrailEntry(P3(x), conj([((x,), (c,))]), level=0, pos=0, reason=0))
    # arity-1 P here
    assert tr.induced_interpretation() == {P3(a), P3(b)}


def test_induced_interpretation_empty_trail():
    assert Trail(3).induced_interpretation() == set()


def test_induced_interpretation_final_worked_trail():
    tr = Trail(3)
    tr.push(TrailEntry(nP3(c, x, x), TOP, 0, 0, reason=0))
    tr.push(TrailEntry(nP3(a, y, z), TOP, 0, 1, reason=4))
    tr.push(TrailEntry(nP3(b, y, z), TOP, 0, 2, reason=5))
    tr.push(TrailEntry(nP3(c, y, z), conj([((y, z), (v, v))]), 1, 3))
    tr.push(TrailEntry(Q(x, y), TOP, 2, 4))
    interp = tr.induced_interpretation()
    assert interp == {Q(d1, d2) for d1 in range(3) for d2 in range(3)}


# ---------------------------------------------------------------------------
# induced ordering

def _brute_cmp(entries, n, c1, c2):
    """Straight-from-definition comparator used as the independent oracle."""

    def def_of(atom):
        for i, (lit, pi) in enumerate(entries):
            if lit.pred != atom.pred:
                continue
            d = match_args(lit.args, atom.args)
            if d is not None and not violates(d, pi):
                return i
        return None

    def atom_less(p, q):
        dp, dq = def_of(p), def_of(q)
        if dp != dq:
            if dp is None:
                return False
            if dq is None:
                return True
            return dp < dq
        return (p.pred, p.args) < (q.pred, q.args)

    def lit_less(p, q):
        if p.atom != q.atom:
            return atom_less(p.atom, q.atom)
        if def_of(p.atom) != def_of(q.atom):  # pragma: no cover - same atom
            raise AssertionError
        return (not p.neg) and q.neg

    def lit_eq(p, q):
        return p == q

    def mul_less(m1, m2):
        # definition: remove common elements; m1 < m2 iff every leftover of m1
        # is dominated by some leftover of m2, and leftovers differ
        m1, m2 = list(m1), list(m2)
        for e in list(m1):
            if e in m2:
                m1.remove(e)
                m2.remove(e)
        if not m1 and not m2:
            return False
        if not m2:
            return False
        if not m1:
            return True
        return all(any(lit_less(p, q) for q in m2) for p in m1)

    def abstract(cl):
        out = []
        for l in cl:
            out.append((def_of(l.atom), l.neg))
        return out

    def abs_key(pair):
        d, neg = pair
        return (1 << 60 if d is None else d, neg)

    def abs_mul_less(a1, a2):
        a1 = sorted((abs_key(p) for p in a1), reverse=True)
        a2 = sorted((abs_key(p) for p in a2), reverse=True)
        if a1 == a2:
            return None  # equal abstractions
        i = 0
        while i < len(a1) and i < len(a2):
            if a1[i] != a2[i]:
                return a1[i] < a2[i]
            i += 1
        return len(a1) < len(a2)

    r = abs_mul_less(abstract(c1), abstract(c2))
    if r is True:
        return -1
    if r is False:
        return 1
    if sorted(c1) == sorted(c2):
        return 0
    return -1 if mul_less(c1, c2) else 1


def _random_ground_clause(rng, n, max_len=3):
    lits = []
    for _ in range(rng.randrange(0, max_len + 1)):
        pred, ar = rng.choice([("P", 1), ("Q", 2)])
        args = tuple(rng.randrange(n) for _ in range(ar))
        lits.append(Lit(rng.random() < 0.5, pred, args))
    return tuple(lits)


def test_cmp_matches_bruteforce_reimplementation():
    rng = random.Random(77)
    n = 2
    entries = [
        (Lit(False, "P", (x,)), conj([((x,), (a,))])),
        (Lit(True, "Q", (x, y)), conj([((x, y), (v, v))])),
    ]
    tr = Trail(n)
    for i, (lit, pi) in enumerate(entries):
        tr.push(TrailEntry(lit, pi, 0, i, reason=0))
    ordering = InducedOrdering.from_trail(tr)
    for _ in range(400):
        c1 = _random_ground_clause(rng, n)
        c2 = _random_ground_clause(rng, n)
        assert ordering.cmp_clauses(c1, c2) == _brute_cmp(entries, n, c1, c2)


def test_cmp_total_order_properties():
    rng = random.Random(97)
    n = 2
    tr = Trail(n)
    tr.push(TrailEntry(Lit(False, "Q", (x, y)), TOP, 0, 0, reason=0))
    ordering = InducedOrdering.from_trail(tr)
    clauses = [_random_ground_clause(rng, n) for _ in range(30)]
    for c1, c2 in itertools.combinations(clauses, 2):
        r12 = ordering.cmp_clauses(c1, c2)
        r21 = ordering.cmp_clauses(c2, c1)
        assert r12 == -r21
    for c1 in clauses:
        for c2 in clauses:
            for c3 in clauses:
                if ordering.cmp_clauses(c1, c2) < 0 and ordering.cmp_clauses(c2, c3) < 0:
                    assert ordering.cmp_clauses(c1, c3) < 0


def test_empty_clause_is_minimal():
    tr = Trail(2)
    tr.push(TrailEntry(Lit(False, "P", (x,)), TOP, 0, 0, reason=0))
    ordering = InducedOrdering.from_trail(tr)
    rng = random.Random(5)
    for _ in range(100):
        c = _random_ground_clause(rng, 2)
        if c:
            assert ordering.cmp_clauses((), c) == -1


def test_atoms_by_entry_position():
    tr = Trail(2)
    tr.push(TrailEntry(Lit(False, "Q", (a, a)), TOP, 0, 0, reason=0))
    tr.push(TrailEntry(Lit(False, "P", (x,)), TOP, 0, 1, reason=0))
    ordering = InducedOrdering.from_trail(tr)
    assert ordering.cmp_atoms(Lit(False, "Q", (a, a)), Lit(False, "P", (a,))) == -1
    # undefined atoms compare by base order
    assert ordering.cmp_atoms(Lit(False, "Q", (a, b)), Lit(False, "Q", (b, a))) == -1


def test_subsumption_embeds_in_ordering():
    # ground C subset of D implies C < D for any induced ordering
    rng = random.Random(13)
    for round_ in range(100):
        n = 2
        tr = Trail(n)
        if rng.random() < 0.7:
            tr.push(TrailEntry(Lit(False, "Q", (x, y)),
                               conj([((x, y), (v, v))]) if rng.random() < 0.5 else TOP,
                               0, 0, reason=0))
        ordering = InducedOrdering.from_trail(tr)
        d = _random_ground_clause(rng, n, max_len=4)
        if not d:
            continue
        k = rng.randrange(0, len(d))
        cidx = rng.sample(range(len(d)), k)
        csub = tuple(d[i] for i in sorted(cidx))
        if sorted(csub) == sorted(d):
            continue
        assert ordering.cmp_clauses(csub, d) == -1
