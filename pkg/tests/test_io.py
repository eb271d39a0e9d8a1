import random

import pytest

from eprsat.constrained import CLit, clit_cover
from eprsat.constraints import TOP, conj
from eprsat.oracle import GenParams, gen_random_instance
from eprsat.parser import (
    ParseError,
    parse_clit_line,
    parse_model,
    parse_problem,
    parse_script,
    render_problem,
    trace_decisions,
)
from eprsat.render import (
    merge_cover,
    render_clit,
    render_model,
    render_pi,
    render_trace,
)
from eprsat.solver import RunConfig, Solver
from eprsat.syntax import Lit, Signature, var_code

x, y = var_code(0), var_code(1)
v = var_code(9)
a, b, c = 0, 1, 2


def test_parse_minimal_problem():
    sig, clauses = parse_problem("domain a b . clause: P(X) .")
    assert sig.preds == {"P": 1} and sig.domain == ("a", "b")
    assert len(clauses) == 1 and len(clauses[0]) == 1
    lit = clauses[0][0]
    assert lit.pred == "P" and not lit.neg and lit.args[0] < 0


def test_parse_worked_example_shape():
    sig, clauses = parse_problem("""
    domain a b c .
    -P(c,X,X) .
    -P(X,Y,Z) | -P(U,W,T) | Q(X,U) .
    -P(X,Y,Z) | -Q(a,X) .
    -Q(X,b) | -P(X,Y,Z) .
    """)
    assert sig.preds == {"P": 3, "Q": 2}
    assert sig.domain == ("a", "b", "c")
    assert len(clauses) == 4


def test_parse_arity_mismatch_names_both_occurrences():
    with pytest.raises(ParseError) as exc:
        parse_problem("domain a . P(X) | P(X,X) .")
    assert "arity mismatch" in str(exc.value)
    assert "1 at" in str(exc.value) or "2 here" in str(exc.value)


def test_parse_error_positions():
    with pytest.raises(ParseError) as exc:
        parse_problem("domain a .\nP(X) | $ .")
    assert str(exc.value).startswith("2:")


def test_parse_undeclared_constant():
    with pytest.raises(ParseError) as exc:
        parse_problem("domain a . P(zz) .")
    assert "undeclared" in str(exc.value)


def test_parse_empty_clause_keyword():
    _, clauses = parse_problem("domain a . false .")
    assert clauses == [()]


def test_parse_comments_and_whitespace():
    sig, clauses = parse_problem("""
    % a comment
    domain a b .   % trailing comment
    P(a) .
    """)
    assert clauses == [(Lit(False, "P", (0,)),)]


def test_problem_roundtrip_fixpoint():
    text = """
    domain a b c .
    -P(c,X,X) .
    -P(X,Y,Z) | -P(U,W,T) | Q(X,U) .
    false .
    """
    sig1, c1 = parse_problem(text)
    r1 = render_problem(sig1, c1)
    sig2, c2 = parse_problem(r1)
    r2 = render_problem(sig2, c2)
    assert r1 == r2


def test_clit_line_roundtrip():
    sig = Signature({"P": 2}, ("a", "b"))
    for line in ["P(X,Y) :: (X,Y) != (Z,Z) /\\ X != a",
                 "~P(a,X) :: TOP",
                 "P(a,b) :: BOT",
                 "P(X,X) :: TOP"]:
        lit, pi = parse_clit_line(line, sig)
        again = render_clit(sig, lit, pi)
        lit2, pi2 = parse_clit_line(again, sig)
        assert render_clit(sig, lit2, pi2) == again


def test_constraint_surface_syntax():
    sig = Signature({"P": 2}, ("a", "b"))
    pi = conj([((x, y), (v, v)), ((y,), (a,))])
    from eprsat.render import Namer
    namer = Namer(sig)
    namer.term(x), namer.term(y)
    assert render_pi(sig, pi, namer) == "(X,Y) != (Z,Z) /\\ Y != a"


def test_script_parsing_skips_blank_and_comment_lines():
    sig = Signature({"P": 1}, ("a", "b"))
    script = parse_script("\n% pick P first\nP(X)\n\n~P(a) :: TOP\n", sig)
    assert len(script) == 2
    assert script[0][1].is_top


def test_model_document_roundtrip():
    sig = Signature({"P": 3, "Q": 2}, ("a", "b", "c"))
    z = var_code(2)
    entries = [
        CLit(Lit(True, "P", (c, x, x)), TOP),
        CLit(Lit(True, "P", (c, x, y)), conj([((x, y), (v, v))])),
        CLit(Lit(False, "Q", (x, y)), TOP),
    ]
    doc = render_model(sig, entries)
    got_entries, got_compact = parse_model(doc, sig)
    redoc = render_model(sig, [CLit(l, p) for l, p in got_entries])
    assert redoc == doc
    assert doc.endswith("% all other atoms false\n")


def test_merge_cover_fills_holes():
    sig = Signature({"P": 1}, ("a", "b", "c"))
    ground = CLit(Lit(False, "P", (a,)), TOP)
    rest = CLit(Lit(False, "P", (x,)), conj([((x,), (a,))]))
    merged = merge_cover(sig, [ground, rest])
    assert len(merged) == 1
    assert clit_cover(merged[0], 3) == {Lit(False, "P", (d,)) for d in range(3)}


def test_merge_cover_keeps_unmergeable():
    sig = Signature({"P": 1}, ("a", "b", "c"))
    one = CLit(Lit(False, "P", (a,)), TOP)
    other = CLit(Lit(True, "P", (b,)), TOP)
    assert len(merge_cover(sig, [one, other])) == 2


def test_trace_replay_reproduces_trace():
    rng = random.Random(0)
    for seed in range(25):
        p = GenParams(n_preds=2, max_arity=2, domain_size=3, n_clauses=10,
                      max_lits=3, seed=seed)
        sig, clauses = gen_random_instance(p)
        v1 = Solver(sig, clauses, RunConfig()).solve()
        t1 = render_trace(v1.trace)
        script = parse_script(trace_decisions(t1), sig)
        v2 = Solver(sig, clauses, RunConfig(script=script)).solve()
        t2 = render_trace(v2.trace)
        assert t1 == t2


def test_render_trace_format():
    sig, clauses = parse_problem("domain a . P(a) .")
    v = Solver(sig, clauses, RunConfig()).solve()
    text = render_trace(v.trace)
    assert text.splitlines()[0] == "RULE Propagate | level 0 | [reason C1] P(a) :: TOP"
    assert text.splitlines()[-1].startswith("RULE Success | level -1 |")
