"""Problem-file parser and the shared literal/constraint grammar.

Problem files: a `domain a b c .` declaration followed by clause statements
terminated by `.`, e.g. `P(X,a) | -Q(X,Y) .`  Uppercase-initial identifiers
are variables (clause-scoped), lowercase are constants and predicates,
`%` starts a comment, `false .` is the empty clause.  Negation is `-` or
`~`.  Constrained-literal lines (decision scripts, model documents) read
`P(X,Y) :: (X,Y) != (V,V) /\\ X != a`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .constraints import BOT, TOP, Constraint, conj, normalize
from .syntax import Clause, Lit, Signature, fresh_var


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


@dataclass
class _Tok:
    kind: str   # 'name' | 'punct'
    text: str
    line: int
    col: int


_PUNCT = ("::", "!=", "/\\", "(", ")", ",", "|", ".", "-", "~", ":")


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            toks.append(_Tok("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(_Tok("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    return toks


class _Stream:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0

    def peek(self) -> Optional[_Tok]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> _Tok:
        t = self.peek()
        if t is None:
            last = self.toks[-1] if self.toks else _Tok("punct", "", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.col)
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return t


def _is_varname(name: str) -> bool:
    return name[0].isupper()


class _ClauseParser:
    def __init__(self, stream: _Stream, sig_domain: dict[str, int],
                 arities: dict[str, tuple[int, int, int]]):
        self.s = stream
        self.domain = sig_domain
        self.arities = arities  # name -> (arity, line, col of first use)
        self.varmap: dict[str, int] = {}

    def term(self) -> int:
        t = self.s.next()
        if t.kind != "name":
            raise ParseError(f"expected a term, found {t.text!r}", t.line, t.col)
        if _is_varname(t.text):
            if t.text not in self.varmap:
                self.varmap[t.text] = fresh_var()
            return self.varmap[t.text]
        if t.text not in self.domain:
            raise ParseError(f"undeclared constant {t.text!r}", t.line, t.col)
        return self.domain[t.text]

    def literal(self) -> Lit:
        neg = False
        t = self.s.peek()
        if t is not None and t.text in ("-", "~"):
            self.s.next()
            neg = True
        t = self.s.next()
        if t.kind != "name":
            raise ParseError("expected a predicate name", t.line, t.col)
        pred = t.text
        args: list[int] = []
        nxt = self.s.peek()
        if nxt is not None and nxt.text == "(":
            self.s.next()
            args.append(self.term())
            while self.s.peek() is not None and self.s.peek().text == ",":
                self.s.next()
                args.append(self.term())
            self.s.expect(")")
        if pred in self.arities:
            ar, ln, co = self.arities[pred]
            if ar != len(args):
                raise ParseError(
                    f"arity mismatch for {pred!r}: {len(args)} here, "
                    f"{ar} at {ln}:{co}", t.line, t.col)
        else:
            self.arities[pred] = (len(args), t.line, t.col)
        return Lit(neg, pred, tuple(args))

    def tuple_(self) -> tuple[int, ...]:
        t = self.s.peek()
        if t is not None and t.text == "(":
            self.s.next()
            out = [self.term()]
            while self.s.peek() is not None and self.s.peek().text == ",":
                self.s.next()
                out.append(self.term())
            self.s.expect(")")
            return tuple(out)
        return (self.term(),)

    def constraint(self) -> Constraint:
        t = self.s.peek()
        if t is not None and t.kind == "name" and t.text == "TOP":
            self.s.next()
            return TOP
        if t is not None and t.kind == "name" and t.text == "BOT":
            self.s.next()
            return BOT
        subs = []
        while True:
            lhs = self.tuple_()
            self.s.expect("!=")
            rhs = self.tuple_()
            if len(lhs) != len(rhs):
                raise ParseError("disequation tuples differ in length",
                                 t.line if t else 1, t.col if t else 1)
            subs.append((lhs, rhs))
            nxt = self.s.peek()
            if nxt is not None and nxt.text == "/\\":
                self.s.next()
                continue
            break
        return conj(subs)


def parse_problem(text: str) -> tuple[Signature, list[Clause]]:
    toks = _tokenize(text)
    s = _Stream(toks)
    domain: dict[str, int] = {}
    names: list[str] = []
    arities: dict[str, tuple[int, int, int]] = {}
    clauses: list[Clause] = []
    t0 = s.next()
    if t0.text != "domain":
        raise ParseError("problem must start with a domain declaration",
                         t0.line, t0.col)
    while s.peek() is not None and s.peek().text != ".":
        t = s.next()
        if t.kind != "name" or _is_varname(t.text):
            raise ParseError("constants are lowercase identifiers", t.line, t.col)
        if t.text in domain:
            raise ParseError(f"duplicate constant {t.text!r}", t.line, t.col)
        domain[t.text] = len(names)
        names.append(t.text)
    s.expect(".")
    if not names:
        t = toks[0]
        raise ParseError("domain must be nonempty", t.line, t.col)
    while s.peek() is not None:
        t = s.peek()
        if t.text == "domain":
            raise ParseError("duplicate domain declaration", t.line, t.col)
        if t.text == "clause":
            s.next()
            if s.peek() is not None and s.peek().text == ":":
                s.next()
            t = s.peek()
        if t is not None and t.text == "false":
            s.next()
            s.expect(".")
            clauses.append(())
            continue
        cp = _ClauseParser(s, domain, arities)
        lits = [cp.literal()]
        while s.peek() is not None and s.peek().text == "|":
            s.next()
            lits.append(cp.literal())
        s.expect(".")
        clauses.append(tuple(lits))
    sig = Signature({p: a for p, (a, _, _) in arities.items()}, tuple(names))
    return sig, clauses


def parse_clit_line(text: str, sig: Signature) -> tuple[Lit, Constraint]:
    """One `literal :: constraint` line; bare literals mean TOP."""
    toks = _tokenize(text)
    s = _Stream(toks)
    domain = {name: i for i, name in enumerate(sig.domain)}
    arities = {p: (a, 0, 0) for p, a in sig.preds.items()}
    cp = _ClauseParser(s, domain, arities)
    lit = cp.literal()
    pi = TOP
    if s.peek() is not None and s.peek().text == "::":
        s.next()
        pi = cp.constraint()
    if s.peek() is not None:
        t = s.peek()
        raise ParseError(f"trailing input {t.text!r}", t.line, t.col)
    return lit, normalize(pi)


def parse_script(text: str, sig: Signature) -> list[tuple[Lit, Constraint]]:
    out = []
    for raw in text.splitlines():
        line = raw.split("%", 1)[0].strip()
        if line:
            out.append(parse_clit_line(line, sig))
    return out


def parse_model(text: str, sig: Signature) -> tuple[list, list]:
    """Model document -> (entries, compact), each a list of (lit, pi)."""
    entries: list = []
    compact: list = []
    target = entries
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line == "% model":
            target = entries
            continue
        if line == "% compact":
            target = compact
            continue
        if line == "% all other atoms false":
            break
        if line.startswith("%"):
            continue
        target.append(parse_clit_line(line, sig))
    return entries, compact


def trace_decisions(trace_text: str) -> str:
    """Extract the Decide payloads of a trace as a decision script."""
    out = []
    for line in trace_text.splitlines():
        if line.startswith("RULE Decide |"):
            out.append(line.split("DECIDE] ", 1)[1])
    return "\n".join(out) + ("\n" if out else "")


def render_problem(sig: Signature, clauses: list[Clause]) -> str:
    from .render import render_clause
    lines = ["domain " + " ".join(sig.domain) + " ."]
    for c in clauses:
        lines.append(render_clause(sig, c).replace("~", "-") + " .")
    return "\n".join(lines) + "\n"
