"""Deterministic text forms: literals, constraints, trail entries, traces,
and the model document.

Rendering canonicalizes variables per expression (first occurrence gets X,
then Y, Z, U, V, W, S, T, then X1, X2, ...), so output is stable across
processes even though internal variable ids are allocation-dependent.  All
rendered forms parse back through the problem grammar: variables are
uppercase-initial, constants and predicates lowercase.
"""
from __future__ import annotations

from typing import Iterable, Optional

from .constrained import CLit, clit_cover
from .constraints import Constraint, conj, normalize
from .syntax import Clause, Lit, Signature, Subst

_BASE_NAMES = ("X", "Y", "Z", "U", "V", "W", "S", "T")


class Namer:
    """Stable display names for variables, in first-use order."""

    def __init__(self, sig: Signature):
        self.sig = sig
        self.names: dict[int, str] = {}

    def term(self, t: int) -> str:
        if t >= 0:
            return self.sig.domain[t]
        if t not in self.names:
            i = len(self.names)
            self.names[t] = (_BASE_NAMES[i] if i < len(_BASE_NAMES)
                             else f"X{i - len(_BASE_NAMES) + 1}")
        return self.names[t]


def render_lit(sig: Signature, lit: Lit, namer: Optional[Namer] = None) -> str:
    namer = namer or Namer(sig)
    body = lit.pred
    if lit.args:
        body += "(" + ",".join(namer.term(a) for a in lit.args) + ")"
    return ("~" if lit.neg else "") + body


def render_pi(sig: Signature, pi: Constraint, namer: Optional[Namer] = None) -> str:
    namer = namer or Namer(sig)
    if pi.is_top:
        return "TOP"
    if pi.is_bot:
        return "BOT"

    def tup(ts):
        if len(ts) == 1:
            return namer.term(ts[0])
        return "(" + ",".join(namer.term(t) for t in ts) + ")"

    return " /\\ ".join(f"{tup(l)} != {tup(r)}" for l, r in pi.subs)


def render_clit(sig: Signature, lit: Lit, pi: Constraint) -> str:
    namer = Namer(sig)
    return f"{render_lit(sig, lit, namer)} :: {render_pi(sig, pi, namer)}"


def render_clause(sig: Signature, clause: Clause, namer: Optional[Namer] = None) -> str:
    if not clause:
        return "false"
    namer = namer or Namer(sig)
    return " | ".join(render_lit(sig, l, namer) for l in clause)


def render_subst(sig: Signature, sigma: Subst, namer: Namer,
                 order: Iterable[int]) -> str:
    items = []
    seen = set()
    for v in order:
        if v in sigma and v not in seen:
            seen.add(v)
            items.append(f"{namer.term(v)}<-{namer.term(sigma[v])}")
    for v in sigma:
        if v not in seen:
            items.append(f"{namer.term(v)}<-{namer.term(sigma[v])}")
    return "{" + ", ".join(items) + "}"


def render_entry(sig: Signature, entry) -> str:
    namer = Namer(sig)
    body = f"{render_lit(sig, entry.lit, namer)} :: {render_pi(sig, entry.pi, namer)}"
    if entry.is_decision:
        return f"[lvl {entry.level} DECIDE] {body}"
    return f"[reason C{entry.reason + 1}] {body}"


def render_conflict(sig: Signature, cs, n_input: int) -> str:
    namer = Namer(sig)
    clause_txt = render_clause(sig, cs.clause, namer)
    order = [a for l in cs.clause for a in l.args if a < 0]
    sub_txt = render_subst(sig, cs.sigma, namer, order)
    pi_txt = render_pi(sig, cs.pi, namer)
    head = f"(C{cs.origin + 1}) " if cs.origin is not None else ""
    return f"{head}{clause_txt} ; {sub_txt} ; {pi_txt}"


def render_trace(events) -> str:
    return "".join(f"RULE {e.rule} | level {e.level} | {e.payload}\n"
                   for e in events)


# ---------------------------------------------------------------------------
# model document

def merge_cover(sig: Signature, clits: list[CLit], cap: int = 6000) -> list[CLit]:
    """Greedy consolidation: drop a subconstraint of one literal when the
    widened cover equals the union with another literal's cover.

    Checked by ground enumeration, so only applied when per-predicate
    universes stay below `cap` ground atoms.
    """
    n = sig.n
    out = list(clits)
    changed = True
    while changed:
        changed = False
        for i in range(len(out)):
            for j in range(len(out)):
                if i == j:
                    continue
                a, b = out[i], out[j]
                if a.lit.pred != b.lit.pred or a.lit.neg != b.lit.neg:
                    continue
                if n ** len(b.lit.args) > cap:
                    continue
                if b.pi.kind != "and":
                    continue
                ga = clit_cover(a, n)
                gb = clit_cover(b, n)
                merged = None
                for k in range(len(b.pi.subs)):
                    widened = normalize(conj(b.pi.subs[:k] + b.pi.subs[k + 1:]))
                    w = CLit(b.lit, widened)
                    if clit_cover(w, n) == ga | gb:
                        merged = w
                        break
                if merged is not None:
                    keep_low, drop_high = (i, j) if i < j else (j, i)
                    out[keep_low] = merged
                    del out[drop_high]
                    changed = True
                    break
            if changed:
                break
    return out


def render_model(sig: Signature, entries: list[CLit]) -> str:
    lines = ["% model"]
    for cl in entries:
        lines.append(render_clit(sig, cl.lit, cl.pi))
    lines.append("% compact")
    for cl in merge_cover(sig, entries):
        lines.append(render_clit(sig, cl.lit, cl.pi))
    lines.append("% all other atoms false")
    return "\n".join(lines) + "\n"
