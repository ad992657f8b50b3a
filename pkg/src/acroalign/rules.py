"""Obligatory single-symbol rewrite rules with regular contexts.

A rule replaces every occurrence of its focus symbol whose left and right
contexts match, simultaneously and on the input side only: contexts are
always evaluated against the original string, never against earlier
replacements.  That restriction is deliberate; no rule in the cascade used
here creates or destroys a context needed by the same rule.

Context syntax (both sides): literal symbols, `(`...`)`, `|`, `*`, `+`, `?`,
`.` for any alphabet symbol, `[abc]` / `[^abc]` classes, and `#` for the
string boundary.  A left context matches when the pattern matches a suffix
of the text before the focus (`#` pins it to the string start); a right
context matches a prefix of the text after the focus (`#` matches the string
end).  An omitted context always matches.

Two independent routes compute the same function: :func:`rewrite_once`
applies a rule directly to a string (via the `re` module), while
:func:`compile_rule` builds a 2-tape machine relating every input to its
rewrite.  `compose_cascade` chains compiled rules the way `rewrite_cascade`
chains the string function.
"""

from __future__ import annotations

import itertools
import re as _re
from dataclasses import dataclass
from typing import Optional, Sequence

from .machine import (
    EPSILON,
    LabelTuple,
    Machine,
    Transition,
    enumerate_paths,
    join,
    project,
    remove_epsilons,
    trim,
)
from .semiring import TropicalWeight

__all__ = [
    "RULE_ALPHABET",
    "BOUNDARY",
    "RewriteRule",
    "RegexSyntaxError",
    "rewrite_once",
    "rewrite_cascade",
    "compile_rule",
    "compose_cascade",
    "apply_transducer",
    "OP_REFINEMENT_RULES",
]

#: Operation symbols rewrite rules range over.
RULE_ALPHABET = "aiugG12345678_"

#: String-boundary marker usable in contexts.
BOUNDARY = "#"


class RegexSyntaxError(ValueError):
    """Context expression rejected; carries the offending position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


@dataclass(frozen=True)
class RewriteRule:
    """Replace `focus` by `replacement` ('' deletes) between the two contexts."""

    focus: str
    replacement: str
    left: Optional[str] = None
    right: Optional[str] = None

    def __post_init__(self):
        if len(self.focus) != 1:
            raise ValueError("rule focus must be a single symbol")
        if len(self.replacement) > 1:
            raise ValueError("rule replacement must be a single symbol or ''")


# ---------------------------------------------------------------------------
# context expressions

_Lit = "lit"        # payload: symbol
_Any = "any"        # any alphabet symbol
_Class = "class"    # payload: (frozenset, negated)
_Mark = "mark"      # string boundary
_Seq = "seq"        # payload: list of nodes
_Alt = "alt"        # payload: list of nodes
_Rep = "rep"        # payload: (node, min_count, unbounded)

_METACHARS = set("()|*+?[]^#.")


def parse_context(pattern: str):
    """Parse a context expression into a small AST; errors carry positions."""
    pos = 0

    def peek():
        return pattern[pos] if pos < len(pattern) else None

    def alt():
        nonlocal pos
        items = [seq()]
        while peek() == "|":
            pos += 1
            items.append(seq())
        return items[0] if len(items) == 1 else (_Alt, items)

    def seq():
        nonlocal pos
        items = []
        while peek() is not None and peek() not in "|)":
            items.append(repeated())
        if not items:
            raise RegexSyntaxError("empty alternative", pos)
        return items[0] if len(items) == 1 else (_Seq, items)

    def repeated():
        nonlocal pos
        node = atom()
        while peek() in ("*", "+", "?"):
            op = pattern[pos]
            pos += 1
            if op == "*":
                node = (_Rep, (node, 0, True))
            elif op == "+":
                node = (_Rep, (node, 1, True))
            else:
                node = (_Rep, (node, 0, False))
        return node

    def atom():
        nonlocal pos
        ch = peek()
        if ch is None:
            raise RegexSyntaxError("unexpected end of pattern", pos)
        if ch == "(":
            opened = pos
            pos += 1
            node = alt()
            if peek() != ")":
                raise RegexSyntaxError("unclosed group", opened)
            pos += 1
            return node
        if ch == "[":
            opened = pos
            pos += 1
            negated = peek() == "^"
            if negated:
                pos += 1
            chars = set()
            while peek() not in ("]", None):
                chars.add(pattern[pos])
                pos += 1
            if peek() != "]":
                raise RegexSyntaxError("unclosed class", opened)
            pos += 1
            if not chars:
                raise RegexSyntaxError("empty class", opened)
            return (_Class, (frozenset(chars), negated))
        if ch == ".":
            pos += 1
            return (_Any, None)
        if ch == BOUNDARY:
            pos += 1
            return (_Mark, None)
        if ch in _METACHARS:
            raise RegexSyntaxError(f"unexpected {ch!r}", pos)
        pos += 1
        return (_Lit, ch)

    node = alt()
    if pos != len(pattern):
        raise RegexSyntaxError(f"unexpected {pattern[pos]!r}", pos)
    return node


def _node_symbols(node, alphabet: frozenset) -> frozenset:
    kind, payload = node
    if kind == _Lit:
        return frozenset(payload)
    if kind == _Any:
        return alphabet
    if kind == _Mark:
        return frozenset(BOUNDARY)
    if kind == _Class:
        chars, negated = payload
        return alphabet - chars if negated else chars & alphabet


def _to_re(node, alphabet: frozenset) -> str:
    """Translate an AST to a `re` pattern over alphabet symbols plus `#`."""
    kind, payload = node
    if kind in (_Lit, _Any, _Mark, _Class):
        syms = _node_symbols(node, alphabet)
        if not syms:
            return "(?!)"
        if len(syms) == 1:
            return _re.escape(next(iter(syms)))
        return "[" + "".join(_re.escape(s) for s in sorted(syms)) + "]"
    if kind == _Seq:
        return "".join(_to_re(n, alphabet) for n in payload)
    if kind == _Alt:
        return "(?:" + "|".join(_to_re(n, alphabet) for n in payload) + ")"
    node2, lo, unbounded = payload
    inner = "(?:" + _to_re(node2, alphabet) + ")"
    if unbounded:
        return inner + ("*" if lo == 0 else "+")
    return inner + "?"


# ---------------------------------------------------------------------------
# string route

_matcher_cache: dict = {}


def _context_matchers(rule: RewriteRule, alphabet: str):
    key = (rule, alphabet)
    if key not in _matcher_cache:
        alpha = frozenset(alphabet)
        any_all = "[" + "".join(_re.escape(s) for s in sorted(alpha | {BOUNDARY})) + "]*"
        left = right = None
        if rule.left is not None:
            left = _re.compile(any_all + "(?:" + _to_re(parse_context(rule.left), alpha) + ")")
        if rule.right is not None:
            right = _re.compile("(?:" + _to_re(parse_context(rule.right), alpha) + ")" + any_all)
        _matcher_cache[key] = (left, right)
    return _matcher_cache[key]


def rewrite_once(rule: RewriteRule, s: str, alphabet: str = RULE_ALPHABET) -> str:
    """Apply one rule everywhere it matches, simultaneously."""
    left, right = _context_matchers(rule, alphabet)
    out = []
    for p, ch in enumerate(s):
        if ch != rule.focus:
            out.append(ch)
            continue
        if left is not None and not left.fullmatch(BOUNDARY + s[:p]):
            out.append(ch)
            continue
        if right is not None and not right.fullmatch(s[p + 1:] + BOUNDARY):
            out.append(ch)
            continue
        out.append(rule.replacement)
    return "".join(out)


def rewrite_cascade(rules: Sequence[RewriteRule], s: str,
                    alphabet: str = RULE_ALPHABET) -> str:
    """Feed each rule's output to the next, in order."""
    for rule in rules:
        s = rewrite_once(rule, s, alphabet)
    return s


# ---------------------------------------------------------------------------
# machine route

_T_ANY_ALL = object()  # internal atom: any symbol including the boundary


def _thompson(node, alphabet: frozenset):
    """Build an epsilon-NFA: (n_states, eps edges, symbol edges, start, final)."""
    counter = itertools.count()
    eps = []
    sym = []

    def build(n):
        if n is _T_ANY_ALL:
            s, f = next(counter), next(counter)
            sym.append((s, alphabet | {BOUNDARY}, f))
            return s, f
        kind, payload = n
        if kind in (_Lit, _Any, _Mark, _Class):
            s, f = next(counter), next(counter)
            sym.append((s, _node_symbols(n, alphabet), f))
            return s, f
        if kind == _Seq:
            first_s, prev_f = build(payload[0])
            for item in payload[1:]:
                s, f = build(item)
                eps.append((prev_f, s))
                prev_f = f
            return first_s, prev_f
        if kind == _Alt:
            s, f = next(counter), next(counter)
            for item in payload:
                isrc, ifin = build(item)
                eps.append((s, isrc))
                eps.append((ifin, f))
            return s, f
        inner, lo, unbounded = payload
        s, f = next(counter), next(counter)
        isrc, ifin = build(inner)
        eps.append((s, isrc))
        eps.append((ifin, f))
        if lo == 0:
            eps.append((s, f))
        if unbounded:
            eps.append((ifin, isrc))
        return s, f

    start, final = build(node)
    return next(counter), eps, sym, start, final


def _reverse_nfa(nfa):
    n, eps, sym, start, final = nfa
    return (n,
            [(b, a) for a, b in eps],
            [(b, chars, a) for a, chars, b in sym],
            final,
            start)


def _determinize(nfa, symbols: Sequence[str]):
    """Subset construction; returns (transitions list-of-dicts, finals set, start id)."""
    n, eps, sym, start, final = nfa
    eps_out = {}
    for a, b in eps:
        eps_out.setdefault(a, []).append(b)
    sym_out = {}
    for a, chars, b in sym:
        sym_out.setdefault(a, []).append((chars, b))

    def closure(states):
        stack = list(states)
        seen = set(states)
        while stack:
            q = stack.pop()
            for b in eps_out.get(q, ()):
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        return frozenset(seen)

    start_set = closure({start})
    ids = {start_set: 0}
    worklist = [start_set]
    delta = [{}]
    finals = set()
    while worklist:
        cur = worklist.pop()
        cid = ids[cur]
        if final in cur:
            finals.add(cid)
        for c in symbols:
            nxt = closure({b for q in cur for chars, b in sym_out.get(q, ()) if c in chars})
            if nxt not in ids:
                ids[nxt] = len(ids)
                delta.append({})
                worklist.append(nxt)
            delta[cid][c] = ids[nxt]
    return delta, finals, 0


def _seq_nodes(nodes):
    return nodes[0] if len(nodes) == 1 else (_Seq, list(nodes))


def _left_tracker(pattern: Optional[str], alphabet: frozenset):
    """DFA telling, after each prefix, whether the left context holds there."""
    any_star = (_Rep, (_T_ANY_ALL, 0, True))
    node = any_star if pattern is None else _seq_nodes([any_star, parse_context(pattern)])
    symbols = sorted(alphabet) + [BOUNDARY]
    delta, finals, start = _determinize(_thompson(node, alphabet), symbols)
    return delta, finals, delta[start][BOUNDARY]


def _right_tracker(pattern: Optional[str], alphabet: frozenset):
    """Reverse DFA reading the remaining suffix backwards, boundary first."""
    any_star = (_Rep, (_T_ANY_ALL, 0, True))
    node = any_star if pattern is None else _seq_nodes([parse_context(pattern), any_star])
    symbols = sorted(alphabet) + [BOUNDARY]
    delta, finals, start = _determinize(_reverse_nfa(_thompson(node, alphabet)), symbols)
    return delta, finals, delta[start][BOUNDARY]


def compile_rule(rule: RewriteRule, alphabet: str = RULE_ALPHABET) -> Machine:
    """A 2-tape, zero-weight machine relating s to `rewrite_once(rule, s)`.

    The left context is tracked by a prefix DFA; the right context by a
    suffix DFA run in reverse, whose state along the string is guessed and
    checked transition-locally, so exactly one accepting path exists per
    input and the relation is a total function on strings over `alphabet`.
    """
    alpha = frozenset(alphabet)
    if rule.focus not in alpha:
        raise ValueError(f"rule focus {rule.focus!r} outside the alphabet")
    if rule.replacement and rule.replacement not in alpha:
        raise ValueError(f"rule replacement {rule.replacement!r} outside the alphabet")
    l_delta, l_finals, l_start = _left_tracker(rule.left, alpha)
    r_delta, r_finals, r_end = _right_tracker(rule.right, alpha)

    ids = {}

    def sid(l, r):
        if (l, r) not in ids:
            ids[(l, r)] = len(ids) + 1
        return ids[(l, r)]

    one = TropicalWeight.one()
    transitions = []
    for l in range(len(l_delta)):
        l_ok = l in l_finals
        for r_next in range(len(r_delta)):
            r_ok = r_next in r_finals
            for c in sorted(alpha):
                r_cur = r_delta[r_next][c]
                out = rule.replacement if (c == rule.focus and l_ok and r_ok) else c
                transitions.append(Transition(
                    sid(l, r_cur), LabelTuple((c, out)), one, sid(l_delta[l][c], r_next)))

    # Any suffix-DFA state may hold at the string start; epsilon-fan from a
    # fresh initial covers every guess, and acceptance pins the chain's end.
    eps = LabelTuple((EPSILON, EPSILON))
    for r in range(len(r_delta)):
        transitions.insert(0, Transition(0, eps, one, sid(l_start, r)))
    finals = {}
    for (l, r), q in ids.items():
        if r == r_end:
            finals[q] = one
    return trim(Machine(2, len(ids) + 1, 0, finals, transitions))


def compose_cascade(machines: Sequence[Machine]) -> Machine:
    """Chain 2-tape machines: each one's output tape feeds the next's input."""
    composed = None
    for m in machines:
        if m.arity != 2:
            raise ValueError(f"compose_cascade needs 2-tape machines, got arity {m.arity}")
        if composed is None:
            composed = m
        else:
            composed = trim(project(join(composed, m, [(2, 1)]), [1, 3]))
    if composed is None:
        raise ValueError("compose_cascade: no machines given")
    return composed


def apply_transducer(m: Machine, s: str, alphabet=None) -> Optional[str]:
    """Run a single-valued 2-tape machine on an input string.

    Returns the unique output, or None when the input is out of the domain.
    Raises ValueError if the machine turns out not to be single-valued here.
    """
    from .machine import ALPHABET, bind

    bound = bind(m, {1: s}, alphabet or ALPHABET)
    outputs = enumerate_paths(bound, 2, alphabet or ALPHABET)
    if not outputs:
        return None
    if len(outputs) > 1:
        raise ValueError(f"machine is not single-valued on {s!r}: "
                         f"{[p.strings[0] for p in outputs]}")
    return outputs[0].strings[0]


# ---------------------------------------------------------------------------
# the operation-refinement cascade

def _position_rule(k: int) -> RewriteRule:
    # Acronym letter in word position k (capped: position 8 means "8 or later").
    left = "(#|_)" + "[^_]" * (k - 1)
    if k == 8:
        left += "[^_]*"
    return RewriteRule("a", str(k), left=left)


#: Refines raw alignment operations {a,i,_}: word-initial letters of skipped
#: non-leading words become u, gap letters before a used letter in the same
#: word become g (G word-initially), and used letters get their word position.
OP_REFINEMENT_RULES = (
    RewriteRule("i", "u", left="a.*_", right="i*(_|#)"),
    RewriteRule("i", "g", right="i*a"),
    RewriteRule("g", "G", left="#|_"),
) + tuple(_position_rule(k) for k in range(1, 9))
