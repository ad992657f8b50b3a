"""Builds the alignment machinery and assembles the extractor.

The pieces, by tape layout of the assembled 6-tape machine:

1. text chunk, 2. acronym (read), 3. dotted analysis, 4. raw operations over
{a,i,_}, 5. analysis with leading unused words removed, 6. refined operations
(the only weighted tape).  The deliverable 3-tape extractor keeps tapes
1, 2 and 5.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .machine import (
    ANY_BUT_UNDERSCORE,
    EPSILON,
    LabelTuple,
    Machine,
    Transition,
    Wildcard,
    atom,
    concat,
    join,
    project,
    star,
    trim,
    union,
)
from .rules import OP_REFINEMENT_RULES, RewriteRule, compile_rule, compose_cascade
from .semiring import TropicalWeight

__all__ = [
    "DEFAULT_COSTS",
    "COST_SYMBOLS",
    "ExtractorBundle",
    "build_alignment_core",
    "build_op_refiner",
    "build_prefix_trimmer",
    "build_cost_model",
    "assemble",
    "build_bundle",
    "load_cost_table",
]

#: Cost of each refined operation symbol: separators, kept letters and
#: word-initial used letters are free; skipping and gaps cost, increasingly
#: so at word starts; later word positions of used letters cost extra.
DEFAULT_COSTS = {
    "_": 0.0, "i": 0.0, "u": 2.0, "g": 1.0, "G": 3.0,
    "1": 0.0, "2": 1.0, "3": 1.5, "4": 2.0, "5": 2.5, "6": 3.0, "7": 3.5, "8": 4.0,
}

COST_SYMBOLS = frozenset(DEFAULT_COSTS)


def build_alignment_core() -> Machine:
    """4-tape core relating chunk/acronym to dotted analyses and raw ops.

    Three alternatives repeat freely: use a letter (a dot is emitted, then the
    same symbol appears on tapes 1-3 and `a` on tape 4), skip a letter (copied
    to tape 3, `i` on tape 4), or pass a separator.  Tape 2 therefore carries
    exactly the used letters, and dots appear only right before them.
    """
    w = ANY_BUT_UNDERSCORE
    dot = atom((EPSILON, EPSILON, ".", EPSILON))
    use = atom((w, w, w, "a"), groups=[(1, 2, 3)])
    skip = atom((w, EPSILON, w, "i"), groups=[(1, 3)])
    separator = atom(("_", EPSILON, "_", "_"))
    return trim(star(union(union(concat(dot, use), skip), separator)))


def build_op_refiner(rules: Sequence[RewriteRule] = OP_REFINEMENT_RULES) -> Machine:
    """2-tape composition of the compiled refinement cascade, all weights 0."""
    return compose_cascade([compile_rule(rule) for rule in rules])


def build_prefix_trimmer() -> Machine:
    """2-tape machine deleting leading dotless words and their underscores.

    Mode states: word start in the deletable region, inside a word being
    deleted, copying the first kept word before its dot, copying freely after
    it.  The first kept word must contain a dot, which makes the relation a
    partial function defined exactly on strings with a dot.
    """
    word_char = Wildcard(frozenset("_."))
    any_char = Wildcard(frozenset())
    one = TropicalWeight.one()
    start, deleting, kept_head, kept = 0, 1, 2, 3

    def t(src, labels, dst, groups=()):
        return Transition(src, LabelTuple(labels, groups), one, dst)

    transitions = [
        t(start, (word_char, EPSILON), deleting),
        t(deleting, (word_char, EPSILON), deleting),
        t(deleting, ("_", EPSILON), start),
        t(start, (word_char, word_char), kept_head, groups=[(1, 2)]),
        t(start, (".", "."), kept),
        t(kept_head, (word_char, word_char), kept_head, groups=[(1, 2)]),
        t(kept_head, (".", "."), kept),
        t(kept, (any_char, any_char), kept, groups=[(1, 2)]),
    ]
    return Machine(2, 4, start, {kept: one}, transitions)


def build_cost_model(costs: Optional[Mapping[str, float]] = None) -> Machine:
    """1-tape machine pricing operation strings symbol by symbol."""
    table = DEFAULT_COSTS if costs is None else dict(costs)
    missing = COST_SYMBOLS - set(table)
    if missing:
        raise ValueError(f"cost table is missing symbols: {sorted(missing)}")
    pieces = None
    for sym in sorted(table):
        piece = atom((sym,), TropicalWeight(table[sym]))
        pieces = piece if pieces is None else union(pieces, piece)
    return trim(star(pieces))


@dataclass
class ExtractorBundle:
    """All build products; `extractor` is the deliverable 3-tape machine."""

    alignment_core: Machine
    op_refiner: Machine
    prefix_trimmer: Machine
    cost_model: Machine
    full_extractor: Machine
    extractor: Machine


def assemble(alignment_core: Machine, prefix_trimmer: Machine,
             op_refiner: Machine, cost_model: Machine) -> ExtractorBundle:
    """Join the parts, then project the 6-tape result down to tapes 1, 2, 5."""
    with_trimmed = trim(join(alignment_core, prefix_trimmer, [(3, 1)]))
    with_ops = trim(join(with_trimmed, op_refiner, [(4, 1)]))
    full = trim(join(with_ops, cost_model, [(6, 1)]))
    extractor = trim(project(full, [1, 2, 5]))
    return ExtractorBundle(alignment_core, op_refiner, prefix_trimmer,
                           cost_model, full, extractor)


def build_bundle(costs: Optional[Mapping[str, float]] = None) -> ExtractorBundle:
    """Build everything with the given (or default) cost table."""
    return assemble(build_alignment_core(), build_prefix_trimmer(),
                    build_op_refiner(), build_cost_model(costs))


def load_cost_table(path) -> dict:
    """Read `symbol = weight` lines; entries override the default table.

    `#` starts a comment; blank lines are ignored.  Symbols must be operation
    symbols; weights must be finite and non-negative.
    """
    table = dict(DEFAULT_COSTS)
    allowed = COST_SYMBOLS | {"a"}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {lineno}: expected 'symbol = weight'")
            sym, _, value = line.partition("=")
            sym = sym.strip()
            if sym not in allowed:
                raise ValueError(f"{path}: line {lineno}: unknown op symbol {sym!r}")
            try:
                weight = float(value.strip())
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: bad weight {value.strip()!r}")
            if not weight >= 0 or weight == float("inf"):
                raise ValueError(f"{path}: line {lineno}: weight must be finite and >= 0")
            table[sym] = weight
    return table
