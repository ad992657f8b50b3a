"""n-tape weighted finite-state machines and their generic algorithms.

A machine of arity n relates n-tuples of strings.  Every transition carries
one label per tape: a concrete symbol, the empty string (that tape does not
advance), or a :class:`Wildcard` matching any alphabet symbol outside an
exclusion set.  Wildcard positions within one transition may be tied by
equality groups; tied positions must instantiate to the same symbol.

Weights are tropical (`semiring.TropicalWeight`): alternatives take the
minimum, paths add.  Since no weight is negative, single-source best-path
search is Dijkstra-safe.

Machines are immutable by convention once built; every operation below
returns a fresh machine and never mutates its operands, so shared machines
may be queried concurrently.
"""

from __future__ import annotations

import heapq
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence, Union

from .semiring import TropicalWeight, format_weight, parse_weight

__all__ = [
    "ALPHABET",
    "EPSILON",
    "Wildcard",
    "ANY_BUT_UNDERSCORE",
    "LabelTuple",
    "Transition",
    "Machine",
    "PathResult",
    "MachineFormatError",
    "atom",
    "epsilon_machine",
    "union",
    "concat",
    "star",
    "join",
    "bind",
    "project",
    "trim",
    "remove_epsilons",
    "best_path",
    "enumerate_paths",
    "weight_of",
    "serialize",
    "deserialize",
]

EPSILON = ""

# Lowercase letters and digits cover normalized corpus text; underscore and
# dot appear in analyses; G and the digits double as operation symbols.
ALPHABET = frozenset("abcdefghijklmnopqrstuvwxyz0123456789_.G")


@dataclass(frozen=True)
class Wildcard:
    """Matches any alphabet symbol not in `excluded`."""

    excluded: frozenset = frozenset()

    def allows(self, symbol: str) -> bool:
        return symbol not in self.excluded

    def __repr__(self) -> str:
        return f"Wildcard({{{','.join(sorted(self.excluded))}}})"


ANY_BUT_UNDERSCORE = Wildcard(frozenset("_"))

#: One tape's worth of a transition label: '' (epsilon), a single symbol,
#: or a wildcard.
Label = Union[str, Wildcard]


def _canonical_groups(groups: Iterable[Iterable[int]]) -> tuple:
    return tuple(sorted(tuple(sorted(g)) for g in groups))


@dataclass(frozen=True)
class LabelTuple:
    """The per-tape labels of one transition plus tape-equality groups.

    `groups` is a partition of a subset of the 1-based tape positions; every
    listed position must hold a wildcard, and all positions of one group must
    instantiate to the same symbol.
    """

    labels: tuple
    groups: tuple = ()

    def __post_init__(self):
        labels = tuple(self.labels)
        groups = _canonical_groups(self.groups)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "groups", groups)
        n = len(labels)
        for lab in labels:
            if isinstance(lab, Wildcard):
                continue
            if not isinstance(lab, str) or len(lab) > 1:
                raise ValueError(f"bad label {lab!r}: want '', one symbol, or Wildcard")
        seen = set()
        for g in groups:
            if len(g) < 2:
                raise ValueError(f"equality group {g} needs at least two tapes")
            for i in g:
                if not 1 <= i <= n:
                    raise ValueError(f"equality group {g} references tape {i} of {n}")
                if i in seen:
                    raise ValueError(f"tape {i} appears in two equality groups")
                if not isinstance(labels[i - 1], Wildcard):
                    raise ValueError(f"equality group {g}: tape {i} is not a wildcard")
                seen.add(i)

    @property
    def arity(self) -> int:
        return len(self.labels)

    def is_all_epsilon(self) -> bool:
        return all(lab == EPSILON for lab in self.labels)

    def instantiate(self, assignment: Mapping[int, str]) -> Optional["LabelTuple"]:
        """Fix some positions to concrete symbols, propagating equality groups.

        Returns None when the assignment conflicts with a label, an exclusion,
        or another member of an equality group.
        """
        if not assignment:
            return self
        full = dict(assignment)
        for g in self.groups:
            syms = {full[i] for i in g if i in full}
            if len(syms) > 1:
                return None
            if syms:
                sym = syms.pop()
                for i in g:
                    full[i] = sym
        labels = list(self.labels)
        for i, sym in full.items():
            lab = labels[i - 1]
            if isinstance(lab, Wildcard):
                if not lab.allows(sym):
                    return None
                labels[i - 1] = sym
            elif lab != sym:
                return None
        groups = tuple(g for g in self.groups if g[0] not in full)
        return LabelTuple(tuple(labels), groups)

    def _units(self, alphabet) -> Optional[list]:
        """Independent wildcard units as (positions, allowed symbols) pairs."""
        grouped = {i for g in self.groups for i in g}
        units = []
        for g in self.groups:
            allowed = [s for s in sorted(alphabet)
                       if all(self.labels[i - 1].allows(s) for i in g)]
            if not allowed:
                return None
            units.append((g, allowed))
        for i, lab in enumerate(self.labels, start=1):
            if isinstance(lab, Wildcard) and i not in grouped:
                allowed = [s for s in sorted(alphabet) if lab.allows(s)]
                if not allowed:
                    return None
                units.append(((i,), allowed))
        return units

    def satisfiable(self, alphabet) -> bool:
        return self._units(alphabet) is not None

    def concretizations(self, alphabet) -> list:
        """All fully concrete label tuples this tuple denotes over `alphabet`."""
        units = self._units(alphabet)
        if units is None:
            return []
        if not units:
            return [self.labels]
        out = []
        for combo in itertools.product(*(allowed for _, allowed in units)):
            labels = list(self.labels)
            for (positions, _), sym in zip(units, combo):
                for i in positions:
                    labels[i - 1] = sym
            out.append(tuple(labels))
        return out


class Transition(NamedTuple):
    src: int
    labels: LabelTuple
    weight: TropicalWeight
    dst: int


class PathResult(NamedTuple):
    """One accepting path: per-tape strings (epsilons dropped) and total cost."""

    strings: tuple
    weight: TropicalWeight


@dataclass
class Machine:
    """An n-tape weighted finite-state machine with a unique initial state.

    States are 0..num_states-1; `finals` maps accepting states to their exit
    weight.  All label tuples have length `arity`.
    """

    arity: int
    num_states: int
    initial: int
    finals: dict
    transitions: list

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("machine arity must be positive")
        for t in self.transitions:
            if t.labels.arity != self.arity:
                raise ValueError(
                    f"transition {t} has arity {t.labels.arity}, machine has {self.arity}")

    def out_map(self) -> dict:
        out = {q: [] for q in range(self.num_states)}
        for t in self.transitions:
            out[t.src].append(t)
        return out

    def symbols(self) -> set:
        """Concrete symbols appearing on any transition label."""
        syms = set()
        for t in self.transitions:
            for lab in t.labels.labels:
                if isinstance(lab, str) and lab:
                    syms.add(lab)
        return syms

    def __repr__(self) -> str:
        return (f"Machine(arity={self.arity}, states={self.num_states}, "
                f"transitions={len(self.transitions)}, finals={len(self.finals)})")


class MachineFormatError(ValueError):
    """Raised by :func:`deserialize` on malformed input, with a line number."""


# ---------------------------------------------------------------------------
# construction


def _as_label_tuple(labels, groups=()) -> LabelTuple:
    if isinstance(labels, LabelTuple):
        return labels
    return LabelTuple(tuple(labels), tuple(groups))


def atom(labels, weight=0.0, groups=()) -> Machine:
    """Two-state machine accepting exactly one weighted label tuple."""
    lt = _as_label_tuple(labels, groups)
    w = weight if isinstance(weight, TropicalWeight) else TropicalWeight(weight)
    return Machine(lt.arity, 2, 0, {1: w}, [Transition(0, lt, TropicalWeight.one(), 1)])


def epsilon_machine(arity: int) -> Machine:
    """Accepts only the all-empty tuple, at cost 0."""
    return Machine(arity, 1, 0, {0: TropicalWeight.one()}, [])


def _eps_tuple(arity: int) -> LabelTuple:
    return LabelTuple((EPSILON,) * arity)


def _shifted(m: Machine, offset: int) -> list:
    return [Transition(t.src + offset, t.labels, t.weight, t.dst + offset)
            for t in m.transitions]


def union(m1: Machine, m2: Machine) -> Machine:
    """Accepts either operand's tuples; tuples in both get the cheaper cost."""
    if m1.arity != m2.arity:
        raise ValueError(f"union arity mismatch: {m1.arity} vs {m2.arity}")
    eps = _eps_tuple(m1.arity)
    one = TropicalWeight.one()
    o1, o2 = 1, 1 + m1.num_states
    transitions = [
        Transition(0, eps, one, m1.initial + o1),
        Transition(0, eps, one, m2.initial + o2),
    ]
    transitions += _shifted(m1, o1)
    transitions += _shifted(m2, o2)
    finals = {q + o1: w for q, w in m1.finals.items()}
    finals.update({q + o2: w for q, w in m2.finals.items()})
    return Machine(m1.arity, 1 + m1.num_states + m2.num_states, 0, finals, transitions)


def concat(m1: Machine, m2: Machine) -> Machine:
    """Tape-wise concatenation; costs add across the seam."""
    if m1.arity != m2.arity:
        raise ValueError(f"concat arity mismatch: {m1.arity} vs {m2.arity}")
    eps = _eps_tuple(m1.arity)
    o2 = m1.num_states
    transitions = list(m1.transitions) + _shifted(m2, o2)
    for q, w in m1.finals.items():
        transitions.append(Transition(q, eps, w, m2.initial + o2))
    finals = {q + o2: w for q, w in m2.finals.items()}
    return Machine(m1.arity, m1.num_states + m2.num_states, m1.initial, finals, transitions)


def star(m: Machine) -> Machine:
    """Kleene closure; the empty tuple is accepted at cost 0."""
    eps = _eps_tuple(m.arity)
    one = TropicalWeight.one()
    transitions = [Transition(0, eps, one, m.initial + 1)]
    transitions += _shifted(m, 1)
    for q, w in m.finals.items():
        transitions.append(Transition(q + 1, eps, w, 0))
    return Machine(m.arity, m.num_states + 1, 0, {0: one}, transitions)


# ---------------------------------------------------------------------------
# join


def _unify_labels(a: Label, b: Label) -> Optional[Label]:
    """Unify two labels that must advance a shared tape together."""
    if a == EPSILON or b == EPSILON:
        return EPSILON if a == b else None
    if isinstance(a, Wildcard):
        if isinstance(b, Wildcard):
            return Wildcard(a.excluded | b.excluded)
        return b if a.allows(b) else None
    if isinstance(b, Wildcard):
        return a if b.allows(a) else None
    return a if a == b else None


def _merge_groups(groups: Iterable) -> list:
    """Union-find style merge of groups that share a position."""
    merged: list = []
    for g in groups:
        g = set(g)
        keep = []
        for old in merged:
            if old & g:
                g |= old
            else:
                keep.append(old)
        keep.append(g)
        merged = keep
    return merged


def _settle_tuple(labels: list, groups: Iterable) -> Optional[LabelTuple]:
    """Propagate concrete symbols through merged groups, dropping settled ones."""
    kept = []
    for g in _merge_groups(groups):
        concrete = {labels[i - 1] for i in g if not isinstance(labels[i - 1], Wildcard)}
        if EPSILON in concrete or len(concrete) > 1:
            return None
        if concrete:
            sym = concrete.pop()
            for i in g:
                lab = labels[i - 1]
                if isinstance(lab, Wildcard):
                    if not lab.allows(sym):
                        return None
                    labels[i - 1] = sym
        else:
            kept.append(tuple(sorted(g)))
    return LabelTuple(tuple(labels), tuple(kept))


def join(m1: Machine, m2: Machine, pairing: Sequence) -> Machine:
    """Natural join: identify paired tapes and keep both machines' constraints.

    The result has m1's tapes followed by m2's unpaired tapes (in tape order);
    a tuple is accepted when its restrictions to both operands are, at the sum
    of the two costs, minimized over all such factorizations.  Tapes advance
    transition-synchronously; a three-state filter keeps interleavings of
    epsilon moves on the shared tapes canonical, so each factorization is
    counted exactly once.
    """
    pairing = [(int(i), int(j)) for i, j in pairing]
    for i, j in pairing:
        if not 1 <= i <= m1.arity:
            raise ValueError(f"join: tape {i} out of range for left operand")
        if not 1 <= j <= m2.arity:
            raise ValueError(f"join: tape {j} out of range for right operand")
    left_shared = [i for i, _ in pairing]
    right_shared = [j for _, j in pairing]
    if len(set(left_shared)) != len(left_shared) or len(set(right_shared)) != len(right_shared):
        raise ValueError("join: a tape may be paired at most once")

    n1, n2, k = m1.arity, m2.arity, len(pairing)
    arity = n1 + n2 - k
    partner = dict((j, i) for i, j in pairing)
    m2_pos = {}
    nxt = n1 + 1
    for j in range(1, n2 + 1):
        if j in partner:
            m2_pos[j] = partner[j]
        else:
            m2_pos[j] = nxt
            nxt += 1

    out1, out2 = m1.out_map(), m2.out_map()
    one = TropicalWeight.one()

    def solo_left(t: Transition) -> Optional[LabelTuple]:
        if any(t.labels.labels[i - 1] != EPSILON for i in left_shared):
            return None
        labels = list(t.labels.labels) + [EPSILON] * (n2 - k)
        return LabelTuple(tuple(labels), t.labels.groups)

    def solo_right(t: Transition) -> Optional[LabelTuple]:
        if any(t.labels.labels[j - 1] != EPSILON for j in right_shared):
            return None
        labels = [EPSILON] * arity
        for j in range(1, n2 + 1):
            labels[m2_pos[j] - 1] = t.labels.labels[j - 1]
        groups = [tuple(m2_pos[j] for j in g) for g in t.labels.groups]
        return LabelTuple(tuple(labels), tuple(groups))

    def joint(t1: Transition, t2: Transition):
        labels = list(t1.labels.labels) + [None] * (n2 - k)
        for j in range(1, n2 + 1):
            if j not in partner:
                labels[m2_pos[j] - 1] = t2.labels.labels[j - 1]
        advances = False
        for i, j in pairing:
            u = _unify_labels(t1.labels.labels[i - 1], t2.labels.labels[j - 1])
            if u is None:
                return None, False
            if u != EPSILON:
                advances = True
            labels[i - 1] = u
        groups = list(t1.labels.groups)
        groups += [tuple(m2_pos[j] for j in g) for g in t2.labels.groups]
        settled = _settle_tuple(labels, groups)
        if settled is None:
            return None, False
        return settled, advances

    # Filter states: 0 = free, 1 = only left solo moves, 2 = only right solo
    # moves.  Joint all-epsilon moves are allowed only from 0; moves that
    # advance a shared tape reset to 0.
    start = (m1.initial, m2.initial, 0)
    ids = {start: 0}
    order = deque([start])
    transitions = []
    finals = {}
    while order:
        state = order.popleft()
        q1, q2, f = state
        sid = ids[state]

        def emit(dst_state, labels: LabelTuple, weight: TropicalWeight):
            if dst_state not in ids:
                ids[dst_state] = len(ids)
                order.append(dst_state)
            transitions.append(Transition(sid, labels, weight, ids[dst_state]))

        if f in (0, 1):
            for t in out1[q1]:
                labels = solo_left(t)
                if labels is not None:
                    emit((t.dst, q2, 1), labels, t.weight)
        if f in (0, 2):
            for t in out2[q2]:
                labels = solo_right(t)
                if labels is not None:
                    emit((q1, t.dst, 2), labels, t.weight)
        for t1 in out1[q1]:
            for t2 in out2[q2]:
                labels, advances = joint(t1, t2)
                if labels is None:
                    continue
                if not advances and f != 0:
                    continue
                emit((t1.dst, t2.dst, 0), labels, t1.weight.times(t2.weight))

    for (q1, q2, _f), sid in ids.items():
        if q1 in m1.finals and q2 in m2.finals:
            w = m1.finals[q1].times(m2.finals[q2])
            if sid in finals:
                w = finals[sid].plus(w)
            finals[sid] = w
    return Machine(arity, len(ids), 0, finals, transitions)


# ---------------------------------------------------------------------------
# bind / project / trim


def bind(m: Machine, bindings: Mapping[int, str], alphabet=ALPHABET) -> Machine:
    """Fix some tapes to concrete strings and remove them.

    Equivalent to joining with one-string machines on each bound tape and
    projecting the bound tapes away.
    """
    if not bindings:
        return m
    tapes = sorted(bindings)
    for t in tapes:
        if not 1 <= t <= m.arity:
            raise ValueError(f"bind: tape {t} out of range")
        for ch in bindings[t]:
            if ch not in alphabet:
                raise ValueError(f"bind: symbol {ch!r} on tape {t} is outside the alphabet")
    keep = [i for i in range(1, m.arity + 1) if i not in bindings]
    if not keep:
        raise ValueError("bind: at least one tape must remain")
    remap = {pos: idx + 1 for idx, pos in enumerate(keep)}
    strings = [bindings[t] for t in tapes]

    out = m.out_map()
    start = (m.initial,) + (0,) * len(tapes)
    ids = {start: 0}
    order = deque([start])
    transitions = []
    finals = {}
    while order:
        state = order.popleft()
        q = state[0]
        positions = state[1:]
        sid = ids[state]
        if q in m.finals and all(p == len(s) for p, s in zip(positions, strings)):
            finals[sid] = m.finals[q]
        for t in out[q]:
            assignment = {}
            new_positions = []
            ok = True
            for tape, pos, s in zip(tapes, positions, strings):
                lab = t.labels.labels[tape - 1]
                if lab == EPSILON:
                    new_positions.append(pos)
                    continue
                if pos >= len(s):
                    ok = False
                    break
                ch = s[pos]
                if isinstance(lab, Wildcard):
                    if not lab.allows(ch):
                        ok = False
                        break
                    assignment[tape] = ch
                elif lab != ch:
                    ok = False
                    break
                new_positions.append(pos + 1)
            if not ok:
                continue
            inst = t.labels.instantiate(assignment)
            if inst is None:
                continue
            labels = tuple(inst.labels[i - 1] for i in keep)
            groups = tuple(tuple(remap[i] for i in g) for g in inst.groups)
            dst_state = (t.dst,) + tuple(new_positions)
            if dst_state not in ids:
                ids[dst_state] = len(ids)
                order.append(dst_state)
            transitions.append(Transition(sid, LabelTuple(labels, groups), t.weight, ids[dst_state]))
    return trim(Machine(len(keep), len(ids), 0, finals, transitions))


def project(m: Machine, keep: Sequence[int]) -> Machine:
    """Keep only the listed tapes, in the listed order.

    Each kept tuple costs the minimum over all tuples that restrict to it;
    wildcards inherit the union of exclusions of equality partners on dropped
    tapes, so the denoted symbol set is preserved.
    """
    keep = [int(i) for i in keep]
    if not keep:
        raise ValueError("project: keep list must not be empty")
    if len(set(keep)) != len(keep):
        raise ValueError("project: duplicate tape in keep list")
    for i in keep:
        if not 1 <= i <= m.arity:
            raise ValueError(f"project: tape {i} out of range")
    remap = {pos: idx + 1 for idx, pos in enumerate(keep)}
    transitions = []
    for t in m.transitions:
        labels = list(t.labels.labels)
        for g in t.labels.groups:
            excluded = frozenset().union(*(labels[i - 1].excluded for i in g))
            for i in g:
                labels[i - 1] = Wildcard(excluded)
        new_labels = tuple(labels[i - 1] for i in keep)
        new_groups = []
        for g in t.labels.groups:
            kept = tuple(remap[i] for i in g if i in remap)
            if len(kept) >= 2:
                new_groups.append(kept)
        transitions.append(Transition(t.src, LabelTuple(new_labels, tuple(new_groups)),
                                      t.weight, t.dst))
    return Machine(len(keep), m.num_states, m.initial, dict(m.finals), transitions)


def remove_epsilons(m: Machine) -> Machine:
    """Contract transitions that advance no tape at all.

    Every all-epsilon transition is folded into its weighted closure: states
    gain the cheapest epsilon-reachable continuation of each labeled
    transition and the cheapest epsilon-reachable exit weight.  The weighted
    language is unchanged; the structural glue left behind by union, star and
    join disappears, which keeps assembled machines small.
    """
    out = m.out_map()

    def closure(q: int) -> dict:
        dist = {q: 0.0}
        heap = [(0.0, q)]
        while heap:
            d, s = heapq.heappop(heap)
            if d > dist.get(s, float("inf")):
                continue
            for t in out[s]:
                if t.labels.is_all_epsilon():
                    nd = d + float(t.weight)
                    if nd < dist.get(t.dst, float("inf")):
                        dist[t.dst] = nd
                        heapq.heappush(heap, (nd, t.dst))
        return dist

    finals = {}
    cheapest = {}
    for q in range(m.num_states):
        for s, d in closure(q).items():
            if s in m.finals:
                w = d + float(m.finals[s])
                if q not in finals or w < float(finals[q]):
                    finals[q] = TropicalWeight(w)
            for t in out[s]:
                if t.labels.is_all_epsilon():
                    continue
                key = (q, t.labels, t.dst)
                w = d + float(t.weight)
                if w < cheapest.get(key, float("inf")):
                    cheapest[key] = w
    transitions = [Transition(q, labels, TropicalWeight(w), dst)
                   for (q, labels, dst), w in cheapest.items()]
    return trim(Machine(m.arity, m.num_states, m.initial, finals, transitions))


def trim(m: Machine) -> Machine:
    """Drop states that are not on any path from the initial to a final state."""
    forward = {m.initial}
    queue = deque([m.initial])
    out = m.out_map()
    while queue:
        q = queue.popleft()
        for t in out[q]:
            if t.dst not in forward:
                forward.add(t.dst)
                queue.append(t.dst)
    into = {q: [] for q in range(m.num_states)}
    for t in m.transitions:
        into[t.dst].append(t.src)
    backward = set(m.finals)
    queue = deque(m.finals)
    while queue:
        q = queue.popleft()
        for p in into[q]:
            if p not in backward:
                backward.add(p)
                queue.append(p)
    alive = forward & backward
    keep = sorted(alive | {m.initial})
    remap = {q: i for i, q in enumerate(keep)}
    transitions = [Transition(remap[t.src], t.labels, t.weight, remap[t.dst])
                   for t in m.transitions if t.src in alive and t.dst in alive]
    finals = {remap[q]: w for q, w in m.finals.items() if q in alive}
    return Machine(m.arity, len(keep), remap[m.initial], finals, transitions)


# ---------------------------------------------------------------------------
# path queries


def _usable_out(m: Machine, alphabet) -> dict:
    out = {q: [] for q in range(m.num_states)}
    for t in m.transitions:
        if t.labels.satisfiable(alphabet):
            out[t.src].append(t)
    return out


def _backward_distances(m: Machine, out: dict) -> list:
    """Cheapest cost from each state to acceptance, final weight included."""
    dist = [float("inf")] * m.num_states
    heap = []
    for q, w in m.finals.items():
        v = float(w)
        if v < dist[q]:
            dist[q] = v
            heapq.heappush(heap, (v, q))
    into = {q: [] for q in range(m.num_states)}
    for ts in out.values():
        for t in ts:
            into[t.dst].append(t)
    while heap:
        d, q = heapq.heappop(heap)
        if d > dist[q]:
            continue
        for t in into[q]:
            nd = d + float(t.weight)
            if nd < dist[t.src]:
                dist[t.src] = nd
                heapq.heappush(heap, (nd, t.src))
    return dist


def _extend(strings: tuple, concrete: tuple) -> tuple:
    return tuple(s + c for s, c in zip(strings, concrete))


def best_path(m: Machine, alphabet=ALPHABET) -> Optional[PathResult]:
    """A cheapest accepting path's per-tape strings and cost.

    Ties are broken toward the lexicographically smallest string tuple
    (comparing tape strings in tape order).  Returns None when nothing is
    accepted.
    """
    mt = trim(m)
    out = _usable_out(mt, alphabet)
    h = _backward_distances(mt, out)
    w_star = h[mt.initial]
    if w_star == float("inf"):
        return None
    slack = 1e-9
    empty = (EPSILON,) * mt.arity
    heap = [(empty, mt.initial, 0.0)]
    best_seen = {(mt.initial, empty): 0.0}
    while heap:
        strings, q, acc = heapq.heappop(heap)
        if acc > best_seen.get((q, strings), float("inf")):
            continue
        if q in mt.finals and acc + float(mt.finals[q]) <= w_star + slack:
            return PathResult(strings, TropicalWeight(acc + float(mt.finals[q])))
        for t in out[q]:
            nacc = acc + float(t.weight)
            if nacc + h[t.dst] > w_star + slack:
                continue
            for concrete in t.labels.concretizations(alphabet):
                nstrings = _extend(strings, concrete)
                key = (t.dst, nstrings)
                if nacc < best_seen.get(key, float("inf")):
                    best_seen[key] = nacc
                    heapq.heappush(heap, (nstrings, t.dst, nacc))
    return None


def enumerate_paths(m: Machine, limit: int, alphabet=ALPHABET) -> list:
    """Up to `limit` distinct accepted string tuples, cheapest first.

    Duplicate tuples are merged at their minimum cost; equal costs are ordered
    lexicographically.  Cyclic machines are safe: weights are non-negative and
    the search stops after `limit` results.
    """
    if limit < 1:
        raise ValueError("enumerate_paths: limit must be positive")
    mt = trim(m)
    out = _usable_out(mt, alphabet)
    empty = (EPSILON,) * mt.arity
    # Heap keys (cost, strings) only ever grow along a path, so results pop
    # in final order; state None marks an accept entry.
    seq = itertools.count()
    heap = [(0.0, empty, next(seq), mt.initial)]
    best_seen = {(mt.initial, empty): 0.0}
    results = []
    emitted = set()
    while heap and len(results) < limit:
        acc, strings, _, q = heapq.heappop(heap)
        if q is None:
            if strings not in emitted:
                emitted.add(strings)
                results.append(PathResult(strings, TropicalWeight(acc)))
            continue
        if acc > best_seen.get((q, strings), float("inf")):
            continue
        if q in mt.finals:
            heapq.heappush(heap, (acc + float(mt.finals[q]), strings, next(seq), None))
        for t in out[q]:
            nacc = acc + float(t.weight)
            for concrete in t.labels.concretizations(alphabet):
                nstrings = _extend(strings, concrete)
                key = (t.dst, nstrings)
                if nacc < best_seen.get(key, float("inf")):
                    best_seen[key] = nacc
                    heapq.heappush(heap, (nacc, nstrings, next(seq), t.dst))
    return results


def weight_of(m: Machine, strings: Sequence[str], alphabet=ALPHABET) -> TropicalWeight:
    """Total cost the machine assigns to one concrete tuple; inf if rejected."""
    if len(strings) != m.arity:
        raise ValueError(f"weight_of: expected {m.arity} strings, got {len(strings)}")
    strings = tuple(strings)
    out = m.out_map()
    start = (m.initial,) + (0,) * m.arity
    dist = {start: 0.0}
    heap = [(0.0, start)]
    best = float("inf")
    while heap:
        d, state = heapq.heappop(heap)
        if d > dist.get(state, float("inf")):
            continue
        if d >= best:
            break
        q = state[0]
        positions = state[1:]
        if q in m.finals and all(p == len(s) for p, s in zip(positions, strings)):
            best = min(best, d + float(m.finals[q]))
        for t in out[q]:
            assignment = {}
            new_positions = []
            ok = True
            for tape in range(1, m.arity + 1):
                lab = t.labels.labels[tape - 1]
                pos = positions[tape - 1]
                s = strings[tape - 1]
                if lab == EPSILON:
                    new_positions.append(pos)
                    continue
                if pos >= len(s):
                    ok = False
                    break
                ch = s[pos]
                if isinstance(lab, Wildcard):
                    if not (lab.allows(ch) and ch in alphabet):
                        ok = False
                        break
                    assignment[tape] = ch
                elif lab != ch:
                    ok = False
                    break
                new_positions.append(pos + 1)
            if not ok or t.labels.instantiate(assignment) is None:
                continue
            nstate = (t.dst,) + tuple(new_positions)
            nd = d + float(t.weight)
            if nd < dist.get(nstate, float("inf")):
                dist[nstate] = nd
                heapq.heappush(heap, (nd, nstate))
    return TropicalWeight(best)


# ---------------------------------------------------------------------------
# text format


_EPS_TOKEN = "<eps>"
_WILD_PREFIX = "<any-not>"


def _label_token(lab: Label) -> str:
    if lab == EPSILON:
        return _EPS_TOKEN
    if isinstance(lab, Wildcard):
        return _WILD_PREFIX + "".join(sorted(lab.excluded))
    return lab


def _parse_label(token: str) -> Label:
    if token == _EPS_TOKEN:
        return EPSILON
    if token.startswith(_WILD_PREFIX):
        return Wildcard(frozenset(token[len(_WILD_PREFIX):]))
    if len(token) == 1:
        return token
    raise ValueError(f"bad label token {token!r}")


def _canonical_order(m: Machine) -> dict:
    """Deterministic state renumbering: breadth-first over sorted transitions."""
    out = m.out_map()
    for q in out:
        out[q].sort(key=lambda t: (tuple(_label_token(l) for l in t.labels.labels),
                                   float(t.weight), t.dst))
    remap = {m.initial: 0}
    queue = deque([m.initial])
    while queue:
        q = queue.popleft()
        for t in out[q]:
            if t.dst not in remap:
                remap[t.dst] = len(remap)
                queue.append(t.dst)
    for q in range(m.num_states):
        if q not in remap:
            remap[q] = len(remap)
    return remap


def serialize(m: Machine) -> str:
    """Line-oriented text form; states renumbered canonically."""
    remap = _canonical_order(m)
    lines = [f"NWFSM {m.arity} tropical", f"I {remap[m.initial]}"]
    for q, w in sorted(m.finals.items(), key=lambda kv: remap[kv[0]]):
        lines.append(f"F {remap[q]} {format_weight(w)}")
    rows = []
    for t in m.transitions:
        tokens = [_label_token(lab) for lab in t.labels.labels]
        row = f"T {remap[t.src]} {remap[t.dst]} {' '.join(tokens)} {format_weight(t.weight)}"
        for gi, g in enumerate(t.labels.groups, start=1):
            row += f" C {gi}:{','.join(str(i) for i in g)}"
        rows.append((remap[t.src], tokens, float(t.weight), remap[t.dst], row))
    rows.sort(key=lambda r: r[:4])
    lines += [r[4] for r in rows]
    return "\n".join(lines) + "\n"


def deserialize(text: str) -> Machine:
    """Parse the :func:`serialize` format; malformed lines raise with their number."""
    arity = None
    initial = None
    finals = {}
    transitions = []
    max_state = -1

    def fail(lineno, msg):
        raise MachineFormatError(f"line {lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "NWFSM":
            if arity is not None:
                fail(lineno, "duplicate header")
            if len(parts) != 3 or parts[2] != "tropical":
                fail(lineno, f"bad header {line!r}")
            try:
                arity = int(parts[1])
            except ValueError:
                fail(lineno, f"bad arity {parts[1]!r}")
            if arity < 1:
                fail(lineno, "arity must be positive")
            continue
        if arity is None:
            fail(lineno, "missing NWFSM header")
        if tag == "I":
            if initial is not None:
                fail(lineno, "duplicate initial state")
            if len(parts) != 2 or not parts[1].isdigit():
                fail(lineno, f"bad initial line {line!r}")
            initial = int(parts[1])
            max_state = max(max_state, initial)
        elif tag == "F":
            if len(parts) != 3 or not parts[1].isdigit():
                fail(lineno, f"bad final line {line!r}")
            q = int(parts[1])
            try:
                w = parse_weight(parts[2])
            except ValueError as e:
                fail(lineno, str(e))
            finals[q] = w if q not in finals else finals[q].plus(w)
            max_state = max(max_state, q)
        elif tag == "T":
            if len(parts) < 3 + arity + 1:
                fail(lineno, f"transition needs src, dst, {arity} labels and a weight")
            if not (parts[1].isdigit() and parts[2].isdigit()):
                fail(lineno, f"bad state ids in {line!r}")
            src, dst = int(parts[1]), int(parts[2])
            try:
                labels = tuple(_parse_label(tok) for tok in parts[3:3 + arity])
                w = parse_weight(parts[3 + arity])
            except ValueError as e:
                fail(lineno, str(e))
            rest = parts[4 + arity:]
            groups = []
            while rest:
                if rest[0] != "C" or len(rest) < 2:
                    fail(lineno, f"bad constraint clause in {line!r}")
                clause = rest[1]
                if ":" not in clause:
                    fail(lineno, f"bad constraint clause {clause!r}")
                _, members = clause.split(":", 1)
                try:
                    groups.append(tuple(int(x) for x in members.split(",")))
                except ValueError:
                    fail(lineno, f"bad constraint members {members!r}")
                rest = rest[2:]
            try:
                lt = LabelTuple(labels, tuple(groups))
            except ValueError as e:
                fail(lineno, str(e))
            transitions.append(Transition(src, lt, w, dst))
            max_state = max(max_state, src, dst)
        else:
            fail(lineno, f"unknown record {tag!r}")
    if arity is None:
        raise MachineFormatError("line 1: missing NWFSM header")
    if initial is None:
        raise MachineFormatError("line 1: missing initial state")
    return Machine(arity, max_state + 1, initial, finals, transitions)
