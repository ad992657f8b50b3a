"""Corpus preprocessing and the end-to-end extraction loop.

Sentences come in one per line.  Each bracketed token that looks like an
acronym is paired with the text chunk before it, both sides are normalized
(lowercase, separator runs to single underscores), and the chunk/acronym
pair is aligned by the 3-tape extractor; the cheapest analysis wins.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, NamedTuple, Optional

from .machine import ALPHABET, Machine, best_path, bind, enumerate_paths
from .semiring import format_weight

__all__ = [
    "CorpusPair",
    "Analysis",
    "ExtractionRecord",
    "find_pairs",
    "normalize",
    "align",
    "op_string_for",
    "extract_corpus",
    "format_record_tsv",
    "NO_ALIGNMENT",
]

NO_ALIGNMENT = "NO_ALIGNMENT"

_CHUNK_RE = re.compile(r"[a-z0-9](?:[a-z0-9_]*[a-z0-9])?")
_ACRONYM_RE = re.compile(r"[a-z0-9]+")
_BRACKETED = re.compile(r"\(([^()]*)\)")
_SEPARATORS = re.compile(r"[^a-z0-9]+")


@dataclass(frozen=True)
class CorpusPair:
    """One acronym candidate with the raw and normalized text before it."""

    chunk_raw: str
    acronym_raw: str
    chunk_norm: str
    acronym_norm: str


class Analysis(NamedTuple):
    """One alignment: dotted definition, operation string, total cost."""

    definition: str
    ops: str
    cost: float


@dataclass
class ExtractionRecord:
    """Analyses for one candidate, cheapest first; empty means no alignment."""

    acronym: str
    analyses: List[Analysis] = field(default_factory=list)

    @property
    def best_analysis(self) -> Optional[str]:
        return self.analyses[0].definition if self.analyses else None

    @property
    def cost(self) -> float:
        return self.analyses[0].cost if self.analyses else float("inf")


def normalize(text: str) -> str:
    """Lowercase; each run of non-alphanumerics becomes one underscore."""
    return _SEPARATORS.sub("_", text.lower()).strip("_")


def _looks_like_acronym(token: str) -> bool:
    # Accepts HMM / WFSA / HMMs, rejects "(3)", quoted asides, and anything
    # with whitespace: 2-10 chars, letter-initial, at least half uppercase.
    if not 2 <= len(token) <= 10:
        return False
    if not token[0].isalpha():
        return False
    if any(c.isspace() for c in token):
        return False
    upper = sum(1 for c in token if c.isupper())
    return upper * 2 >= len(token)


def find_pairs(sentence: str) -> List[CorpusPair]:
    """Candidate (chunk, acronym) pairs from one sentence.

    A chunk runs from the sentence start, or from the previous accepted
    acronym's closing bracket, to the candidate's opening bracket.
    """
    pairs = []
    chunk_start = 0
    for match in _BRACKETED.finditer(sentence):
        token = match.group(1)
        if not _looks_like_acronym(token):
            continue
        chunk_raw = sentence[chunk_start:match.start()]
        chunk_norm = normalize(chunk_raw)
        acronym_norm = normalize(token)
        if chunk_norm and acronym_norm:
            pairs.append(CorpusPair(chunk_raw, token, chunk_norm, acronym_norm))
        chunk_start = match.end()
    return pairs


def _check_inputs(chunk: str, acronym: str) -> None:
    if not _CHUNK_RE.fullmatch(chunk) or "__" in chunk:
        raise ValueError(f"bad chunk {chunk!r}: want letters, digits and single "
                         "underscores, not at the edges")
    if not _ACRONYM_RE.fullmatch(acronym):
        raise ValueError(f"bad acronym {acronym!r}: want letters and digits only")


def op_string_for(chunk: str, definition: str) -> str:
    """Reconstruct the refined operation string of one dotted definition.

    The definition, dots removed, must be a suffix of the chunk starting at a
    word boundary; dotted letters are the used ones.  Every chunk position
    maps to one op symbol: used letters get their word position (capped at 8),
    gap letters before a used letter in the same word get g (G word-initially),
    word-initial letters of unused non-leading kept words get u, letters of
    leading trimmed words stay i, separators stay separators.
    """
    core = definition.replace(".", "")
    start = len(chunk) - len(core)
    if start < 0 or chunk[start:] != core or (start > 0 and chunk[start - 1] != "_"):
        raise ValueError(f"definition {definition!r} does not fit chunk {chunk!r}")
    used = set()
    offset = 0
    for ch in definition:
        if ch == ".":
            used.add(start + offset)
        else:
            offset += 1

    ops = []
    word_begin = 0
    for pos, ch in enumerate(chunk + "_"):
        if ch != "_":
            continue
        word = range(word_begin, pos)
        word_used = sorted(i for i in word if i in used)
        for i in word:
            column = i - word_begin + 1
            if i in used:
                ops.append(str(min(column, 8)))
            elif word_used and i < word_used[-1]:
                ops.append("G" if column == 1 else "g")
            elif not word_used and column == 1 and used and word_begin > min(used):
                ops.append("u")
            else:
                ops.append("i")
        if pos < len(chunk):
            ops.append("_")
        word_begin = pos + 1
    return "".join(ops)


def align(chunk: str, acronym: str, machine: Machine, n_best: int = 1,
          alphabet=ALPHABET) -> Optional[ExtractionRecord]:
    """Align one normalized pair on a 3-tape extractor.

    Returns None when the acronym cannot be embedded in the chunk.  With
    n_best > 1, up to that many distinct analyses are reported, cheapest
    first.
    """
    _check_inputs(chunk, acronym)
    if n_best < 1:
        raise ValueError("n_best must be positive")
    bound = bind(machine, {1: chunk, 2: acronym}, alphabet)
    if n_best == 1:
        found = best_path(bound, alphabet)
        results = [found] if found is not None else []
    else:
        results = enumerate_paths(bound, n_best, alphabet)
    if not results:
        return None
    analyses = [Analysis(r.strings[0], op_string_for(chunk, r.strings[0]), float(r.weight))
                for r in results]
    return ExtractionRecord(acronym, analyses)


def extract_corpus(lines: Iterable, machine: Machine, n_best: int = 1,
                   error_stream=None) -> Iterator[ExtractionRecord]:
    """Run the full loop over sentences; order follows the input.

    Accepts str or bytes lines; undecodable bytes lines are skipped with a
    diagnostic on `error_stream` (stderr by default).  Candidates whose
    acronym cannot be aligned yield a record with no analyses.
    """
    err = error_stream if error_stream is not None else sys.stderr
    for lineno, line in enumerate(lines, start=1):
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError as exc:
                print(f"line {lineno}: skipped undecodable input ({exc})", file=err)
                continue
        for pair in find_pairs(line):
            record = align(pair.chunk_norm, pair.acronym_norm, machine, n_best)
            yield record if record is not None else ExtractionRecord(pair.acronym_norm)


def format_record_tsv(record: ExtractionRecord) -> str:
    """TSV row(s): acronym, analysis, op string, cost."""
    if not record.analyses:
        return f"{record.acronym}\t{NO_ALIGNMENT}\t-\tinf"
    return "\n".join(
        f"{record.acronym}\t{a.definition}\t{a.ops}\t{format_weight(a.cost)}"
        for a in record.analyses)
