"""Multitape weighted finite-state machines and an acronym-meaning extractor."""

from .semiring import TropicalWeight, w_plus, w_times
from .machine import (
    ALPHABET,
    EPSILON,
    ANY_BUT_UNDERSCORE,
    Wildcard,
    LabelTuple,
    Transition,
    Machine,
    PathResult,
    MachineFormatError,
    atom,
    epsilon_machine,
    union,
    concat,
    star,
    join,
    bind,
    project,
    trim,
    best_path,
    enumerate_paths,
    weight_of,
    serialize,
    deserialize,
)
from .rules import (
    RULE_ALPHABET,
    RewriteRule,
    RegexSyntaxError,
    rewrite_once,
    rewrite_cascade,
    compile_rule,
    compose_cascade,
    apply_transducer,
    OP_REFINEMENT_RULES,
)
from .builder import (
    DEFAULT_COSTS,
    ExtractorBundle,
    build_alignment_core,
    build_op_refiner,
    build_prefix_trimmer,
    build_cost_model,
    assemble,
    build_bundle,
    load_cost_table,
)
from .pipeline import (
    CorpusPair,
    Analysis,
    ExtractionRecord,
    find_pairs,
    normalize,
    align,
    op_string_for,
    extract_corpus,
)

__version__ = "0.1.0"
