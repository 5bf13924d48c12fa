"""A strategy laboratory for the pure lambda calculus.

Terms, a structured space of reduction strategies (uniform, hybrid, and
staged eval-readback evaluators), one generic engine that runs any of
them with fuel bounding and position-tracked traces, and a differential
checker for equivalence, absorption, and fusion experiments.
"""

from .terms import (
    App,
    FormClass,
    Lam,
    ParseError,
    ResourceLimitError,
    Term,
    Var,
    alpha_eq,
    builtins,
    churchN,
    classify,
    free_vars,
    fresh_var,
    parse_term,
    print_term,
    substitute,
)
from .notation import (
    ALIASES,
    CatalogueEntry,
    Diagnostic,
    FusionResult,
    HybridSpec,
    NotationError,
    ReadbackSpec,
    StrategySpec,
    UniformSpec,
    ValidationReport,
    alias_of,
    catalogue,
    defuse,
    fuse,
    parse_spec,
    print_spec,
    validate,
)
from .engine import (
    CONVERGED,
    FUEL_EXHAUSTED,
    DerivationNode,
    EngineError,
    Outcome,
    TraceEvent,
    derivation_forest,
    derivation_tree,
    evaluate,
    reconstruct_sequence,
    sequence_from_tree,
)
from .corpus import (
    GenConfig,
    generate,
    load_corpus,
    paper_corpus,
    save_corpus,
    trace_json,
)
from .lab import (
    ABSORBED,
    BIG_STEP_EQUAL_ONLY,
    BOTH_EXHAUSTED_EQUAL_PREFIX,
    BOTH_EXHAUSTED_MCR_PREFIX,
    COMPARE_KINDS,
    DIFFER,
    EQUAL_MCR,
    INCONCLUSIVE,
    ONE_STEP_EQUAL,
    VIOLATED,
    CompareVerdict,
    CorpusReport,
    canonicalize,
    check_absorption,
    check_fusion_row,
    compare,
    compare_corpus,
    demo_factorial,
    factorial_term,
)

__version__ = "0.1.0"

__all__ = [
    "ABSORBED",
    "ALIASES",
    "App",
    "BIG_STEP_EQUAL_ONLY",
    "BOTH_EXHAUSTED_EQUAL_PREFIX",
    "BOTH_EXHAUSTED_MCR_PREFIX",
    "COMPARE_KINDS",
    "CONVERGED",
    "CatalogueEntry",
    "CompareVerdict",
    "CorpusReport",
    "DIFFER",
    "DerivationNode",
    "Diagnostic",
    "EQUAL_MCR",
    "EngineError",
    "FUEL_EXHAUSTED",
    "FormClass",
    "FusionResult",
    "GenConfig",
    "HybridSpec",
    "INCONCLUSIVE",
    "Lam",
    "NotationError",
    "ONE_STEP_EQUAL",
    "Outcome",
    "ParseError",
    "ReadbackSpec",
    "ResourceLimitError",
    "StrategySpec",
    "Term",
    "TraceEvent",
    "UniformSpec",
    "VIOLATED",
    "ValidationReport",
    "Var",
    "alias_of",
    "alpha_eq",
    "builtins",
    "canonicalize",
    "catalogue",
    "check_absorption",
    "check_fusion_row",
    "churchN",
    "classify",
    "compare",
    "compare_corpus",
    "defuse",
    "demo_factorial",
    "derivation_forest",
    "derivation_tree",
    "evaluate",
    "factorial_term",
    "free_vars",
    "fresh_var",
    "fuse",
    "generate",
    "load_corpus",
    "paper_corpus",
    "parse_spec",
    "parse_term",
    "print_spec",
    "print_term",
    "reconstruct_sequence",
    "save_corpus",
    "sequence_from_tree",
    "substitute",
    "trace_json",
    "validate",
]
