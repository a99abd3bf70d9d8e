"""Operator-level correction-rule learning for NL-to-SVA generation.

Training distills reasoning trees from failing generations and keeps only
trees whose rules demonstrably fix the assertion; inference retrieves those
traces for unseen specifications, scores them with a gated blend of operator
alignment and judge confidence, and regenerates with adapted rules. A
bounded-trace equivalence oracle stands in for commercial checkers.
"""

__version__ = "0.1.0"

from .dataset import NlSvaPair, load_dataset, load_micro_dataset, micro_dataset_path, split
from .errors import OprulesError
from .estimator import RuleLearner
from .evaluation import EvalReport, bleu, evaluate, taxonomy_report, taxonomy_rows
from .gateway import (
    HttpProvider,
    LexicalSimilarity,
    LlmGateway,
    PromptKind,
    ProviderConfig,
    ScriptedProvider,
    prompt_fingerprint,
    text_similarity,
)
from .inference import (
    InferenceResult,
    RetrievalConfig,
    ScoredTrace,
    abstract_signals,
    hybrid_score,
    infer,
    retrieve_trees,
    score_trace,
)
from .lexicon import (
    Lexicon,
    Operator,
    OperatorCategory,
    OperatorSet,
    classify_mismatch,
    extract_operators,
    operator_alignment_score,
    operator_similarity,
)
from .optree import (
    BackgroundNode,
    Layer,
    OpRule,
    OpTree,
    Provenance,
    ReasoningNode,
    ReasoningTrace,
    extract_traces,
    library_append,
    library_load,
)
from .semantics import (
    BoundedOracle,
    EquivalenceVerdict,
    ExternalCheckerConfig,
    ExternalOracle,
    Trace,
    Verdict,
    check_equivalence,
    eval_assertion,
    external_checker,
    parse_sva,
    syntax_check,
)
from .trainer import TrainConfig, TrainLog, fixing_ratio_curve, stratified_sample, train

__all__ = [
    "BackgroundNode",
    "BoundedOracle",
    "EquivalenceVerdict",
    "EvalReport",
    "ExternalCheckerConfig",
    "ExternalOracle",
    "HttpProvider",
    "InferenceResult",
    "Layer",
    "LexicalSimilarity",
    "Lexicon",
    "LlmGateway",
    "NlSvaPair",
    "OpRule",
    "OpTree",
    "Operator",
    "OperatorCategory",
    "OperatorSet",
    "OprulesError",
    "PromptKind",
    "Provenance",
    "ProviderConfig",
    "ReasoningNode",
    "ReasoningTrace",
    "RetrievalConfig",
    "RuleLearner",
    "ScoredTrace",
    "ScriptedProvider",
    "Trace",
    "TrainConfig",
    "TrainLog",
    "Verdict",
    "abstract_signals",
    "bleu",
    "check_equivalence",
    "classify_mismatch",
    "eval_assertion",
    "evaluate",
    "external_checker",
    "extract_operators",
    "extract_traces",
    "fixing_ratio_curve",
    "hybrid_score",
    "infer",
    "library_append",
    "library_load",
    "load_dataset",
    "load_micro_dataset",
    "micro_dataset_path",
    "operator_alignment_score",
    "operator_similarity",
    "parse_sva",
    "prompt_fingerprint",
    "retrieve_trees",
    "score_trace",
    "split",
    "stratified_sample",
    "syntax_check",
    "taxonomy_report",
    "taxonomy_rows",
    "text_similarity",
    "train",
]
