"""Testing-phase pipeline: generate, retrieve reasoning traces, score them
with the gated hybrid of operator alignment and judge confidence, abstract
signals, adapt rules, and regenerate.
"""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .errors import EmptyRuleSet, UnparseableJudgment
from .gateway import LexicalSimilarity, LlmGateway
from .lexicon import Lexicon, extract_operators, operator_alignment_score
from .optree import OpRule, OpTree, ReasoningTrace, extract_traces

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RetrievalConfig:
    k_trees: int = 3
    k_traces: int = 3
    alpha: float = 0.5
    similarity: str = "lexical"  # lexical | embedding

    def __post_init__(self):
        if self.k_trees < 1 or self.k_traces < 1:
            raise ValueError("k_trees and k_traces must be >= 1")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must be in [0, 1]")


def hybrid_score(s_op: float, s_llm: float, alpha: float = 0.5) -> float:
    """Gated convex combination: zero when either component is zero,
    otherwise alpha * s_op + (1 - alpha) * s_llm."""
    if s_op == 0 or s_llm == 0:
        return 0.0
    return alpha * s_op + (1 - alpha) * s_llm


@dataclass(frozen=True)
class ScoredTrace:
    trace: ReasoningTrace
    s_op: float
    s_llm: float
    s_hybrid: float
    leaf_index: int = 0

    @property
    def tree_id(self) -> str:
        return self.trace.tree_id


def retrieve_trees(
    nl_spec: str,
    library: Sequence[OpTree],
    k: int,
    scorer: Callable[[str, str], float] | None = None,
) -> list[OpTree]:
    """Top-k trees by similarity between the query and each tree's background
    specification; ties broken by tree id. An empty library is only a warning
    (inference proceeds rule-free)."""
    if not library:
        log.warning("tree library is empty; inference will run rule-free")
        return []
    if scorer is None:
        scorer = LexicalSimilarity(t.background.nl_spec for t in library)
    ranked = sorted(
        library,
        key=lambda t: (-scorer(nl_spec, t.background.nl_spec), t.id),
    )
    return ranked[: max(1, k)]


def score_trace(
    trace: ReasoningTrace,
    initial_sva: str,
    nl_spec: str,
    gateway: LlmGateway,
    alpha: float = 0.5,
    lexicon: Lexicon | None = None,
    leaf_index: int = 0,
) -> ScoredTrace:
    """Operator alignment of the rule-free generation against the trace text,
    judge confidence for the trace against the new spec, and their gated
    combination. A judge response with no parseable decimal scores 0, which
    the gate then discards."""
    s_op = operator_alignment_score(
        extract_operators(initial_sva, lexicon),
        extract_operators(trace.flattened_text, lexicon),
    )
    try:
        s_llm = gateway.judge_applicability(trace, nl_spec)
    except UnparseableJudgment as exc:
        log.warning("judge gave no score for a trace of %s: %s", trace.tree_id, exc)
        s_llm = 0.0
    return ScoredTrace(
        trace=trace,
        s_op=s_op,
        s_llm=s_llm,
        s_hybrid=hybrid_score(s_op, s_llm, alpha),
        leaf_index=leaf_index,
    )


# --- signal abstraction ---

_IDENT_RE = re.compile(r"(?<![\w$<])[A-Za-z_][\w$]*")
_SVA_KEYWORDS = frozenset(
    {
        "posedge", "negedge", "disable", "iff", "s_eventually", "s_always",
        "strong", "weak", "assert", "assume", "cover", "property", "sequence",
        "endproperty", "endsequence", "not", "and", "or", "until", "throughout",
        "within", "intersect", "first_match", "nexttime", "past", "rose",
        "fell", "stable", "Q", "A", "RULE",
    }
)
# Fallback-only stoplist: English words that share the identifier shape.
_STOPWORDS = frozenset(
    """
    a an the is are was were be been being must should shall may might can
    could will would when whenever while after before then else than that this
    these those it its in on at of for to from with without by as if so such
    same cycle cycles clock signal signals asserted assertion asserts high low
    active rise rises rising fall falls falling next previous prior value
    values check checked checks ensure keep stays stay hold holds held one two
    three four use used using because since rather instead between exactly
    every each only also here there we you they i do does did done need needs
    needed correct wrong incorrect right meaning means semantics definition
    formal distinction overlapping non even though
    """.split()
)


def _fallback_candidates(text: str, lexicon: Lexicon | None) -> set[str]:
    """Signal-name guesses for traces that lost their provenance: identifiers
    on operator-bearing lines, minus keywords and common English."""
    found: set[str] = set()
    for line in text.splitlines():
        if not extract_operators(line, lexicon):
            continue
        for ident in _IDENT_RE.findall(line):
            if ident in _SVA_KEYWORDS or ident.lower() in _STOPWORDS:
                continue
            found.add(ident)
    return found


def abstract_signals(
    trace: ReasoningTrace,
    known_signals: Sequence[str] | None = None,
    lexicon: Lexicon | None = None,
) -> ReasoningTrace:
    """Mask instance-specific identifiers with stable <signal_N> placeholders.

    Identifiers carried over from the training item are masked; names already
    present in the current design context (known_signals) pass through, as do
    keywords, operator tokens, and numeric delay parameters. The same
    identifier always maps to the same placeholder within one trace, numbered
    by first occurrence. The returned trace's rule is flagged abstracted.
    """
    known = set(known_signals or ())
    candidates = set(trace.training_signals)
    if not candidates:
        candidates = _fallback_candidates(
            trace.flattened_text + "\n" + trace.rule.directive, lexicon
        )
    candidates -= known
    candidates -= _SVA_KEYWORDS

    mapping: dict[str, str] = {}

    def repl(match: re.Match) -> str:
        word = match.group()
        if word not in candidates:
            return word
        if word not in mapping:
            mapping[word] = f"<signal_{len(mapping) + 1}>"
        return mapping[word]

    masked_text = _IDENT_RE.sub(repl, trace.flattened_text)
    masked_directive = _IDENT_RE.sub(repl, trace.rule.directive)
    return replace(
        trace,
        flattened_text=masked_text,
        rule=OpRule(
            directive=masked_directive,
            target_operators=trace.rule.target_operators,
            abstracted=True,
        ),
    )


# --- pipeline ---


@dataclass
class InferenceResult:
    initial_sva: str
    final_sva: str
    scored: list[ScoredTrace] = field(default_factory=list)
    selected: list[ScoredTrace] = field(default_factory=list)
    adapted_rules: list[OpRule] = field(default_factory=list)
    no_applicable_rules: bool = False

    def to_dict(self) -> dict:
        return {
            "initial_sva": self.initial_sva,
            "final_sva": self.final_sva,
            "scores": [
                {
                    "tree_id": s.tree_id,
                    "leaf_index": s.leaf_index,
                    "s_op": s.s_op,
                    "s_llm": s.s_llm,
                    "s_hybrid": s.s_hybrid,
                }
                for s in self.scored
            ],
            "selected_traces": [
                {"tree_id": s.tree_id, "leaf_index": s.leaf_index} for s in self.selected
            ],
            "adapted_rules": [r.directive for r in self.adapted_rules],
            "no_applicable_rules": self.no_applicable_rules,
        }


def select_traces(scored: Sequence[ScoredTrace], k: int) -> list[ScoredTrace]:
    """Highest positive hybrid scores first; zero-gated traces are never
    selected even if fewer than k remain. Ties break by tree id, then leaf
    order."""
    positive = [s for s in scored if s.s_hybrid > 0]
    positive.sort(key=lambda s: (-s.s_hybrid, s.tree_id, s.leaf_index))
    return positive[: max(1, k)]


def infer(
    nl_spec: str,
    design_context: Sequence[tuple[str, int]],
    library: Sequence[OpTree],
    config: RetrievalConfig,
    gateway: LlmGateway,
    scorer: Callable[[str, str], float] | None = None,
    judge_concurrency: int = 4,
) -> InferenceResult:
    """Full testing-phase pipeline for one specification.

    When every candidate trace is gated to zero (or the library is empty) the
    rule-free generation is returned unchanged with no_applicable_rules set.
    """
    initial = gateway.generate_sva(nl_spec, design_context, rules=())
    trees = retrieve_trees(nl_spec, library, config.k_trees, scorer=scorer)
    pool: list[tuple[int, ReasoningTrace]] = []
    for tree in trees:
        for leaf_index, trace in enumerate(extract_traces(tree)):
            pool.append((leaf_index, trace))

    if pool:
        with ThreadPoolExecutor(max_workers=max(1, judge_concurrency)) as executor:
            scored = list(
                executor.map(
                    lambda item: score_trace(
                        item[1], initial, nl_spec, gateway,
                        alpha=config.alpha, leaf_index=item[0],
                    ),
                    pool,
                )
            )
    else:
        scored = []

    selected = select_traces(scored, config.k_traces)
    if not selected:
        return InferenceResult(
            initial_sva=initial,
            final_sva=initial,
            scored=scored,
            no_applicable_rules=True,
        )

    known = [name for name, _ in design_context]
    masked = [abstract_signals(s.trace, known_signals=known) for s in selected]
    try:
        rules = gateway.adapt_rules(nl_spec, design_context, masked)
    except EmptyRuleSet:
        log.warning("rule adaptation yielded nothing; keeping the initial generation")
        return InferenceResult(
            initial_sva=initial,
            final_sva=initial,
            scored=scored,
            selected=selected,
            no_applicable_rules=True,
        )
    final = gateway.generate_sva(nl_spec, design_context, rules=rules)
    return InferenceResult(
        initial_sva=initial,
        final_sva=final,
        scored=scored,
        selected=selected,
        adapted_rules=rules,
    )
