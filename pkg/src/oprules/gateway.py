"""Everything that talks to a language model, plus a deterministic
scripted provider so the whole pipeline runs hermetically in tests.

A provider maps (prompt kind, placeholder values) to response text. The HTTP
provider renders the registered template and speaks the common
chat-completions wire shape; the scripted provider answers from a JSONL
fixture keyed by a stable fingerprint of the same inputs.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import threading
import time
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

from .errors import (
    DegenerateTree,
    EmptyCompletion,
    EmptyRuleSet,
    ProviderError,
    ScriptedResponseMissing,
    UnparseableJudgment,
)
from .lexicon import DEFAULT_LEXICON, DEFAULT_TABLE, Lexicon
from .optree import (
    BackgroundNode,
    Layer,
    OpRule,
    OpTree,
    Provenance,
    ReasoningNode,
    ReasoningTrace,
)


class PromptKind(Enum):
    GENERATE_SVA = "generate_sva"
    BUILD_OP_TREE_LAYER = "build_op_tree_layer"
    JUDGE_APPLICABILITY = "judge_applicability"
    ADAPT_RULES = "adapt_rules"


# One-line formal meaning per operator, injected into the adaptation prompt
# so the model is anchored to the actual temporal semantics.
FORMAL_DEFINITIONS: dict[str, str] = {
    "|->": "overlapping implication: when the antecedent matches at cycle t, the consequent is evaluated starting at the same cycle t",
    "|=>": "non-overlapping implication: when the antecedent matches at cycle t, the consequent is evaluated starting at cycle t+1",
    "##m": "fixed delay: ##m advances exactly m clock cycles between sequence elements",
    "[m:n]": "delay window: ##[m:n] advances between m and n clock cycles, matching at any point in the window",
    "$past": "$past(expr, d) samples expr d cycles earlier; history before cycle 0 reads as 0",
    "$rose": "$rose(sig) is true when sig is 1 now and was 0 in the previous cycle",
    "$fell": "$fell(sig) is true when sig is 0 now and was 1 in the previous cycle",
    "$stable": "$stable(sig) is true when sig has the same value as in the previous cycle",
    "s_eventually": "strong eventually: the operand must hold at some later cycle; a trace may not end before it does",
    "s_always": "strong always: the operand must hold at every remaining cycle",
    "strong": "strong(seq): the sequence must complete; reaching the end of the trace without a match is a failure",
    "&&": "boolean conjunction, evaluated within a single cycle",
    "||": "boolean disjunction, evaluated within a single cycle",
    "!": "boolean negation, evaluated within a single cycle",
    "==": "equality comparison within a single cycle",
    "!==": "inequality comparison within a single cycle",
    "^": "boolean exclusive-or within a single cycle",
    "@(posedge clk)": "clocking event: all sequence elements are sampled at the rising clock edge",
    "disable iff(rst)": "abort condition: obligations are vacuously satisfied while the disable expression is true",
}


def formal_definitions_block(table: dict | None = None) -> str:
    table = table if table is not None else DEFAULT_TABLE
    lines = []
    for token in table:
        meaning = FORMAL_DEFINITIONS.get(token, "see language reference")
        lines.append(f"  {token}: {meaning}")
    return "\n".join(lines)


PROMPT_TEMPLATES: dict[PromptKind, str] = {
    PromptKind.GENERATE_SVA: (
        "You translate natural-language hardware specifications into a single "
        "SystemVerilog assertion.\n"
        "Specification: {nl_spec}\n"
        "Design signals: {design_context}\n"
        "Correction rules to follow: {rules}\n"
        "Examples: {shots}\n"
        "Reply with the assertion only, no explanation."
    ),
    PromptKind.BUILD_OP_TREE_LAYER: (
        "You are debugging a wrong assertion produced for a hardware specification.\n"
        "Specification: {nl_spec}\n"
        "Design signals: {design_context}\n"
        "Reference assertion: {golden_sva}\n"
        "Wrong assertion: {failing_sva}\n"
        "Reasoning stage: {layer} (slot {slot}, attempt {attempt})\n"
        "Parent question: {parent_question}\n"
        "Parent answer: {parent_answer}\n"
        "Questions already asked at this stage: {asked_questions}\n"
        "Ask one new question for this stage, different from those already asked, "
        "and answer it. For the contextual_diagnosis stage, question the signal "
        "relationships behind the failure. For theoretical_grounding, question the "
        "formal definition that decides it. For rule_generation, state an imperative "
        "correction directive naming the operators to use.\n"
        "Reply as two lines:\nQ: <question>\nA: <answer>"
    ),
    PromptKind.JUDGE_APPLICABILITY: (
        "Rate how applicable the following reasoning trace is to the new "
        "specification.\n"
        "New specification: {nl_spec}\n"
        "Reasoning trace:\n{trace}\n"
        "Reply with a single decimal between 0 and 1 and nothing else."
    ),
    PromptKind.ADAPT_RULES: (
        "Adapt the masked correction rules below to the new specification. "
        "Replace every <signal_N> placeholder with the matching concrete signal "
        "from the design context. Keep each rule as one imperative line that "
        "names the operators to use.\n"
        "Operator definitions:\n" + formal_definitions_block() + "\n"
        "New specification: {nl_spec}\n"
        "Design signals: {design_context}\n"
        "Masked reasoning traces:\n{traces}\n"
        "Reply with one adapted rule per line."
    ),
}


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str
    model_name: str
    api_key_env: str = "OPRULES_API_KEY"
    temperature: float = 0.0
    max_output_tokens: int = 1024
    request_timeout: float = 60.0
    max_retries: int = 3
    concurrency_limit: int = 4

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


def _normalize(value: str) -> str:
    return re.sub(r"\s+", " ", value).strip()


def prompt_fingerprint(kind: PromptKind, placeholders: dict[str, str]) -> str:
    """Stable across runs and platforms: sha256 over the kind and the
    whitespace-normalized placeholder values."""
    payload = json.dumps(
        {"kind": kind.value, "placeholders": {k: _normalize(v) for k, v in sorted(placeholders.items())}},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def render_prompt(kind: PromptKind, placeholders: dict[str, str]) -> str:
    return PROMPT_TEMPLATES[kind].format(**placeholders)


class Provider(Protocol):
    name: str

    def complete(self, kind: PromptKind, placeholders: dict[str, str]) -> str: ...


@dataclass(frozen=True)
class ScriptedResponse:
    prompt_fingerprint: str
    response: str


class ScriptedProvider:
    """Deterministic provider for hermetic tests and demos.

    Fixture records are either exact, ``{"fingerprint": ..., "response": ...}``,
    or routed, ``{"kind": ..., "match": {placeholder: substring}, "response":
    ...}``; the first routed record whose substrings all occur in the
    normalized placeholder values wins. Identical inputs always produce the
    identical response.
    """

    name = "scripted"

    def __init__(self, records: Iterable[dict]):
        self.exact: dict[str, str] = {}
        self.routed: list[tuple[str, dict[str, str], str]] = []
        for rec in records:
            if "fingerprint" in rec:
                self.exact[rec["fingerprint"]] = rec["response"]
            else:
                self.routed.append((rec["kind"], dict(rec.get("match", {})), rec["response"]))

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "ScriptedProvider":
        records = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
        return cls(records)

    def complete(self, kind: PromptKind, placeholders: dict[str, str]) -> str:
        fp = prompt_fingerprint(kind, placeholders)
        if fp in self.exact:
            return self.exact[fp]
        normalized = {k: _normalize(v) for k, v in placeholders.items()}
        for rec_kind, match, response in self.routed:
            if rec_kind != kind.value:
                continue
            if all(needle in normalized.get(key, "") for key, needle in match.items()):
                return response
        raise ScriptedResponseMissing(
            f"no scripted response for {kind.value} (fingerprint {fp}); "
            f"placeholders: { {k: v[:60] for k, v in normalized.items()} }"
        )


class HttpProvider:
    """Chat-completions client: {model, messages[], temperature} in,
    choices[0].message.content out. Retries with backoff; the API key is read
    from the environment at request time and never stored or logged."""

    name = "http"

    def __init__(
        self,
        config: ProviderConfig,
        post: Callable | None = None,
        backoff: float = 0.5,
    ):
        self.config = config
        if post is None:
            import requests

            post = requests.post
        self._post = post
        self._backoff = backoff
        self._slots = threading.Semaphore(config.concurrency_limit)

    def complete(self, kind: PromptKind, placeholders: dict[str, str]) -> str:
        body = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": render_prompt(kind, placeholders)}],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
        }
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        last: Exception | None = None
        for attempt in range(1 + max(0, self.config.max_retries)):
            if attempt:
                time.sleep(self._backoff * attempt)
            try:
                with self._slots:
                    resp = self._post(
                        self.config.endpoint,
                        json=body,
                        headers=headers,
                        timeout=self.config.request_timeout,
                    )
                status = getattr(resp, "status_code", 200)
                if status >= 500:
                    last = ProviderError(f"server error {status}")
                    continue
                if status >= 400:
                    raise ProviderError(f"request rejected with status {status}")
                payload = resp.json()
                return payload["choices"][0]["message"]["content"]
            except ProviderError:
                raise
            except Exception as exc:  # timeouts, connection resets, bad JSON
                last = exc
        raise ProviderError(f"provider failed after {1 + self.config.max_retries} attempts: {last}")


# --- response post-processing ---

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_+-]*\s*\n(.*?)```", re.DOTALL)
_PROSE_RE = re.compile(
    r"^\s*(here is|here's|sure|certainly|the assertion|this assertion|note[:,]|explanation)",
    re.IGNORECASE,
)
_ASSERTIONISH_RE = re.compile(
    r"(\|->|\|=>|##|\$(past|rose|fell|stable)|posedge|s_eventually|s_always|&&|\|\||==|!|\^)"
)


def extract_assertion(response: str) -> str:
    """First code block or assertion-shaped line, stripped of prose."""
    m = _FENCE_RE.search(response)
    body = m.group(1) if m else response
    lines = [ln.strip() for ln in body.splitlines()]
    lines = [ln for ln in lines if ln and not _PROSE_RE.match(ln) and not ln.endswith(":")]
    for ln in lines:
        if _ASSERTIONISH_RE.search(ln) or ln.startswith(("assert", "@", "property")):
            return ln
    if lines:
        return lines[0]
    raise EmptyCompletion("model response contained no assertion text")


_DECIMAL_RE = re.compile(r"[-+]?(?:\d+\.\d*|\.\d+|\d+)")
_BULLET_RE = re.compile(r"^\s*(?:[-*\u2022]|\d+[.):])\s*")
_WORD_RE = re.compile(r"[a-z0-9_]+")


def _word_set(text: str) -> set[str]:
    return set(_WORD_RE.findall(text.lower()))


def question_overlap(a: str, b: str) -> float:
    """Token Jaccard between two questions, for the diversity gate."""
    wa, wb = _word_set(a), _word_set(b)
    if not wa and not wb:
        return 1.0
    if not wa or not wb:
        return 0.0
    return len(wa & wb) / len(wa | wb)


def render_design_context(design_context: Sequence[tuple[str, int]]) -> str:
    if not design_context:
        return "(none)"
    return ", ".join(f"{name}[{width}]" for name, width in design_context)


def render_rules(rules: Sequence[OpRule]) -> str:
    if not rules:
        return "(none)"
    return "\n".join(f"Rule {i + 1}: {r.directive}" for i, r in enumerate(rules))


def render_shots(shots: Sequence[tuple[str, str]]) -> str:
    if not shots:
        return "(none)"
    return "\n".join(f"NL: {nl}\nSVA: {sva}" for nl, sva in shots)


_LAYERS = (Layer.CONTEXTUAL_DIAGNOSIS, Layer.THEORETICAL_GROUNDING, Layer.RULE_GENERATION)
_LAYER_PREFIX = {
    Layer.CONTEXTUAL_DIAGNOSIS: "d",
    Layer.THEORETICAL_GROUNDING: "g",
    Layer.RULE_GENERATION: "r",
}


class LlmGateway:
    """All model interactions behind one object.

    diversity_threshold is the token-Jaccard overlap above which a sibling
    question is rejected and re-prompted once (the less-overlapping candidate
    is kept).
    """

    def __init__(
        self,
        provider: Provider,
        lexicon: Lexicon | None = None,
        archive_dir: str | Path | None = None,
        diversity_threshold: float = 0.8,
    ):
        self.provider = provider
        self.lexicon = lexicon or DEFAULT_LEXICON
        self.archive_dir = Path(archive_dir) if archive_dir else None
        self.diversity_threshold = diversity_threshold
        self._archive_lock = threading.Lock()
        self._seq = 0

    # --- plumbing ---

    def _complete(self, kind: PromptKind, placeholders: dict[str, str]) -> str:
        response = self.provider.complete(kind, placeholders)
        if self.archive_dir is not None:
            record = {
                "seq": None,
                "kind": kind.value,
                "fingerprint": prompt_fingerprint(kind, placeholders),
                "prompt": render_prompt(kind, placeholders),
                "response": response,
            }
            with self._archive_lock:
                record["seq"] = self._seq
                self._seq += 1
                self.archive_dir.mkdir(parents=True, exist_ok=True)
                with open(self.archive_dir / "llm_calls.jsonl", "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        return response

    # --- operations ---

    def generate_sva(
        self,
        nl_spec: str,
        design_context: Sequence[tuple[str, int]] = (),
        rules: Sequence[OpRule] = (),
        shots: Sequence[tuple[str, str]] = (),
    ) -> str:
        if not nl_spec.strip():
            raise ValueError("nl_spec must be non-empty")
        placeholders = {
            "nl_spec": nl_spec,
            "design_context": render_design_context(design_context),
            "rules": render_rules(rules),
            "shots": render_shots(shots),
        }
        return extract_assertion(self._complete(PromptKind.GENERATE_SVA, placeholders))

    def build_op_tree(
        self,
        background: BackgroundNode,
        questions_per_layer: int = 3,
        tree_id: str | None = None,
        provenance: Provenance | None = None,
        created_iteration: int = 1,
    ) -> OpTree:
        """Grow a diagnosis/grounding/rule tree layer by layer.

        Every node at one layer receives questions_per_layer children at the
        next; sibling questions overlapping an earlier one beyond the
        diversity threshold are re-prompted once. Branches whose rule answer
        names no operator are pruned; if none survives the tree is degenerate.
        The returned tree is NOT valid - validation belongs to the trainer.
        """
        if questions_per_layer < 1:
            raise ValueError("questions_per_layer must be >= 1")
        nodes: dict[str, ReasoningNode] = {}
        frontier: list[ReasoningNode | None] = [None]
        for layer in _LAYERS:
            next_frontier: list[ReasoningNode] = []
            for parent in frontier:
                asked: list[str] = []
                for slot in range(questions_per_layer):
                    node = self._ask_layer_question(
                        background, layer, parent, slot, asked,
                        parent_prefix=(parent.node_id + "." if parent else ""),
                    )
                    asked.append(node.question)
                    nodes[node.node_id] = node
                    next_frontier.append(node)
            frontier = next_frontier

        # prune rule leaves that name no operator, then any childless ancestors
        kept = dict(nodes)
        for nid, node in list(kept.items()):
            if node.layer is Layer.RULE_GENERATION and node.rule is None:
                del kept[nid]
        changed = True
        while changed:
            changed = False
            child_count = Counter(n.parent for n in kept.values() if n.parent)
            for nid, node in list(kept.items()):
                if node.layer is not Layer.RULE_GENERATION and child_count[nid] == 0:
                    del kept[nid]
                    changed = True
        if not any(n.layer is Layer.RULE_GENERATION for n in kept.values()):
            raise DegenerateTree(
                "no reasoning branch produced a rule naming at least one operator"
            )
        root_ids = tuple(sorted(nid for nid, n in kept.items() if n.parent is None))
        return OpTree(
            id=tree_id or f"tree-{prompt_fingerprint(PromptKind.BUILD_OP_TREE_LAYER, {'nl': background.nl_spec, 'fail': background.failing_sva})}",
            background=background,
            nodes=kept,
            root_ids=root_ids,
            valid=False,
            created_iteration=created_iteration,
            provenance=provenance or Provenance("", ""),
        )

    def _ask_layer_question(
        self,
        background: BackgroundNode,
        layer: Layer,
        parent: ReasoningNode | None,
        slot: int,
        asked: list[str],
        parent_prefix: str,
    ) -> ReasoningNode:
        def placeholders(attempt: int) -> dict[str, str]:
            return {
                "layer": layer.value,
                "nl_spec": background.nl_spec,
                "design_context": render_design_context(background.design_context),
                "golden_sva": background.golden_sva,
                "failing_sva": background.failing_sva,
                "parent_question": parent.question if parent else "(none)",
                "parent_answer": parent.answer if parent else "(none)",
                "asked_questions": " | ".join(asked) if asked else "(none)",
                "slot": str(slot),
                "attempt": str(attempt),
            }

        question, answer = self._parse_qa(
            self._complete(PromptKind.BUILD_OP_TREE_LAYER, placeholders(0))
        )
        overlap = max((question_overlap(question, prev) for prev in asked), default=0.0)
        if overlap > self.diversity_threshold:
            q2, a2 = self._parse_qa(
                self._complete(PromptKind.BUILD_OP_TREE_LAYER, placeholders(1))
            )
            overlap2 = max((question_overlap(q2, prev) for prev in asked), default=0.0)
            if overlap2 < overlap:
                question, answer = q2, a2

        rule = None
        if layer is Layer.RULE_GENERATION:
            targets = self.lexicon.extract(answer)
            if targets:
                rule = OpRule(directive=answer.strip(), target_operators=targets)
        node_id = f"{parent_prefix}{_LAYER_PREFIX[layer]}{slot:02d}"
        return ReasoningNode(
            node_id=node_id,
            layer=layer,
            question=question,
            answer=answer,
            operator_tags=self.lexicon.extract(answer),
            parent=parent.node_id if parent else None,
            rule=rule,
        )

    @staticmethod
    def _parse_qa(response: str) -> tuple[str, str]:
        q_match = re.search(r"^\s*Q:\s*(.+)$", response, re.MULTILINE)
        a_match = re.search(r"^\s*A:\s*(.+)", response, re.MULTILINE | re.DOTALL)
        if q_match and a_match:
            return q_match.group(1).strip(), a_match.group(1).strip()
        lines = [ln.strip() for ln in response.splitlines() if ln.strip()]
        if len(lines) >= 2:
            return lines[0], " ".join(lines[1:])
        text = lines[0] if lines else response.strip()
        return text, text

    def judge_applicability(self, trace: ReasoningTrace, nl_spec: str) -> float:
        response = self._complete(
            PromptKind.JUDGE_APPLICABILITY,
            {"nl_spec": nl_spec, "trace": trace.flattened_text},
        )
        m = _DECIMAL_RE.search(response)
        if not m:
            raise UnparseableJudgment(f"no decimal in judge response {response[:80]!r}")
        return min(1.0, max(0.0, float(m.group())))

    def adapt_rules(
        self,
        nl_spec: str,
        design_context: Sequence[tuple[str, int]],
        masked_traces: Sequence[ReasoningTrace],
    ) -> list[OpRule]:
        if not masked_traces:
            raise EmptyRuleSet("no masked traces to adapt")
        for trace in masked_traces:
            if not trace.rule.abstracted:
                raise ValueError(
                    f"trace from tree {trace.tree_id} was not signal-abstracted"
                )
        rendered = "\n---\n".join(t.flattened_text + f"\nRULE: {t.rule.directive}" for t in masked_traces)
        response = self._complete(
            PromptKind.ADAPT_RULES,
            {
                "nl_spec": nl_spec,
                "design_context": render_design_context(design_context),
                "traces": rendered,
            },
        )
        rules: list[OpRule] = []
        for line in response.splitlines():
            line = _BULLET_RE.sub("", line).strip()
            if not line or line.endswith(":"):
                continue
            targets = self.lexicon.extract(line)
            if targets:
                rules.append(OpRule(directive=line, target_operators=targets))
        if not rules:
            raise EmptyRuleSet("adaptation response contained no operator-level rules")
        return rules


# --- text similarity ---


class LexicalSimilarity:
    """Cosine similarity over tf-idf weighted lowercase word counts.

    The idf table is fitted on the tree library's background texts; with an
    empty corpus all words weigh the same. Identical texts score 1.0,
    disjoint vocabularies 0.0; two empty texts are defined as 1.0.
    """

    def __init__(self, corpus: Iterable[str] = ()):
        df: Counter = Counter()
        n_docs = 0
        for doc in corpus:
            n_docs += 1
            df.update(_word_set(doc))
        self._idf = {w: math.log((1 + n_docs) / (1 + c)) + 1.0 for w, c in df.items()}
        self._default_idf = math.log(float(1 + n_docs)) + 1.0

    def _vector(self, text: str) -> dict[str, float]:
        counts = Counter(_WORD_RE.findall(text.lower()))
        return {
            w: tf * self._idf.get(w, self._default_idf) for w, tf in counts.items()
        }

    def __call__(self, a: str, b: str) -> float:
        va, vb = self._vector(a), self._vector(b)
        if not va and not vb:
            return 1.0
        if not va or not vb:
            return 0.0
        dot = sum(weight * vb.get(w, 0.0) for w, weight in va.items())
        norm = math.sqrt(sum(x * x for x in va.values())) * math.sqrt(
            sum(x * x for x in vb.values())
        )
        return min(1.0, max(0.0, dot / norm)) if norm else 0.0


class EmbeddingSimilarity:
    """Same signature as LexicalSimilarity, backed by an embeddings endpoint
    ({model, input} -> data[i].embedding). Requires live credentials."""

    def __init__(self, config: ProviderConfig, post: Callable | None = None):
        self.config = config
        if post is None:
            import requests

            post = requests.post
        self._post = post
        self._cache: dict[str, list[float]] = {}

    def _embed(self, text: str) -> list[float]:
        if text in self._cache:
            return self._cache[text]
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        resp = self._post(
            self.config.endpoint,
            json={"model": self.config.model_name, "input": text},
            headers=headers,
            timeout=self.config.request_timeout,
        )
        vec = resp.json()["data"][0]["embedding"]
        self._cache[text] = vec
        return vec

    def __call__(self, a: str, b: str) -> float:
        if not a.strip() and not b.strip():
            return 1.0
        if not a.strip() or not b.strip():
            return 0.0
        va, vb = self._embed(a), self._embed(b)
        dot = sum(x * y for x, y in zip(va, vb))
        norm = math.sqrt(sum(x * x for x in va)) * math.sqrt(sum(y * y for y in vb))
        return min(1.0, max(0.0, dot / norm)) if norm else 0.0


def text_similarity(a: str, b: str, scorer: Callable[[str, str], float] | None = None) -> float:
    """Similarity of two texts in [0, 1]; default is corpus-free lexical."""
    return (scorer or LexicalSimilarity())(a, b)
