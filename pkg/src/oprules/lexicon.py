"""Operator lexicon: scan text for temporal/combinational assertion operators.

The lexicon projects arbitrary text (assertions, rule directives, reasoning
traces) onto a small set of canonical operator tokens, each belonging to one
of six categories. Delay operators are shaped: ``##3`` and ``##7`` both
canonicalize to ``##m``, ``[2:5]`` to ``[m:n]``, so alignment scoring is about
operator kind rather than parameter value. Scanning is longest-match-first
over an ordered token table, and text inside ``//`` line comments is ignored.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path


class OperatorCategory(Enum):
    """Six operator categories, declared in fixed report order."""

    TEMPORAL_IMPLICATION = "temporal_implication"
    TEMPORAL_DELAY = "temporal_delay"
    TEMPORAL_SAMPLING = "temporal_sampling"
    TEMPORAL_LIVENESS = "temporal_liveness"
    COMBINATIONAL = "combinational_logic"
    MISCELLANEOUS = "miscellaneous"

    @property
    def rank(self) -> int:
        return _CATEGORY_RANK[self]

    @property
    def label(self) -> str:
        return _CATEGORY_LABEL[self]


_CATEGORY_RANK = {c: i for i, c in enumerate(OperatorCategory)}
_CATEGORY_LABEL = {
    OperatorCategory.TEMPORAL_IMPLICATION: "Temporal Implication",
    OperatorCategory.TEMPORAL_DELAY: "Temporal Delay",
    OperatorCategory.TEMPORAL_SAMPLING: "Temporal Sampling",
    OperatorCategory.TEMPORAL_LIVENESS: "Temporal Liveness",
    OperatorCategory.COMBINATIONAL: "Combinational Logic",
    OperatorCategory.MISCELLANEOUS: "Miscellaneous",
}


@dataclass(frozen=True)
class Operator:
    token: str
    category: OperatorCategory


OperatorSet = frozenset  # frozenset[Operator]

# Canonical token -> category for the built-in table.
DEFAULT_TABLE: dict[str, OperatorCategory] = {
    "|->": OperatorCategory.TEMPORAL_IMPLICATION,
    "|=>": OperatorCategory.TEMPORAL_IMPLICATION,
    "##m": OperatorCategory.TEMPORAL_DELAY,
    "[m:n]": OperatorCategory.TEMPORAL_DELAY,
    "$past": OperatorCategory.TEMPORAL_SAMPLING,
    "$rose": OperatorCategory.TEMPORAL_SAMPLING,
    "$fell": OperatorCategory.TEMPORAL_SAMPLING,
    "$stable": OperatorCategory.TEMPORAL_SAMPLING,
    "s_eventually": OperatorCategory.TEMPORAL_LIVENESS,
    "s_always": OperatorCategory.TEMPORAL_LIVENESS,
    "strong": OperatorCategory.TEMPORAL_LIVENESS,
    "&&": OperatorCategory.COMBINATIONAL,
    "||": OperatorCategory.COMBINATIONAL,
    "!": OperatorCategory.COMBINATIONAL,
    "==": OperatorCategory.COMBINATIONAL,
    "!==": OperatorCategory.COMBINATIONAL,
    "^": OperatorCategory.COMBINATIONAL,
    "@(posedge clk)": OperatorCategory.MISCELLANEOUS,
    "disable iff(rst)": OperatorCategory.MISCELLANEOUS,
}

# Canonical tokens whose surface forms are shaped rather than literal.
# Each entry: list of (regex, priority-length). Higher priority wins, so the
# ##[m:n] range form outranks both bare [m:n] and ##m.
_SHAPED_PATTERNS: dict[str, list[tuple[str, int]]] = {
    "[m:n]": [
        (r"##\s*\[\s*(?:\d+|m)\s*:\s*(?:\d+|n)\s*\]", 7),
        (r"\[\s*(?:\d+|m)\s*:\s*(?:\d+|n)\s*\]", 5),
    ],
    "##m": [(r"##\s*(?:\d+|m)\b", 3)],
    "@(posedge clk)": [(r"@\s*\(\s*(?:posedge|negedge)\b[^)]*\)", 14)],
    # the guard expression is part of the construct's shape, one nesting level
    "disable iff(rst)": [
        (r"disable\s+iff\s*\((?:[^()]|\([^()]*\))*\)", 16),
        (r"disable\s+iff\b", 11),
    ],
}

# Alternate spellings folded into one canonical token. The table prints the
# four-state forms as representative; two- and four-state comparisons carry
# the same combinational meaning here.
_VARIANT_SPELLINGS: dict[str, list[str]] = {
    "!==": ["!==", "!="],
    "==": ["===", "=="],
}

_WORDLIKE = re.compile(r"[A-Za-z_$][\w$]*\Z")
_IDENT = re.compile(r"[A-Za-z_][\w$]*")
_NUMBER = re.compile(r"\d[\w']*")
_LINE_COMMENT = re.compile(r"//[^\n]*")


class Lexicon:
    """Ordered operator token table with longest-match-first scanning."""

    def __init__(self, table: dict[str, OperatorCategory] | None = None):
        self.table = dict(table if table is not None else DEFAULT_TABLE)
        entries: list[tuple[int, str, str]] = []  # (priority, regex, canonical)
        for token in self.table:
            if token in _SHAPED_PATTERNS:
                for pattern, prio in _SHAPED_PATTERNS[token]:
                    entries.append((prio, pattern, token))
                continue
            for spelling in _VARIANT_SPELLINGS.get(token, [token]):
                pattern = re.escape(spelling)
                if _WORDLIKE.match(spelling):
                    pattern += r"\b"
                entries.append((len(spelling), pattern, token))
        entries.sort(key=lambda e: (-e[0], e[2]))
        self._scan = [(re.compile(pattern), token) for _, pattern, token in entries]

    def category_of(self, token: str) -> OperatorCategory:
        try:
            return self.table[token]
        except KeyError:
            raise KeyError(f"unknown operator token {token!r}") from None

    def operator(self, token: str) -> Operator:
        return Operator(token, self.category_of(token))

    def scan(self, text: str) -> list[Operator]:
        """All operator occurrences in order, comments stripped, duplicates kept."""
        text = _LINE_COMMENT.sub(" ", text)
        found: list[Operator] = []
        i, n = 0, len(text)
        while i < n:
            for pattern, token in self._scan:
                m = pattern.match(text, i)
                if m:
                    found.append(self.operator(token))
                    i = m.end()
                    break
            else:
                # Skip a whole identifier or number so word-like operators
                # never match mid-word ("headstrong" is not "strong").
                m = _IDENT.match(text, i) or _NUMBER.match(text, i)
                i = m.end() if m else i + 1
        return found

    def extract(self, text: str) -> OperatorSet:
        return frozenset(self.scan(text))

    def to_json(self) -> str:
        return json.dumps(
            {token: cat.value for token, cat in self.table.items()},
            indent=2,
            sort_keys=True,
        )

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, doc: str | dict) -> "Lexicon":
        raw = json.loads(doc) if isinstance(doc, str) else doc
        table = {token: OperatorCategory(value) for token, value in raw.items()}
        return cls(table)

    @classmethod
    def load(cls, path: str | Path) -> "Lexicon":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


DEFAULT_LEXICON = Lexicon()


def op(token: str, lexicon: Lexicon | None = None) -> Operator:
    """Operator for a canonical token, category looked up in the table."""
    return (lexicon or DEFAULT_LEXICON).operator(token)


def extract_operators(text: str, lexicon: Lexicon | None = None) -> OperatorSet:
    """Project text onto the set of recognized operators (total: unknown
    tokens are skipped, so any UTF-8 input is fine)."""
    return (lexicon or DEFAULT_LEXICON).extract(text)


def operator_similarity(u: Operator, v: Operator) -> float:
    """1.0 for identical tokens, 0.5 for same category, 0.0 otherwise."""
    if u.token == v.token:
        return 1.0
    if u.category is v.category:
        return 0.5
    return 0.0


def operator_alignment_score(init: OperatorSet, trace: OperatorSet) -> float:
    """Soft-Jaccard alignment of two operator sets, in [0, 1].

    Each init operator contributes its best graded match against the trace
    set; the sum is normalized by the union size. Two empty sets score 1.0
    (no operators means no operator disagreement); an empty init against a
    non-empty trace scores 0.0.
    """
    if not init and not trace:
        return 1.0
    if not init:
        return 0.0
    union = {op.token for op in init} | {op.token for op in trace}
    total = sum(
        max((operator_similarity(u, v) for v in trace), default=0.0) for u in init
    )
    return total / len(union)


def classify_mismatch(generated: OperatorSet, golden: OperatorSet) -> list[OperatorCategory]:
    """Categories of operators the generated text uses but the golden does not.

    Keyed to the generated side so the report names what the model reached
    for. When the only disagreement (in either direction) is clocking/reset
    constructs, the miscellaneous category is reported. Output follows the
    fixed category ranking.
    """
    golden_tokens = {op.token for op in golden}
    generated_tokens = {op.token for op in generated}
    cats = {op.category for op in generated if op.token not in golden_tokens}
    symdiff = [
        op
        for op in set(generated) | set(golden)
        if (op.token in golden_tokens) != (op.token in generated_tokens)
    ]
    if symdiff and all(op.category is OperatorCategory.MISCELLANEOUS for op in symdiff):
        cats.add(OperatorCategory.MISCELLANEOUS)
    return sorted(cats, key=lambda c: c.rank)
