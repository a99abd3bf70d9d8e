"""Per-item and aggregate metrics plus the operator-level failure taxonomy."""

from __future__ import annotations

import csv
import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .dataset import NlSvaPair
from .errors import (
    BudgetExceeded,
    MissingPrediction,
    SvaSyntaxError,
    UnknownSignal,
    UnsupportedConstruct,
)
from .lexicon import Lexicon, OperatorCategory, classify_mismatch, extract_operators
from .semantics import BoundedOracle, Verdict
from .semantics.parser import syntax_check

log = logging.getLogger(__name__)

# Operators are split from identifiers so the operator choice itself moves
# the score: "req|->gnt" is three tokens.
_BLEU_TOKEN_RE = re.compile(
    r"\|=>|\|->|!==|===|##|&&|\|\||==|!=|\$?[A-Za-z_]\w*|\d+|[()\[\]{}:^!@,;<>=*+-]|\S"
)


def bleu_tokens(text: str) -> list[str]:
    return _BLEU_TOKEN_RE.findall(text)


def bleu(candidate: str, reference: str) -> float:
    """Sentence-level BLEU-4: uniform weights, add-one smoothing whenever an
    n-gram order has zero matches, brevity penalty exp(1 - r/c) for c < r.
    Empty candidates score 0."""
    cand = bleu_tokens(candidate)
    ref = bleu_tokens(reference)
    if not cand:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        cand_ngrams = Counter(tuple(cand[i : i + n]) for i in range(len(cand) - n + 1))
        ref_ngrams = Counter(tuple(ref[i : i + n]) for i in range(len(ref) - n + 1))
        total = sum(cand_ngrams.values())
        matches = sum(min(c, ref_ngrams[g]) for g, c in cand_ngrams.items())
        if matches == 0:
            precision = (matches + 1) / (total + 1)
        else:
            precision = matches / total
        log_sum += math.log(precision)
    brevity = 1.0 if len(cand) >= len(ref) else math.exp(1 - len(ref) / len(cand))
    return brevity * math.exp(log_sum / 4)


@dataclass(frozen=True)
class ItemEval:
    item_id: str
    bleu: float
    syn: int
    func: int | None  # None = skipped (not checkable by the oracle)
    relaxed_func: int | None


@dataclass
class EvalReport:
    items: list[ItemEval] = field(default_factory=list)
    taxonomy: Counter = field(default_factory=Counter)  # OperatorCategory -> failures
    errors: list[MissingPrediction] = field(default_factory=list)

    @property
    def skipped(self) -> int:
        return sum(1 for it in self.items if it.func is None)

    def _mean(self, values: list[float]) -> float:
        return sum(values) / len(values) if values else 0.0

    @property
    def mean_bleu(self) -> float:
        return self._mean([it.bleu for it in self.items])

    @property
    def mean_syn(self) -> float:
        return self._mean([float(it.syn) for it in self.items])

    @property
    def mean_func(self) -> float:
        return self._mean([float(it.func) for it in self.items if it.func is not None])

    @property
    def mean_relaxed_func(self) -> float:
        return self._mean(
            [float(it.relaxed_func) for it in self.items if it.relaxed_func is not None]
        )

    def to_dict(self) -> dict:
        return {
            "aggregates": {
                "bleu": self.mean_bleu,
                "syn": self.mean_syn,
                "func": self.mean_func,
                "relaxed_func": self.mean_relaxed_func,
                "skipped": self.skipped,
                "items": len(self.items),
            },
            "taxonomy": {cat.value: self.taxonomy.get(cat, 0) for cat in OperatorCategory},
            "items": [
                {
                    "id": it.item_id,
                    "bleu": it.bleu,
                    "syn": it.syn,
                    "func": "skipped" if it.func is None else it.func,
                    "relaxed_func": "skipped" if it.relaxed_func is None else it.relaxed_func,
                }
                for it in self.items
            ],
            "missing_predictions": [e.item_id for e in self.errors],
        }


def _normalize_predictions(predictions) -> dict[str, str]:
    if isinstance(predictions, Mapping):
        return dict(predictions)
    out = {}
    for rec in predictions:
        out[str(rec["id"])] = rec.get("final_sva", rec.get("sva", ""))
    return out


def evaluate(
    dataset: Sequence[NlSvaPair],
    predictions,
    oracle=None,
    lexicon: Lexicon | None = None,
) -> EvalReport:
    """Score predictions item by item.

    syn comes from the parser; unsyntactic assertions force func and
    relaxed_func to 0. Syntactically fine assertions the bounded oracle
    cannot evaluate (out-of-subset constructs) are skipped: excluded from the
    func/relaxed_func denominators and counted separately. func requires
    equivalence; relaxed_func also accepts generated assertions implied by
    the golden one on every trace. Missing predictions are collected and
    scored as failures.
    """
    oracle = oracle or BoundedOracle()
    preds = _normalize_predictions(predictions)
    report = EvalReport()
    for item in dataset:
        if item.id not in preds:
            report.errors.append(MissingPrediction(item.id))
            report.items.append(ItemEval(item.id, 0.0, 0, 0, 0))
            continue
        generated = preds[item.id]
        score = bleu(generated, item.golden_sva)
        try:
            syntax_check(generated)
            syn = 1
        except SvaSyntaxError:
            syn = 0
        if syn == 0:
            report.items.append(ItemEval(item.id, score, 0, 0, 0))
            continue
        func: int | None
        relaxed: int | None
        try:
            verdict = oracle.check(item.golden_sva, generated).verdict
            func = 1 if verdict is Verdict.EQUIVALENT else 0
            relaxed = (
                1
                if verdict in (Verdict.EQUIVALENT, Verdict.GOLDEN_IMPLIES_GENERATED)
                else 0
            )
        except UnsupportedConstruct:
            func = relaxed = None
        except (SvaSyntaxError, UnknownSignal, BudgetExceeded) as exc:
            log.warning("cannot functionally score %s: %s", item.id, exc)
            func = relaxed = None
        report.items.append(ItemEval(item.id, score, syn, func, relaxed))
        if func == 0:
            for cat in classify_mismatch(
                extract_operators(generated, lexicon),
                extract_operators(item.golden_sva, lexicon),
            ):
                report.taxonomy[cat] += 1
    return report


def taxonomy_report(
    dataset: Sequence[NlSvaPair],
    predictions,
    report: EvalReport | None = None,
    lexicon: Lexicon | None = None,
) -> Counter:
    """Per-category counts of functional failures, keyed to the operators the
    generated assertion used. Computed during evaluate; recomputed here when
    only raw predictions are at hand."""
    if report is not None:
        return Counter(report.taxonomy)
    return Counter(evaluate(dataset, predictions, lexicon=lexicon).taxonomy)


def reduction_percent(base: int, ours: int) -> int | None:
    """round((base - ours) / base * 100), None when base is 0."""
    if base == 0:
        return None
    return round((base - ours) / base * 100)


def format_reduction(base: int, ours: int) -> str:
    pct = reduction_percent(base, ours)
    if pct is None:
        return "--"
    if pct > 0:
        return f"-{pct}%"
    if pct == 0:
        return "0%"
    return f"+{-pct}%"


def taxonomy_rows(
    ours: Mapping, baseline: Mapping | None = None
) -> list[dict]:
    """Table rows per category plus a total row; with a baseline, each row
    carries the percentage reduction."""
    rows = []
    total_base = 0
    total_ours = 0
    for cat in OperatorCategory:
        count = ours.get(cat, 0)
        row = {"category": cat.label, "ours": count}
        total_ours += count
        if baseline is not None:
            base = baseline.get(cat, 0)
            total_base += base
            row["base"] = base
            row["reduction"] = format_reduction(base, count)
        rows.append(row)
    total_row = {"category": "Total Failures", "ours": total_ours}
    if baseline is not None:
        total_row["base"] = total_base
        total_row["reduction"] = format_reduction(total_base, total_ours)
    rows.append(total_row)
    return rows


def write_report(report: EvalReport, json_path: str | Path, csv_path: str | Path) -> None:
    Path(json_path).write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "bleu", "syn", "func", "relaxed_func"])
        for it in report.items:
            writer.writerow(
                [
                    it.item_id,
                    f"{it.bleu:.6f}",
                    it.syn,
                    "skipped" if it.func is None else it.func,
                    "skipped" if it.relaxed_func is None else it.relaxed_func,
                ]
            )


def write_taxonomy_csv(rows: list[dict], path: str | Path) -> None:
    fieldnames = ["category", "base", "ours", "reduction"]
    present = [f for f in fieldnames if any(f in row for row in rows)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=present)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in present})
