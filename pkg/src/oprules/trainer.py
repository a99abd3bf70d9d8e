"""Training loop: build reasoning trees for functional failures, keep the
ones whose rules demonstrably fix the generation, and log the fixing curve.
"""

from __future__ import annotations

import csv
import json
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .dataset import NlSvaPair
from .errors import (
    BudgetExceeded,
    OprulesError,
    OracleError,
    ProviderError,
    SvaSyntaxError,
    ToolNotFound,
    ToolParseError,
    UnknownSignal,
    UnsupportedConstruct,
)
from .gateway import LlmGateway
from .lexicon import Lexicon, OperatorCategory, extract_operators
from .optree import BackgroundNode, OpRule, OpTree, Provenance, extract_traces, library_append
from .semantics import BoundedOracle
from .semantics.parser import parse_sva

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    max_iterations: int = 25
    questions_per_layer: int = 3
    equivalence: str = "bounded"  # bounded | external
    rng_seed: int = 0
    concurrency_limit: int = 4

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    items_attempted: int
    items_newly_fixed: int
    cumulative_fixing_ratio: float
    trees_built: int
    trees_committed: int
    items_skipped: int = 0


@dataclass
class TrainLog:
    total_items: int
    excluded_items: list[str] = field(default_factory=list)
    records: list[IterationRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "total_items": self.total_items,
            "excluded_items": list(self.excluded_items),
            "records": [vars(r) | {} for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainLog":
        return cls(
            total_items=doc["total_items"],
            excluded_items=list(doc["excluded_items"]),
            records=[IterationRecord(**r) for r in doc["records"]],
        )


@dataclass
class _ItemOutcome:
    item: NlSvaPair
    fixed: bool = False
    tree: OpTree | None = None
    committed: bool = False
    new_rules: tuple[OpRule, ...] = ()
    skipped: str | None = None


def _verdict_equivalent(oracle, item: NlSvaPair, generated: str) -> bool:
    """Equivalence of a generated assertion against the item's golden one.

    A generated assertion the bounded oracle cannot parse or evaluate is an
    ordinary failing generation, not an oracle fault. Genuine oracle faults
    (external tool breakage) surface as OracleError with the item id.
    """
    try:
        return oracle.check(item.golden_sva, generated).equivalent
    except (SvaSyntaxError, UnsupportedConstruct, UnknownSignal, BudgetExceeded):
        return False
    except (ToolNotFound, ToolParseError) as exc:
        raise OracleError(item.id, str(exc)) from exc


def train(
    dataset: list[NlSvaPair],
    config: TrainConfig,
    gateway: LlmGateway,
    library_path: str | Path,
    oracle=None,
    dataset_id: str = "train",
) -> tuple[Path, TrainLog]:
    """Iterate until every item's generation is equivalent to its golden
    assertion or max_iterations is reached.

    Per unfixed item and iteration: generate (with any rules learned from the
    item's own earlier trees), check; on failure build a tree, regenerate with
    its leaf rules, re-check, and commit the tree iff the regeneration is
    equivalent. Fixed items are never re-processed. The fixing-ratio
    denominator is the full dataset, including items excluded because their
    golden assertion does not parse under the bounded oracle.
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    library_path = Path(library_path)
    library_path.parent.mkdir(parents=True, exist_ok=True)
    library_path.write_text("", encoding="utf-8")
    oracle = oracle or BoundedOracle()

    excluded: list[str] = []
    trainable: list[NlSvaPair] = []
    for item in dataset:
        if oracle.name == "bounded":
            try:
                parse_sva(item.golden_sva)
            except OprulesError as exc:
                log.warning("excluding %s: golden assertion not checkable (%s)", item.id, exc)
                excluded.append(item.id)
                continue
        trainable.append(item)

    train_log = TrainLog(total_items=len(dataset), excluded_items=excluded)
    fixed: set[str] = set()
    carried_rules: dict[str, list[OpRule]] = {item.id: [] for item in trainable}

    def process(item: NlSvaPair, iteration: int) -> _ItemOutcome:
        outcome = _ItemOutcome(item=item)
        try:
            generated = gateway.generate_sva(
                item.nl, item.design_context, rules=tuple(carried_rules[item.id])
            )
            if _verdict_equivalent(oracle, item, generated):
                outcome.fixed = True
                return outcome
            background = BackgroundNode(
                nl_spec=item.nl,
                design_context=item.design_context,
                golden_sva=item.golden_sva,
                failing_sva=generated,
            )
            tree = gateway.build_op_tree(
                background,
                questions_per_layer=config.questions_per_layer,
                tree_id=f"{item.id}-it{iteration}",
                provenance=Provenance(dataset_id=dataset_id, item_id=item.id),
                created_iteration=iteration,
            )
            outcome.tree = tree
            leaf_rules = tuple(t.rule for t in extract_traces(tree))
            outcome.new_rules = leaf_rules
            regenerated = gateway.generate_sva(item.nl, item.design_context, rules=leaf_rules)
            if _verdict_equivalent(oracle, item, regenerated):
                outcome.fixed = True
                outcome.committed = True
        except (ProviderError, OprulesError) as exc:
            if isinstance(exc, OracleError):
                raise
            log.warning("iteration %d: skipping %s (%s)", iteration, item.id, exc)
            outcome.skipped = str(exc)
        return outcome

    for iteration in range(1, config.max_iterations + 1):
        pending = [item for item in trainable if item.id not in fixed]
        if not pending:
            break
        with ThreadPoolExecutor(max_workers=max(1, config.concurrency_limit)) as pool:
            outcomes = list(pool.map(lambda it: process(it, iteration), pending))
        newly_fixed = 0
        trees_built = 0
        trees_committed = 0
        skipped = 0
        # commit in dataset order so the library is byte-identical across runs
        for outcome in outcomes:
            if outcome.skipped is not None:
                skipped += 1
                continue
            if outcome.tree is not None:
                trees_built += 1
                carried_rules[outcome.item.id].extend(outcome.new_rules)
            if outcome.committed:
                library_append(library_path, outcome.tree.mark_valid())
                trees_committed += 1
            if outcome.fixed:
                fixed.add(outcome.item.id)
                newly_fixed += 1
        train_log.records.append(
            IterationRecord(
                iteration=iteration,
                items_attempted=len(pending),
                items_newly_fixed=newly_fixed,
                cumulative_fixing_ratio=len(fixed) / len(dataset),
                trees_built=trees_built,
                trees_committed=trees_committed,
                items_skipped=skipped,
            )
        )
    return library_path, train_log


def fixing_ratio_curve(train_log: TrainLog) -> list[tuple[int, float]]:
    """Cumulative (iteration, fixing ratio) series; non-decreasing."""
    return [(r.iteration, r.cumulative_fixing_ratio) for r in train_log.records]


def write_curve_csv(train_log: TrainLog, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "fixing_ratio", "items_newly_fixed", "trees_committed"])
        for r in train_log.records:
            writer.writerow(
                [r.iteration, f"{r.cumulative_fixing_ratio:.6f}", r.items_newly_fixed, r.trees_committed]
            )


def write_train_log(train_log: TrainLog, json_path: str | Path, csv_path: str | Path) -> None:
    Path(json_path).write_text(train_log.to_json() + "\n", encoding="utf-8")
    write_curve_csv(train_log, csv_path)


def stratified_sample(
    dataset: list[NlSvaPair],
    ratio: float,
    seed: int = 0,
    lexicon: Lexicon | None = None,
) -> list[NlSvaPair]:
    """Operator-category stratified subset of round(ratio * N) items.

    Items are bucketed by every category present in their golden assertion,
    buckets are drawn evenly (seeded), items reachable through several
    categories appear at most once, and any shortfall is topped up from the
    largest remaining buckets, then from items with no recognized operators.
    """
    if not (0 < ratio <= 1):
        raise ValueError("ratio must be in (0, 1]")
    rng = random.Random(seed)
    target = round(ratio * len(dataset))
    buckets: dict[OperatorCategory, list[NlSvaPair]] = {c: [] for c in OperatorCategory}
    uncategorized: list[NlSvaPair] = []
    for item in dataset:
        cats = {op.category for op in extract_operators(item.golden_sva, lexicon)}
        if not cats:
            uncategorized.append(item)
            continue
        for cat in sorted(cats, key=lambda c: c.rank):
            buckets[cat].append(item)
    active = [c for c in OperatorCategory if buckets[c]]
    for cat in active:
        rng.shuffle(buckets[cat])
    rng.shuffle(uncategorized)

    selected: dict[str, NlSvaPair] = {}

    def draw(cat: OperatorCategory) -> bool:
        while buckets[cat]:
            item = buckets[cat].pop()
            if item.id not in selected:
                selected[item.id] = item
                return True
        return False

    if active:
        base, extra = divmod(target, len(active))
        for i, cat in enumerate(active):
            quota = base + (1 if i < extra else 0)
            for _ in range(quota):
                if len(selected) >= target or not draw(cat):
                    break
    while len(selected) < target:
        remaining = [(len([x for x in buckets[c] if x.id not in selected]), c) for c in active]
        remaining = [(n, c) for n, c in remaining if n > 0]
        if not remaining:
            break
        remaining.sort(key=lambda nc: (-nc[0], nc[1].rank))
        draw(remaining[0][1])
    for item in uncategorized:
        if len(selected) >= target:
            break
        if item.id not in selected:
            selected[item.id] = item
    return list(selected.values())
