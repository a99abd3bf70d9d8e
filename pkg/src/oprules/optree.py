"""Operator reasoning trees and their on-disk library.

A tree records how one failing assertion was diagnosed: a background node
(the training item plus the generation that failed), reasoning nodes in
three strictly ordered layers, and one correction rule per leaf. Root-to-leaf
paths are the retrievable unit at inference time. The library is an
append-only JSONL file, one tree per line.
"""

from __future__ import annotations

import fcntl
import json
import os
import re
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from .errors import InvalidTree, MalformedTree, SchemaError
from .lexicon import Lexicon, OperatorSet, extract_operators

SCHEMA_VERSION = 1

_IDENT_RE = re.compile(r"[A-Za-z_][\w$]*")


class Layer(Enum):
    CONTEXTUAL_DIAGNOSIS = "contextual_diagnosis"
    THEORETICAL_GROUNDING = "theoretical_grounding"
    RULE_GENERATION = "rule_generation"

    @property
    def depth(self) -> int:
        return _LAYER_DEPTH[self]


_LAYER_DEPTH = {
    Layer.CONTEXTUAL_DIAGNOSIS: 1,
    Layer.THEORETICAL_GROUNDING: 2,
    Layer.RULE_GENERATION: 3,
}


@dataclass(frozen=True)
class OpRule:
    """Leaf-level correction directive tied to at least one operator."""

    directive: str
    target_operators: OperatorSet
    abstracted: bool = False

    def __post_init__(self):
        if not self.target_operators:
            raise ValueError("a rule must name at least one operator context")


@dataclass(frozen=True)
class BackgroundNode:
    nl_spec: str
    design_context: tuple[tuple[str, int], ...]  # (signal name, width)
    golden_sva: str
    failing_sva: str

    def __post_init__(self):
        if not self.nl_spec.strip() or not self.golden_sva.strip():
            raise ValueError("background requires a non-empty spec and golden assertion")

    def signal_names(self) -> frozenset[str]:
        """Identifiers specific to the training instance: declared signals
        plus anything identifier-shaped in the golden/failing assertions."""
        names = {name for name, _ in self.design_context}
        for text in (self.golden_sva, self.failing_sva):
            names.update(_IDENT_RE.findall(text))
        return frozenset(names)


@dataclass(frozen=True)
class ReasoningNode:
    node_id: str
    layer: Layer
    question: str
    answer: str
    operator_tags: OperatorSet
    parent: str | None = None
    rule: OpRule | None = None


@dataclass(frozen=True)
class Provenance:
    dataset_id: str
    item_id: str


@dataclass(frozen=True)
class OpTree:
    id: str
    background: BackgroundNode
    nodes: dict[str, ReasoningNode]
    root_ids: tuple[str, ...]
    valid: bool = False
    created_iteration: int = 1
    provenance: Provenance = Provenance("", "")

    def children_of(self, node_id: str) -> list[ReasoningNode]:
        kids = [n for n in self.nodes.values() if n.parent == node_id]
        kids.sort(key=lambda n: n.node_id)
        return kids

    def mark_valid(self) -> "OpTree":
        return replace(self, valid=True)


@dataclass(frozen=True)
class ReasoningTrace:
    tree_id: str
    node_path: tuple[str, ...]
    flattened_text: str
    rule: OpRule
    # Identifiers from the source training item, used for signal abstraction.
    training_signals: frozenset[str] = frozenset()


def flatten_path(background: BackgroundNode, nodes: list[ReasoningNode]) -> str:
    parts = [background.nl_spec.strip()]
    for node in nodes:
        parts.append(f"Q: {node.question.strip()}")
        parts.append(f"A: {node.answer.strip()}")
    return "\n".join(parts)


def extract_traces(tree: OpTree) -> list[ReasoningTrace]:
    """One trace per leaf, depth-first with node-id tiebreak.

    Raises MalformedTree on cycles, layer-order violations, dangling parents,
    or leaves that carry no rule.
    """
    for rid in tree.root_ids:
        if rid not in tree.nodes:
            raise MalformedTree(f"root {rid!r} not among nodes")
    for node in tree.nodes.values():
        if node.parent is not None and node.parent not in tree.nodes:
            raise MalformedTree(f"node {node.node_id!r} has unknown parent {node.parent!r}")
        expected_depth = 1 if node.parent is None else tree.nodes[node.parent].layer.depth + 1
        if node.layer.depth != expected_depth:
            raise MalformedTree(
                f"node {node.node_id!r} at layer {node.layer.value} breaks the "
                f"diagnosis/grounding/rule ordering"
            )
        if node.parent is None and node.node_id not in tree.root_ids:
            raise MalformedTree(f"parentless node {node.node_id!r} not registered as a root")

    traces: list[ReasoningTrace] = []
    signals = tree.background.signal_names()

    def walk(node: ReasoningNode, path: list[ReasoningNode], seen: set[str]):
        if node.node_id in seen:
            raise MalformedTree(f"cycle through node {node.node_id!r}")
        path = path + [node]
        children = tree.children_of(node.node_id)
        if not children:
            if node.layer is not Layer.RULE_GENERATION or node.rule is None:
                raise MalformedTree(f"leaf {node.node_id!r} carries no rule")
            traces.append(
                ReasoningTrace(
                    tree_id=tree.id,
                    node_path=tuple(n.node_id for n in path),
                    flattened_text=flatten_path(tree.background, path),
                    rule=node.rule,
                    training_signals=signals,
                )
            )
            return
        for child in children:
            walk(child, path, seen | {node.node_id})

    for rid in sorted(tree.root_ids):
        walk(tree.nodes[rid], [], set())
    return traces


# --- serialization ---


def _ops_to_json(ops: OperatorSet) -> list[str]:
    return sorted(o.token for o in ops)


def _ops_from_json(tokens: list[str], lexicon: Lexicon) -> OperatorSet:
    return frozenset(lexicon.operator(t) for t in tokens)


def tree_to_dict(tree: OpTree) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "id": tree.id,
        "background": {
            "nl_spec": tree.background.nl_spec,
            "design_context": [[n, w] for n, w in tree.background.design_context],
            "golden_sva": tree.background.golden_sva,
            "failing_sva": tree.background.failing_sva,
        },
        "nodes": {
            nid: {
                "layer": node.layer.value,
                "question": node.question,
                "answer": node.answer,
                "operator_tags": _ops_to_json(node.operator_tags),
                "parent": node.parent,
                "rule": None
                if node.rule is None
                else {
                    "directive": node.rule.directive,
                    "target_operators": _ops_to_json(node.rule.target_operators),
                    "abstracted": node.rule.abstracted,
                },
            }
            for nid, node in sorted(tree.nodes.items())
        },
        "root_ids": sorted(tree.root_ids),
        "valid": tree.valid,
        "created_iteration": tree.created_iteration,
        "provenance": {
            "dataset_id": tree.provenance.dataset_id,
            "item_id": tree.provenance.item_id,
        },
    }


def tree_to_json(tree: OpTree) -> str:
    return json.dumps(tree_to_dict(tree), sort_keys=True, separators=(",", ":"))


def tree_from_dict(doc: dict, lexicon: Lexicon | None = None) -> OpTree:
    lexicon = lexicon or Lexicon()
    background = BackgroundNode(
        nl_spec=doc["background"]["nl_spec"],
        design_context=tuple((n, int(w)) for n, w in doc["background"]["design_context"]),
        golden_sva=doc["background"]["golden_sva"],
        failing_sva=doc["background"]["failing_sva"],
    )
    nodes = {}
    for nid, nd in doc["nodes"].items():
        rule = None
        if nd.get("rule") is not None:
            rule = OpRule(
                directive=nd["rule"]["directive"],
                target_operators=_ops_from_json(nd["rule"]["target_operators"], lexicon),
                abstracted=bool(nd["rule"]["abstracted"]),
            )
        nodes[nid] = ReasoningNode(
            node_id=nid,
            layer=Layer(nd["layer"]),
            question=nd["question"],
            answer=nd["answer"],
            # Tags are recomputed from the answer so alignment scoring always
            # reflects the current lexicon, not whatever was on disk.
            operator_tags=extract_operators(nd["answer"], lexicon),
            parent=nd.get("parent"),
            rule=rule,
        )
    return OpTree(
        id=doc["id"],
        background=background,
        nodes=nodes,
        root_ids=tuple(doc["root_ids"]),
        valid=bool(doc["valid"]),
        created_iteration=int(doc["created_iteration"]),
        provenance=Provenance(
            dataset_id=doc["provenance"]["dataset_id"],
            item_id=doc["provenance"]["item_id"],
        ),
    )


def library_append(path: str | Path, tree: OpTree) -> None:
    """Append one validated tree; a single locked write keeps concurrent
    appenders from interleaving and readers from seeing torn records."""
    if not tree.valid:
        raise InvalidTree(f"tree {tree.id!r} was not validated; refusing to commit")
    line = (tree_to_json(tree) + "\n").encode("utf-8")
    fd = os.open(str(path), os.O_WRONLY | os.O_CREAT | os.O_APPEND, 0o644)
    try:
        fcntl.flock(fd, fcntl.LOCK_EX)
        os.write(fd, line)
    finally:
        fcntl.flock(fd, fcntl.LOCK_UN)
        os.close(fd)


def library_load(
    path: str | Path, lexicon: Lexicon | None = None
) -> tuple[list[OpTree], list[SchemaError]]:
    """All parseable trees plus one collected error per rejected record."""
    trees: list[OpTree] = []
    errors: list[SchemaError] = []
    with open(path, "r", encoding="utf-8") as fh:
        for index, raw in enumerate(fh):
            raw = raw.strip()
            if not raw:
                continue
            try:
                doc = json.loads(raw)
                if not isinstance(doc, dict):
                    raise ValueError("record is not an object")
                if doc.get("schema_version") != SCHEMA_VERSION:
                    raise ValueError(f"unsupported schema_version {doc.get('schema_version')!r}")
                trees.append(tree_from_dict(doc, lexicon))
            except (ValueError, KeyError, TypeError) as exc:
                errors.append(SchemaError(index, str(exc)))
    return trees, errors
