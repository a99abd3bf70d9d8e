"""NL/assertion pair records, JSONL ingestion, and the seeded split."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import DuplicateId, SchemaError

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class NlSvaPair:
    id: str
    nl: str
    golden_sva: str
    design_context: tuple[tuple[str, int], ...] = ()
    source: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("id must be non-empty")
        if not self.nl.strip() or not self.golden_sva.strip():
            raise ValueError("nl and golden_sva must be non-empty")


def parse_design_context(raw) -> tuple[tuple[str, int], ...]:
    if raw is None:
        return ()
    out = []
    for entry in raw:
        if isinstance(entry, str):
            out.append((entry, 1))
        elif isinstance(entry, dict):
            out.append((str(entry["name"]), int(entry.get("width", 1))))
        elif isinstance(entry, (list, tuple)) and len(entry) == 2:
            out.append((str(entry[0]), int(entry[1])))
        else:
            raise ValueError(f"bad design_context entry {entry!r}")
    return tuple(out)


def pair_from_dict(doc: dict) -> NlSvaPair:
    return NlSvaPair(
        id=str(doc["id"]),
        nl=doc["nl"],
        golden_sva=doc["golden_sva"],
        design_context=parse_design_context(doc.get("design_context")),
        source=str(doc.get("source", "")),
    )


def pair_to_dict(pair: NlSvaPair) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "id": pair.id,
        "nl": pair.nl,
        "golden_sva": pair.golden_sva,
        "design_context": [{"name": n, "width": w} for n, w in pair.design_context],
        "source": pair.source,
    }


def load_dataset(path: str | Path) -> tuple[list[NlSvaPair], list[SchemaError]]:
    """Validated records plus one collected error per rejected record.

    Duplicate ids reject the later record; a missing design_context is fine
    (it only disables context-aware masking downstream).
    """
    pairs: list[NlSvaPair] = []
    errors: list[SchemaError] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for index, raw in enumerate(fh):
            raw = raw.strip()
            if not raw:
                continue
            try:
                doc = json.loads(raw)
                if not isinstance(doc, dict):
                    raise ValueError("record is not an object")
                pair = pair_from_dict(doc)
            except (ValueError, KeyError, TypeError) as exc:
                errors.append(SchemaError(index, str(exc)))
                continue
            if pair.id in seen:
                errors.append(DuplicateId(index, pair.id))
                continue
            seen.add(pair.id)
            pairs.append(pair)
    return pairs, errors


def save_dataset(path: str | Path, pairs: list[NlSvaPair]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair_to_dict(pair), sort_keys=True) + "\n")


def split(
    dataset: list[NlSvaPair], train_fraction: float = 0.8, seed: int = 0
) -> tuple[list[NlSvaPair], list[NlSvaPair]]:
    """Seeded shuffle then prefix split; disjoint and exhaustive."""
    if not (0 < train_fraction < 1):
        raise ValueError("train_fraction must be in (0, 1)")
    shuffled = list(dataset)
    random.Random(seed).shuffle(shuffled)
    n_train = round(train_fraction * len(shuffled))
    return shuffled[:n_train], shuffled[n_train:]


def micro_dataset_path() -> Path:
    """Bundled 12-item synthetic demo dataset (supported operator subset)."""
    return Path(str(resources.files("oprules").joinpath("data/micro.jsonl")))


def load_micro_dataset() -> list[NlSvaPair]:
    pairs, errors = load_dataset(micro_dataset_path())
    if errors:
        raise AssertionError(f"bundled dataset is corrupt: {errors}")
    return pairs
