"""Canonical data model: QA pairs, versioned datasets, splits, statistics.

Datasets are immutable values once constructed; every transformation builds a
new Dataset. Persistence is JSONL (one pair per line) so files diff, stream,
and append cleanly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Optional

from .errors import DatasetError
from .rng import shuffled


class Version(str, Enum):
    V1 = "v1.0"
    V2 = "v2.0"
    V3 = "v3.0"
    SYNTHETIC = "synthetic"


class Provenance(str, Enum):
    ORIGINAL = "original"
    SYNTHETIC = "synthetic"


#: Forum keys a pair may come from; "custom" covers anything else.
SOURCES = (
    "avs-forum",
    "smartthings",
    "home-assistant",
    "ezlo",
    "cocoontech",
    "other-forums",
    "digital-home",
    "diynot",
    "whirlpool",
    "google-nest",
    "apple-community",
    "verizon",
    "level1techs",
    "openwrt",
    "diy-home",
    "reddit",
    "snb",
    "toms-guide",
    "stack-exchange",
)

#: JSONL field order; files are written with keys in exactly this order.
JSONL_FIELDS = (
    "id",
    "source",
    "question",
    "answer",
    "version",
    "parent_id",
    "provenance",
    "context",
)


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class QAPair:
    id: str
    source: str
    question: str
    answer: str
    version: Version
    parent_id: Optional[str] = None
    provenance: Provenance = Provenance.ORIGINAL
    context: Optional[str] = None

    def validate(self) -> None:
        if self.source not in SOURCES and self.source != "custom":
            raise DatasetError(f"pair {self.id!r}: unknown source {self.source!r}")
        if not self.question.strip():
            raise DatasetError(f"pair {self.id!r}: question is empty")
        if not self.answer.strip() and self.version is not Version.SYNTHETIC:
            # Synthetic pairs may still be awaiting human answer entry;
            # every other version must carry an answer.
            raise DatasetError(f"pair {self.id!r}: answer is empty")
        if self.version is Version.V1:
            if self.parent_id is not None:
                raise DatasetError(f"pair {self.id!r}: v1.0 pairs must not have a parent_id")
        elif self.parent_id is None:
            raise DatasetError(
                f"pair {self.id!r}: {self.version.value} pairs must have a parent_id"
            )
        expected = (
            Provenance.SYNTHETIC if self.version is Version.SYNTHETIC else Provenance.ORIGINAL
        )
        if self.provenance is not expected:
            raise DatasetError(
                f"pair {self.id!r}: provenance {self.provenance.value!r} "
                f"does not match version {self.version.value!r}"
            )

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "source": self.source,
            "question": self.question,
            "answer": self.answer,
            "version": self.version.value,
            "parent_id": self.parent_id,
            "provenance": self.provenance.value,
            "context": self.context,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "QAPair":
        missing = [f for f in ("id", "source", "question", "answer", "version") if f not in obj]
        if missing:
            raise DatasetError(f"missing fields: {', '.join(missing)}")
        try:
            version = Version(obj["version"])
        except ValueError:
            raise DatasetError(f"unknown version {obj['version']!r}") from None
        provenance_raw = obj.get("provenance")
        if provenance_raw is None:
            provenance = Provenance.SYNTHETIC if version is Version.SYNTHETIC else Provenance.ORIGINAL
        else:
            try:
                provenance = Provenance(provenance_raw)
            except ValueError:
                raise DatasetError(f"unknown provenance {provenance_raw!r}") from None
        return cls(
            id=str(obj["id"]),
            source=str(obj["source"]),
            question=str(obj["question"]),
            answer=str(obj["answer"]),
            version=version,
            parent_id=obj.get("parent_id"),
            provenance=provenance,
            context=obj.get("context"),
        )


@dataclass(frozen=True)
class Dataset:
    version: Version
    pairs: tuple[QAPair, ...]
    created_at: datetime = field(compare=False, default_factory=_utcnow)
    notes: str = field(compare=False, default="")

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(self.pairs))
        seen: set[str] = set()
        for pair in self.pairs:
            pair.validate()
            if pair.version is not self.version:
                raise DatasetError(
                    f"pair {pair.id!r} has version {pair.version.value!r}, "
                    f"dataset is {self.version.value!r}"
                )
            if pair.id in seen:
                raise DatasetError(f"duplicate pair id {pair.id!r}")
            seen.add(pair.id)

    def __len__(self) -> int:
        return len(self.pairs)

    def by_id(self) -> dict[str, QAPair]:
        return {p.id: p for p in self.pairs}


@dataclass(frozen=True)
class Splits:
    train_ids: tuple[str, ...]
    val_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    seed: int
    source_version: Version


@dataclass(frozen=True)
class StatsReport:
    per_source_counts: dict[str, int]
    avg_question_len_words: float
    avg_answer_len_words: float
    total_pairs: int

    def to_json_dict(self) -> dict:
        return {
            "per_source_counts": dict(sorted(self.per_source_counts.items())),
            "avg_question_len_words": self.avg_question_len_words,
            "avg_answer_len_words": self.avg_answer_len_words,
            "total_pairs": self.total_pairs,
        }


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write one JSON object per pair, fields in JSONL_FIELDS order."""
    path = Path(path)
    for pair in dataset.pairs:
        pair.validate()
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8") as fh:
        for pair in dataset.pairs:
            fh.write(json.dumps(pair.to_json_dict(), ensure_ascii=False))
            fh.write("\n")
    tmp.replace(path)


def load_dataset(path: str | Path, expected_version: Optional[Version] = None) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"no such dataset file: {path}")
    pairs: list[QAPair] = []
    seen: dict[str, int] = {}
    version = expected_version
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}:{lineno}: malformed line: {exc}") from None
            if not isinstance(obj, dict):
                raise DatasetError(f"{path}:{lineno}: malformed line: not a JSON object")
            try:
                pair = QAPair.from_json_dict(obj)
                pair.validate()
            except DatasetError as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}") from None
            if version is None:
                version = pair.version
            elif pair.version is not version:
                raise DatasetError(
                    f"{path}:{lineno}: version {pair.version.value!r} does not match "
                    f"expected {version.value!r}"
                )
            if pair.id in seen:
                raise DatasetError(
                    f"{path}:{lineno}: duplicate id {pair.id!r} (first seen on line {seen[pair.id]})"
                )
            seen[pair.id] = lineno
            pairs.append(pair)
    return Dataset(version=version if version is not None else Version.V1, pairs=tuple(pairs))


def split_dataset(dataset: Dataset, counts: tuple[int, int, int], seed: int) -> Splits:
    """Deterministic seeded partition into train/val/test id sets.

    Ids are sorted before shuffling, so the result depends only on the id set,
    the counts, and the seed -- not on pair order in the file.
    """
    n_train, n_val, n_test = counts
    if min(n_train, n_val, n_test) < 0:
        raise DatasetError("split counts must be non-negative")
    total = n_train + n_val + n_test
    if total > len(dataset.pairs):
        raise DatasetError(
            f"split counts sum to {total} but dataset has only {len(dataset.pairs)} pairs"
        )
    order = shuffled(sorted(p.id for p in dataset.pairs), seed)
    return Splits(
        train_ids=tuple(order[:n_train]),
        val_ids=tuple(order[n_train : n_train + n_val]),
        test_ids=tuple(order[n_train + n_val : total]),
        seed=seed,
        source_version=dataset.version,
    )


def save_splits(splits: Splits, path: str | Path) -> None:
    obj = {
        "seed": splits.seed,
        "source_version": splits.source_version.value,
        "train_ids": list(splits.train_ids),
        "val_ids": list(splits.val_ids),
        "test_ids": list(splits.test_ids),
    }
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def load_splits(path: str | Path) -> Splits:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError(f"cannot read splits file {path}: {exc}") from None
    try:
        return Splits(
            train_ids=tuple(obj["train_ids"]),
            val_ids=tuple(obj["val_ids"]),
            test_ids=tuple(obj["test_ids"]),
            seed=int(obj["seed"]),
            source_version=Version(obj["source_version"]),
        )
    except (KeyError, ValueError) as exc:
        raise DatasetError(f"invalid splits file {path}: {exc}") from None


def word_count(text: str) -> int:
    """Whitespace-token word count; a word is a maximal non-whitespace run."""
    return len(text.split())


def dataset_stats(dataset: Dataset) -> StatsReport:
    if not dataset.pairs:
        raise DatasetError("cannot compute statistics of an empty dataset")
    per_source: dict[str, int] = {}
    q_words = 0
    a_words = 0
    for pair in dataset.pairs:
        per_source[pair.source] = per_source.get(pair.source, 0) + 1
        q_words += word_count(pair.question)
        a_words += word_count(pair.answer)
    n = len(dataset.pairs)
    return StatsReport(
        per_source_counts=per_source,
        avg_question_len_words=q_words / n,
        avg_answer_len_words=a_words / n,
        total_pairs=n,
    )
