"""Refinement proposals and their append-log store.

Records are persisted as JSONL; updates append a new full snapshot and the
last line per record id wins on load. A crash can therefore truncate at most
the line being written, never corrupt decided records.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Optional

from ..errors import RefineError


class Stage(str, Enum):
    REPHRASE = "rephrase"
    SUMMARIZE = "summarize"
    SYNTH_QUESTION = "synth_question"
    CONTEXT = "context"


class RecordStatus(str, Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    EDITED = "edited"
    REJECTED = "rejected"
    # The endpoint produced nothing usable; not reviewable, retried on rerun.
    FAILED = "failed"


#: Statuses that block a new proposal for the same (pair, stage).
ACTIVE_STATUSES = frozenset(
    {RecordStatus.PENDING, RecordStatus.ACCEPTED, RecordStatus.EDITED}
)


class DecisionConflict(RefineError):
    """The record was already decided (or otherwise not PENDING)."""


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def encode_qa_block(question: str, answer: str) -> str:
    """Two-field text used where a stage touches both question and answer."""
    return f"Q: {question}\nA: {answer}"


def parse_qa_block(text: str) -> Optional[tuple[str, str]]:
    """Inverse of encode_qa_block; tolerant of surrounding whitespace and a
    multi-line answer. None when the text is not in Q:/A: form."""
    stripped = text.strip()
    if not stripped.startswith("Q:"):
        return None
    sep = stripped.find("\nA:")
    if sep < 0:
        return None
    question = stripped[2:sep].strip()
    answer = stripped[sep + 3 :].strip()
    if not question:
        return None
    return question, answer


@dataclass(frozen=True)
class RefinementRecord:
    id: str
    pair_id: str
    stage: Stage
    original: str
    proposed: str
    status: RecordStatus
    final_text: Optional[str] = None
    reviewer_note: Optional[str] = None
    model_name: str = ""
    created_at: str = ""

    def validate(self) -> None:
        if self.status is RecordStatus.EDITED:
            if not (self.final_text or "").strip():
                raise RefineError(f"record {self.id!r}: EDITED requires final_text")
        elif self.status is RecordStatus.ACCEPTED:
            if self.final_text != self.proposed:
                raise RefineError(f"record {self.id!r}: ACCEPTED must carry proposed text")
        elif self.final_text is not None:
            raise RefineError(
                f"record {self.id!r}: final_text not allowed in status {self.status.value}"
            )

    @property
    def decided(self) -> bool:
        return self.status in (RecordStatus.ACCEPTED, RecordStatus.EDITED, RecordStatus.REJECTED)

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "pair_id": self.pair_id,
            "stage": self.stage.value,
            "original": self.original,
            "proposed": self.proposed,
            "status": self.status.value,
            "final_text": self.final_text,
            "reviewer_note": self.reviewer_note,
            "model_name": self.model_name,
            "created_at": self.created_at,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "RefinementRecord":
        return cls(
            id=str(obj["id"]),
            pair_id=str(obj["pair_id"]),
            stage=Stage(obj["stage"]),
            original=str(obj["original"]),
            proposed=str(obj["proposed"]),
            status=RecordStatus(obj["status"]),
            final_text=obj.get("final_text"),
            reviewer_note=obj.get("reviewer_note"),
            model_name=str(obj.get("model_name", "")),
            created_at=str(obj.get("created_at", "")),
        )


class RecordStore:
    """Append-log JSONL store for RefinementRecords; safe for one writer and
    many readers. All mutating calls are serialized on an internal lock."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: dict[str, RefinementRecord] = {}
        self._order: dict[str, int] = {}  # id -> first-seen line, for stable sort
        if self.path.exists():
            with self.path.open("r", encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        record = RefinementRecord.from_json_dict(json.loads(line))
                    except (json.JSONDecodeError, KeyError, ValueError) as exc:
                        raise RefineError(f"{self.path}:{lineno}: bad record line: {exc}") from None
                    self._records[record.id] = record
                    self._order.setdefault(record.id, lineno)

    def _write(self, record: RefinementRecord) -> None:
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record.to_json_dict(), ensure_ascii=False))
            fh.write("\n")
            fh.flush()

    def get(self, record_id: str) -> RefinementRecord:
        with self._lock:
            try:
                return self._records[record_id]
            except KeyError:
                raise KeyError(record_id) from None

    def all_records(self) -> list[RefinementRecord]:
        """Records ordered by (created_at, id) -- the listing order."""
        with self._lock:
            return sorted(self._records.values(), key=lambda r: (r.created_at, r.id))

    def filtered(
        self, stage: Optional[Stage] = None, status: Optional[RecordStatus] = None
    ) -> list[RefinementRecord]:
        return [
            r
            for r in self.all_records()
            if (stage is None or r.stage is stage) and (status is None or r.status is status)
        ]

    def active_pair_ids(self, stage: Stage) -> set[str]:
        """Pairs that already have a live (pending or accepted/edited) proposal."""
        with self._lock:
            return {
                r.pair_id
                for r in self._records.values()
                if r.stage is stage and r.status in ACTIVE_STATUSES
            }

    def attempt_count(self, pair_id: str, stage: Stage) -> int:
        with self._lock:
            return sum(
                1
                for r in self._records.values()
                if r.pair_id == pair_id and r.stage is stage
            )

    def append(self, record: RefinementRecord) -> None:
        record.validate()
        with self._lock:
            if record.id in self._records:
                raise RefineError(f"record id {record.id!r} already exists")
            if record.status in ACTIVE_STATUSES:
                for other in self._records.values():
                    if (
                        other.pair_id == record.pair_id
                        and other.stage is record.stage
                        and other.status in ACTIVE_STATUSES
                    ):
                        raise RefineError(
                            f"pair {record.pair_id!r} already has an active "
                            f"{record.stage.value} record ({other.id!r})"
                        )
            self._write(record)
            self._records[record.id] = record
            self._order.setdefault(record.id, len(self._order) + 1)

    def decide(
        self,
        record_id: str,
        action: str,
        final_text: Optional[str] = None,
        reviewer_note: Optional[str] = None,
        expected_status: RecordStatus = RecordStatus.PENDING,
    ) -> RefinementRecord:
        """Atomically apply an accept/edit/reject decision to a PENDING record."""
        if expected_status is not RecordStatus.PENDING:
            raise RefineError("expected_status must be 'pending'")
        if action not in ("accept", "edit", "reject"):
            raise RefineError(f"unknown decision action {action!r}")
        if action == "edit":
            if not (final_text or "").strip():
                raise RefineError("EDIT requires non-empty final_text")
        elif final_text is not None:
            raise RefineError(f"final_text not allowed for action {action!r}")
        with self._lock:
            try:
                record = self._records[record_id]
            except KeyError:
                raise KeyError(record_id) from None
            if record.status is not RecordStatus.PENDING:
                raise DecisionConflict(
                    f"record {record_id!r} is {record.status.value}, not pending"
                )
            if action == "accept":
                updated = replace(
                    record,
                    status=RecordStatus.ACCEPTED,
                    final_text=record.proposed,
                    reviewer_note=reviewer_note,
                )
            elif action == "edit":
                updated = replace(
                    record,
                    status=RecordStatus.EDITED,
                    final_text=final_text,
                    reviewer_note=reviewer_note,
                )
            else:
                updated = replace(
                    record,
                    status=RecordStatus.REJECTED,
                    final_text=None,
                    reviewer_note=reviewer_note,
                )
            updated.validate()
            self._write(updated)
            self._records[record_id] = updated
            return updated

    def progress(self, stage: Optional[Stage] = None) -> dict[str, int]:
        """Review-queue counts at one snapshot; failed records are not part of
        the queue and are excluded."""
        with self._lock:
            records = [
                r for r in self._records.values() if stage is None or r.stage is stage
            ]
        counts = {
            "pending": 0,
            "accepted": 0,
            "edited": 0,
            "rejected": 0,
        }
        for r in records:
            if r.status.value in counts:
                counts[r.status.value] += 1
        counts["total"] = sum(counts.values())
        return counts
