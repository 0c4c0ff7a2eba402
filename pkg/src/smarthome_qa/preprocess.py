"""Raw candidate cleanup: text normalization, answer selection, v1.0 assembly."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .model import Dataset, QAPair, Version

_SPACE_RUN = re.compile(r"[ \t]+")


@dataclass(frozen=True)
class QACandidate:
    """A thread reduced to its question text and candidate answers.

    ``thread_id`` is kept so a manual-selection allowlist can be replayed.
    """

    source: str
    question: str
    answers: tuple[str, ...]
    thread_id: Optional[str] = None

    def to_json_dict(self) -> dict:
        return {
            "source": self.source,
            "thread_id": self.thread_id,
            "question": self.question,
            "answers": list(self.answers),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "QACandidate":
        return cls(
            source=str(obj["source"]),
            question=str(obj["question"]),
            answers=tuple(str(a) for a in obj.get("answers", [])),
            thread_id=obj.get("thread_id"),
        )


def normalize_text(text: str) -> str:
    """Lowercase, LF-normalize, collapse space/tab runs, trim. Idempotent."""
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    text = text.lower()
    text = _SPACE_RUN.sub(" ", text)
    return text.strip()


def _answer_rank(answers: tuple[str, ...], index: int) -> tuple[int, int, int]:
    text = answers[index]
    return (len(text.split()), len(text), -index)


def select_answer(candidate: QACandidate) -> Optional[str]:
    """The answer with the most words; ties by more characters, then by
    earlier post position. None when the candidate has no answers."""
    if not candidate.answers:
        return None
    best = max(range(len(candidate.answers)), key=lambda i: _answer_rank(candidate.answers, i))
    return candidate.answers[best]


@dataclass(frozen=True)
class ReductionReport:
    input_candidates: int
    dropped_unselected: int
    dropped_no_answer: int
    dropped_duplicate: int
    output_pairs: int

    def to_json_dict(self) -> dict:
        return {
            "input_candidates": self.input_candidates,
            "dropped_unselected": self.dropped_unselected,
            "dropped_no_answer": self.dropped_no_answer,
            "dropped_duplicate": self.dropped_duplicate,
            "output_pairs": self.output_pairs,
        }


def build_v1(
    candidates: Iterable[QACandidate],
    allowlist: Optional[set[str]] = None,
) -> tuple[Dataset, ReductionReport]:
    """Normalize, pick one answer per question, dedup, assign ids.

    ``allowlist``, when given, keeps only candidates whose thread_id is listed
    (the manual relevance-selection pass). Duplicates are exact matches on the
    normalized question; the first occurrence wins.
    """
    candidates = list(candidates)
    dropped_unselected = 0
    dropped_no_answer = 0
    dropped_duplicate = 0
    seen_questions: set[str] = set()
    per_source_ordinal: dict[str, int] = {}
    pairs: list[QAPair] = []

    for cand in candidates:
        if allowlist is not None and cand.thread_id not in allowlist:
            dropped_unselected += 1
            continue
        raw_answer = select_answer(cand)
        if raw_answer is None:
            dropped_no_answer += 1
            continue
        question = normalize_text(cand.question)
        answer = normalize_text(raw_answer)
        if question in seen_questions:
            dropped_duplicate += 1
            continue
        seen_questions.add(question)
        ordinal = per_source_ordinal.get(cand.source, 0) + 1
        per_source_ordinal[cand.source] = ordinal
        pairs.append(
            QAPair(
                id=f"{cand.source}-{ordinal:05d}",
                source=cand.source,
                question=question,
                answer=answer,
                version=Version.V1,
            )
        )

    report = ReductionReport(
        input_candidates=len(candidates),
        dropped_unselected=dropped_unselected,
        dropped_no_answer=dropped_no_answer,
        dropped_duplicate=dropped_duplicate,
        output_pairs=len(pairs),
    )
    return Dataset(version=Version.V1, pairs=tuple(pairs)), report


def save_candidates(candidates: Iterable[QACandidate], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for cand in candidates:
            fh.write(json.dumps(cand.to_json_dict(), ensure_ascii=False))
            fh.write("\n")


def load_candidates(path: str | Path) -> list[QACandidate]:
    out: list[QACandidate] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(QACandidate.from_json_dict(json.loads(line)))
    return out
