#!/usr/bin/env python3
"""Seed a work directory for the UI round-trip test.

Writes v1.jsonl (10 pairs), and store.jsonl holding one PENDING rephrase
record per pair plus two PENDING summarize records used by the conflict test.

Usage: python3 seed_review_store.py WORKDIR
"""

import sys
from pathlib import Path

from smarthome_qa.model import Dataset, QAPair, Version, save_dataset
from smarthome_qa.refine import RecordStatus, RecordStore, RefinementRecord, Stage, encode_qa_block


def main(workdir: str) -> None:
    out = Path(workdir)
    out.mkdir(parents=True, exist_ok=True)
    pairs = tuple(
        QAPair(
            id=f"smartthings-{i:05d}",
            source="smartthings",
            question=f"raw question {i} about camera access?",
            answer=f"raw answer {i}: change the default credentials",
            version=Version.V1,
        )
        for i in range(1, 11)
    )
    save_dataset(Dataset(version=Version.V1, pairs=pairs), out / "v1.jsonl")

    store = RecordStore(out / "store.jsonl")
    for i, pair in enumerate(pairs, start=1):
        store.append(
            RefinementRecord(
                id=f"{pair.id}:rephrase:1",
                pair_id=pair.id,
                stage=Stage.REPHRASE,
                original=encode_qa_block(pair.question, pair.answer),
                proposed=encode_qa_block(
                    f"clear question {i} about camera access?",
                    f"clear answer {i}: rotate the default credentials",
                ),
                status=RecordStatus.PENDING,
                model_name="stub",
                created_at=f"2024-01-01T00:00:{i:02d}+00:00",
            )
        )
    for i in (1, 2):
        store.append(
            RefinementRecord(
                id=f"smartthings-{i:05d}:summarize:1",
                pair_id=f"smartthings-{i:05d}",
                stage=Stage.SUMMARIZE,
                original=pairs[i - 1].answer,
                proposed=f"short answer {i}",
                status=RecordStatus.PENDING,
                model_name="stub",
                created_at=f"2024-01-01T01:00:{i:02d}+00:00",
            )
        )
    print(str(out))


if __name__ == "__main__":
    main(sys.argv[1])
