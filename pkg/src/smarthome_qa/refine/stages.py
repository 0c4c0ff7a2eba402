"""Stage runners: propose refinements, apply reviewed decisions, split synthetics.

A stage run creates exactly one PENDING record per input pair and is
idempotent: pairs that already have a live proposal are skipped, so an
interrupted batch resumes where it stopped. Per-pair endpoint failures become
FAILED records (retried on the next run) instead of aborting the batch.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

from ..errors import LlmError, RefineError
from ..model import Dataset, Provenance, QAPair, Version
from ..rng import shuffled
from .records import (
    RecordStatus,
    RecordStore,
    RefinementRecord,
    Stage,
    encode_qa_block,
    parse_qa_block,
    utc_now_iso,
)
from .templates import PromptTemplate

STAGE_PREREQ: dict[Stage, Version] = {
    Stage.REPHRASE: Version.V1,
    Stage.SUMMARIZE: Version.V2,
    Stage.SYNTH_QUESTION: Version.V3,
    Stage.CONTEXT: Version.V3,
}

STAGE_TARGET: dict[Stage, Version] = {
    Stage.REPHRASE: Version.V2,
    Stage.SUMMARIZE: Version.V3,
    Stage.CONTEXT: Version.V3,
    Stage.SYNTH_QUESTION: Version.SYNTHETIC,
}

_VERSION_SUFFIXES = ("-v2", "-v3", "-syn")


def id_stem(pair_id: str) -> str:
    """Pair id without its derivation suffix; v1 ids are their own stem."""
    for suffix in _VERSION_SUFFIXES:
        if pair_id.endswith(suffix):
            return pair_id[: -len(suffix)]
    return pair_id


def _stage_original(pair: QAPair, stage: Stage) -> str:
    if stage is Stage.SUMMARIZE:
        return pair.answer
    return encode_qa_block(pair.question, pair.answer)


def run_stage(
    dataset: Dataset,
    stage: Stage,
    client,
    templates: dict[Stage, PromptTemplate],
    store: RecordStore,
    *,
    temperature: float = 0.0,
    max_tokens: int = 1024,
    now: Callable[[], str] = utc_now_iso,
) -> list[RefinementRecord]:
    """Request one proposal per pair that does not already have a live record.

    ``client`` follows the chat-completion duck type (``complete``,
    ``model_name``, ``max_concurrency``). Records are appended to the store as
    each request finishes, so partial progress survives interruption. Returns
    the records created by this call, in dataset order.
    """
    template = templates.get(stage)
    if template is None:
        raise RefineError(f"no template configured for stage {stage.value}")
    if template.stage is not stage:
        raise RefineError(
            f"template for stage {template.stage.value} passed to {stage.value} run"
        )
    required = STAGE_PREREQ[stage]
    if dataset.version is not required:
        raise RefineError(
            f"stage {stage.value} needs a {required.value} dataset, got {dataset.version.value}"
        )

    skip = store.active_pair_ids(stage)
    todo = [pair for pair in dataset.pairs if pair.id not in skip]
    record_ids = {
        pair.id: f"{pair.id}:{stage.value}:{store.attempt_count(pair.id, stage) + 1}"
        for pair in todo
    }
    created: dict[str, RefinementRecord] = {}

    def run_one(pair: QAPair) -> RefinementRecord:
        prompt = template.render(
            question=pair.question, answer=pair.answer, context=pair.context or ""
        )
        status = RecordStatus.PENDING
        note = None
        try:
            proposed = client.complete(
                [{"role": "user", "content": prompt}],
                temperature=temperature,
                max_tokens=max_tokens,
            )
        except LlmError as exc:
            proposed = ""
            status = RecordStatus.FAILED
            note = f"stage runner: {exc}"
        else:
            if not proposed.strip():
                status = RecordStatus.FAILED
                note = "stage runner: endpoint returned empty output"
        record = RefinementRecord(
            id=record_ids[pair.id],
            pair_id=pair.id,
            stage=stage,
            original=_stage_original(pair, stage),
            proposed=proposed,
            status=status,
            reviewer_note=note,
            model_name=client.model_name,
            created_at=now(),
        )
        store.append(record)
        return record

    if todo:
        with ThreadPoolExecutor(max_workers=client.max_concurrency) as pool:
            for record in pool.map(run_one, todo):
                created[record.pair_id] = record
    return [created[pair.id] for pair in todo]


def _usable_by_pair(records: Sequence[RefinementRecord], stage: Stage) -> dict[str, str]:
    """pair_id -> reviewed text for accepted/edited records; validates the batch."""
    usable: dict[str, str] = {}
    for record in records:
        if record.stage is not stage:
            raise RefineError(
                f"record {record.id!r} is stage {record.stage.value}, expected {stage.value}"
            )
        if record.status is RecordStatus.PENDING:
            raise RefineError(f"record {record.id!r} is still pending review")
        if record.status in (RecordStatus.REJECTED, RecordStatus.FAILED):
            continue
        if record.pair_id in usable:
            raise RefineError(f"multiple usable records for pair {record.pair_id!r}")
        usable[record.pair_id] = record.final_text or ""
    return usable


def apply_decisions(
    dataset: Dataset,
    records: Sequence[RefinementRecord],
    target_version: Version,
) -> Dataset:
    """Fold decided records into the next dataset version.

    REPHRASE replaces question+answer, SUMMARIZE the answer, CONTEXT the
    context (version unchanged); rejected/failed pairs keep their original
    text, so the pair count never changes. SYNTH_QUESTION instead emits a new
    synthetic dataset: one pair per accepted/edited record, answers left empty
    until entered by a reviewer (as a ``Q:``/``A:`` edit).
    """
    if not records:
        raise RefineError("no records to apply")
    stages = {r.stage for r in records}
    if len(stages) > 1:
        raise RefineError(f"records mix stages: {sorted(s.value for s in stages)}")
    stage = next(iter(stages))
    if dataset.version is not STAGE_PREREQ[stage]:
        raise RefineError(
            f"stage {stage.value} applies to {STAGE_PREREQ[stage].value} datasets, "
            f"got {dataset.version.value}"
        )
    if target_version is not STAGE_TARGET[stage]:
        raise RefineError(
            f"stage {stage.value} produces {STAGE_TARGET[stage].value}, "
            f"not {target_version.value}"
        )
    known_ids = {p.id for p in dataset.pairs}
    for record in records:
        if record.pair_id not in known_ids:
            raise RefineError(f"record {record.id!r} references unknown pair {record.pair_id!r}")
    usable = _usable_by_pair(records, stage)

    if stage is Stage.SYNTH_QUESTION:
        pairs = []
        for pair in dataset.pairs:
            text = usable.get(pair.id)
            if text is None:
                continue
            parsed = parse_qa_block(text)
            question, answer = parsed if parsed else (text.strip(), "")
            pairs.append(
                QAPair(
                    id=f"{id_stem(pair.id)}-syn",
                    source=pair.source,
                    question=question,
                    answer=answer,
                    version=Version.SYNTHETIC,
                    parent_id=pair.id,
                    provenance=Provenance.SYNTHETIC,
                )
            )
        return Dataset(version=Version.SYNTHETIC, pairs=tuple(pairs))

    pairs = []
    for pair in dataset.pairs:
        text = usable.get(pair.id)
        if stage is Stage.CONTEXT:
            pairs.append(
                QAPair(
                    id=pair.id,
                    source=pair.source,
                    question=pair.question,
                    answer=pair.answer,
                    version=pair.version,
                    parent_id=pair.parent_id,
                    provenance=pair.provenance,
                    context=text.strip() if text is not None else pair.context,
                )
            )
            continue
        if stage is Stage.REPHRASE:
            if text is not None:
                parsed = parse_qa_block(text)
                if parsed is None:
                    raise RefineError(
                        f"reviewed rephrase for pair {pair.id!r} is not in Q:/A: form"
                    )
                question, answer = parsed
            else:
                question, answer = pair.question, pair.answer
            suffix = "-v2"
        else:  # SUMMARIZE
            question = pair.question
            answer = text.strip() if text is not None else pair.answer
            suffix = "-v3"
        pairs.append(
            QAPair(
                id=f"{id_stem(pair.id)}{suffix}",
                source=pair.source,
                question=question,
                answer=answer,
                version=target_version,
                parent_id=pair.id,
                provenance=Provenance.ORIGINAL,
                context=pair.context,
            )
        )
    return Dataset(version=target_version, pairs=tuple(pairs))


@dataclass(frozen=True)
class SyntheticSplit:
    train_ids: tuple[str, ...]
    val_ids: tuple[str, ...]

    def totals(self) -> dict[str, int]:
        return {
            "train": len(self.train_ids),
            "val": len(self.val_ids),
            "total": len(self.train_ids) + len(self.val_ids),
        }


def synthetic_totals(
    dataset: Dataset, counts: tuple[int, int], seed: int
) -> SyntheticSplit:
    """Seeded train/val allocation of the answered synthetic pairs."""
    if dataset.version is not Version.SYNTHETIC:
        raise RefineError(f"expected a synthetic dataset, got {dataset.version.value}")
    unanswered = [p.id for p in dataset.pairs if not p.answer.strip()]
    if unanswered:
        raise RefineError(
            f"{len(unanswered)} synthetic pairs still lack answers (e.g. {unanswered[0]!r})"
        )
    n_train, n_val = counts
    if n_train < 0 or n_val < 0:
        raise RefineError("synthetic split counts must be non-negative")
    if n_train + n_val > len(dataset.pairs):
        raise RefineError(
            f"synthetic split counts sum to {n_train + n_val} "
            f"but only {len(dataset.pairs)} pairs are available"
        )
    order = shuffled(sorted(p.id for p in dataset.pairs), seed)
    return SyntheticSplit(
        train_ids=tuple(order[:n_train]),
        val_ids=tuple(order[n_train : n_train + n_val]),
    )
