"""Prompt construction and batched answer generation against a chat endpoint.

Prediction files decouple evaluation from training: any model can participate
by producing JSONL ``{pair_id, output, model_name, mode}`` records. Runs are
resumable -- already-predicted pair ids are skipped on rerun.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

from .errors import EvalError
from .model import Dataset, QAPair


class PredictionMode(str, Enum):
    WITH_CONTEXT = "with_context"
    WITHOUT_CONTEXT = "without_context"


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.0
    seed: int = 0
    max_tokens: int = 512


@dataclass(frozen=True)
class Prediction:
    pair_id: str
    output: str
    model_name: str
    mode: PredictionMode

    def to_json_dict(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "output": self.output,
            "model_name": self.model_name,
            "mode": self.mode.value,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Prediction":
        return cls(
            pair_id=str(obj["pair_id"]),
            output=str(obj["output"]),
            model_name=str(obj.get("model_name", "")),
            mode=PredictionMode(obj.get("mode", "without_context")),
        )


def build_prompt(pair: QAPair, mode: PredictionMode) -> str:
    if mode is PredictionMode.WITH_CONTEXT:
        if not pair.context or not pair.context.strip():
            raise EvalError(f"pair {pair.id!r} has no context; cannot build with-context prompt")
        return f"context: {pair.context}\nquestion: {pair.question}\nanswer:"
    return f"question: {pair.question}\nanswer:"


def load_predictions(path: str | Path) -> list[Prediction]:
    path = Path(path)
    out: list[Prediction] = []
    if not path.exists():
        return out
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(Prediction.from_json_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise EvalError(f"{path}:{lineno}: bad prediction line: {exc}") from None
    return out


def generate_predictions(
    split_ids: Sequence[str],
    dataset: Dataset,
    client,
    params: GenerationParams,
    mode: PredictionMode,
    out_path: str | Path,
) -> list[Prediction]:
    """One prediction per split id, appended to ``out_path`` as each completes.

    ``client`` follows the chat-completion duck type (``complete``,
    ``model_name``, ``max_concurrency``). Request parameters are passed through
    verbatim. Ids already present in the output file are not re-requested; a
    failed endpoint aborts the run but keeps the partial file.
    """
    out_path = Path(out_path)
    pairs_by_id = dataset.by_id()
    missing = [pid for pid in split_ids if pid not in pairs_by_id]
    if missing:
        raise EvalError(f"split ids not in dataset: {missing[:5]}")

    existing: dict[str, Prediction] = {}
    for pred in load_predictions(out_path):
        if pred.model_name != client.model_name or pred.mode is not mode:
            raise EvalError(
                f"{out_path} already holds predictions for "
                f"({pred.model_name!r}, {pred.mode.value}); refusing to mix"
            )
        existing[pred.pair_id] = pred

    todo = [pid for pid in split_ids if pid not in existing]
    results: dict[str, Prediction] = dict(existing)
    write_lock = threading.Lock()
    failures: list[str] = []

    def run_one(pair_id: str) -> None:
        pair = pairs_by_id[pair_id]
        prompt = build_prompt(pair, mode)
        output = client.complete(
            [{"role": "user", "content": prompt}],
            temperature=params.temperature,
            max_tokens=params.max_tokens,
            seed=params.seed,
        )
        prediction = Prediction(
            pair_id=pair_id, output=output, model_name=client.model_name, mode=mode
        )
        with write_lock:
            with out_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(prediction.to_json_dict(), ensure_ascii=False))
                fh.write("\n")
            results[pair_id] = prediction

    if todo:
        with ThreadPoolExecutor(max_workers=client.max_concurrency) as pool:
            futures = {pool.submit(run_one, pid): pid for pid in todo}
            for future, pair_id in futures.items():
                try:
                    future.result()
                except Exception as exc:
                    failures.append(f"{pair_id}: {exc}")
    if failures:
        raise EvalError(
            f"{len(failures)} of {len(todo)} predictions failed "
            f"(partial output kept at {out_path}): {failures[0]}"
        )
    return [results[pid] for pid in split_ids]
