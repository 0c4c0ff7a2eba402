"""Per-example scoring, aggregate evaluation reports, model comparison tables."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import EvalError
from .metrics import TokenEmbedder, rouge_l, semantic_f1, token_f1
from .model import Dataset
from .predict import Prediction, PredictionMode

METRIC_NAMES = ("f1", "rouge_l", "semantic_f1")


@dataclass(frozen=True)
class ScoreTriple:
    f1: float
    rouge_l: float
    semantic_f1: float

    def as_dict(self) -> dict[str, float]:
        return {"f1": self.f1, "rouge_l": self.rouge_l, "semantic_f1": self.semantic_f1}


@dataclass(frozen=True)
class EvalReport:
    model_name: str
    mode: PredictionMode
    per_example: tuple[tuple[str, ScoreTriple], ...]
    means: ScoreTriple

    def distribution(self) -> dict[str, list[float]]:
        """Per-metric score vectors, in pair-id order, for plotting."""
        return {
            name: [getattr(triple, name) for _, triple in self.per_example]
            for name in METRIC_NAMES
        }

    def to_json_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "mode": self.mode.value,
            "means": self.means.as_dict(),
            "per_example": [
                {"pair_id": pid, **triple.as_dict()} for pid, triple in self.per_example
            ],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "EvalReport":
        per_example = tuple(
            (
                str(row["pair_id"]),
                ScoreTriple(
                    f1=float(row["f1"]),
                    rouge_l=float(row["rouge_l"]),
                    semantic_f1=float(row["semantic_f1"]),
                ),
            )
            for row in obj["per_example"]
        )
        means = obj["means"]
        return cls(
            model_name=str(obj["model_name"]),
            mode=PredictionMode(obj["mode"]),
            per_example=per_example,
            means=ScoreTriple(
                f1=float(means["f1"]),
                rouge_l=float(means["rouge_l"]),
                semantic_f1=float(means["semantic_f1"]),
            ),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    def write_distribution_csv(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("pair_id",) + METRIC_NAMES)
            for pid, triple in self.per_example:
                writer.writerow([pid, triple.f1, triple.rouge_l, triple.semantic_f1])


def load_report(path: str | Path) -> EvalReport:
    try:
        return EvalReport.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise EvalError(f"cannot read report {path}: {exc}") from None


def evaluate_predictions(
    predictions: Sequence[Prediction],
    dataset: Dataset,
    embedder: TokenEmbedder,
) -> EvalReport:
    """Score every prediction against its gold answer; aggregate in pair-id order."""
    if not predictions:
        raise EvalError("no predictions to evaluate")
    model_names = {p.model_name for p in predictions}
    modes = {p.mode for p in predictions}
    if len(model_names) > 1 or len(modes) > 1:
        raise EvalError(
            f"predictions mix models/modes: {sorted(model_names)} / {sorted(m.value for m in modes)}"
        )
    pairs_by_id = dataset.by_id()
    by_pair: dict[str, Prediction] = {}
    for pred in predictions:
        if pred.pair_id not in pairs_by_id:
            raise EvalError(f"prediction references unknown pair id {pred.pair_id!r}")
        if pred.pair_id in by_pair:
            raise EvalError(f"duplicate prediction for pair id {pred.pair_id!r}")
        by_pair[pred.pair_id] = pred

    per_example: list[tuple[str, ScoreTriple]] = []
    sums = [0.0, 0.0, 0.0]
    for pair_id in sorted(by_pair):
        pred = by_pair[pair_id]
        gold = pairs_by_id[pair_id].answer
        triple = ScoreTriple(
            f1=token_f1(pred.output, gold).f1,
            rouge_l=rouge_l(pred.output, gold).f1,
            semantic_f1=semantic_f1(pred.output, gold, embedder).f1,
        )
        per_example.append((pair_id, triple))
        sums[0] += triple.f1
        sums[1] += triple.rouge_l
        sums[2] += triple.semantic_f1
    n = len(per_example)
    means = ScoreTriple(f1=sums[0] / n, rouge_l=sums[1] / n, semantic_f1=sums[2] / n)
    return EvalReport(
        model_name=next(iter(model_names)),
        mode=next(iter(modes)),
        per_example=tuple(per_example),
        means=means,
    )


@dataclass(frozen=True)
class ComparisonTable:
    """Metric-by-model matrix of mean scores."""

    columns: tuple[str, ...]
    rows: tuple[str, ...]
    cells: dict[str, dict[str, float]]  # metric -> column -> value
    best: dict[str, str]  # metric -> column with the highest value

    def to_csv_text(self) -> str:
        lines = ["metric," + ",".join(self.columns)]
        for metric in self.rows:
            cells = [f"{self.cells[metric][col]:.4f}" for col in self.columns]
            lines.append(metric + "," + ",".join(cells))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        """Aligned table; the best model per metric is starred."""
        widths = [max(len("metric"), *(len(m) for m in self.rows))]
        for col in self.columns:
            widths.append(max(len(col), 7))
        header = ["metric".ljust(widths[0])]
        header += [col.rjust(w) for col, w in zip(self.columns, widths[1:])]
        lines = ["  ".join(header)]
        for metric in self.rows:
            row = [metric.ljust(widths[0])]
            for col, w in zip(self.columns, widths[1:]):
                mark = "*" if self.best[metric] == col else ""
                row.append(f"{self.cells[metric][col]:.4f}{mark}".rjust(w))
            lines.append("  ".join(row))
        return "\n".join(lines) + "\n"


def compare_models(reports: Sequence[EvalReport]) -> ComparisonTable:
    if not reports:
        raise EvalError("no reports to compare")
    seen: set[tuple[str, PredictionMode]] = set()
    for r in reports:
        key = (r.model_name, r.mode)
        if key in seen:
            raise EvalError(f"duplicate report for model {r.model_name!r} mode {r.mode.value}")
        seen.add(key)
    single_mode = len({r.mode for r in reports}) == 1
    columns = tuple(
        r.model_name if single_mode else f"{r.model_name} [{r.mode.value}]" for r in reports
    )
    cells: dict[str, dict[str, float]] = {m: {} for m in METRIC_NAMES}
    for col, r in zip(columns, reports):
        for metric in METRIC_NAMES:
            cells[metric][col] = getattr(r.means, metric)
    best = {m: max(columns, key=lambda c: cells[m][c]) for m in METRIC_NAMES}
    return ComparisonTable(columns=columns, rows=METRIC_NAMES, cells=cells, best=best)


def relative_improvement(base: float, improved: float) -> float:
    """Percent change from base to improved: 100 * (improved - base) / base."""
    if base <= 0:
        raise EvalError(f"relative improvement needs a positive base, got {base}")
    return 100.0 * (improved - base) / base
