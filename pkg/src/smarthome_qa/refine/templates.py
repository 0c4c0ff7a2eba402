"""Prompt templates per refinement stage.

Templates are configuration, not code: the packaged defaults live in
``data/default_templates.json`` and any stage can be overridden from a user
file. Placeholders are ``{question}``, ``{answer}``, ``{context}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..errors import RefineError
from .records import Stage

REQUIRED_PLACEHOLDERS: dict[Stage, tuple[str, ...]] = {
    Stage.REPHRASE: ("question", "answer"),
    Stage.SUMMARIZE: ("answer",),
    Stage.SYNTH_QUESTION: ("question", "answer"),
    Stage.CONTEXT: ("question", "answer"),
}


@dataclass(frozen=True)
class PromptTemplate:
    stage: Stage
    template: str

    def __post_init__(self) -> None:
        for name in REQUIRED_PLACEHOLDERS[self.stage]:
            if "{" + name + "}" not in self.template:
                raise RefineError(
                    f"{self.stage.value} template is missing the {{{name}}} placeholder"
                )

    def render(self, question: str, answer: str, context: str = "") -> str:
        return self.template.format(question=question, answer=answer, context=context)


def _templates_from_obj(obj: dict) -> dict[Stage, PromptTemplate]:
    out: dict[Stage, PromptTemplate] = {}
    for key, text in obj.items():
        try:
            stage = Stage(key)
        except ValueError:
            raise RefineError(f"unknown stage {key!r} in template file") from None
        out[stage] = PromptTemplate(stage=stage, template=str(text))
    return out


def default_templates() -> dict[Stage, PromptTemplate]:
    text = resources.files("smarthome_qa.data").joinpath("default_templates.json").read_text(
        "utf-8"
    )
    return _templates_from_obj(json.loads(text))


def load_templates(path: str | Path) -> dict[Stage, PromptTemplate]:
    """Defaults overlaid with the stages present in the user file."""
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise RefineError(f"cannot read template file {path}: {exc}") from None
    merged = default_templates()
    merged.update(_templates_from_obj(obj))
    return merged
