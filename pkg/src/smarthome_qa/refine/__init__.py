"""LLM-assisted refinement: proposal records, prompt templates, stage runners."""

from .records import (
    DecisionConflict,
    RecordStatus,
    RecordStore,
    RefinementRecord,
    Stage,
    encode_qa_block,
    parse_qa_block,
)
from .stages import SyntheticSplit, apply_decisions, run_stage, synthetic_totals
from .templates import PromptTemplate, default_templates, load_templates

__all__ = [
    "DecisionConflict",
    "RecordStatus",
    "RecordStore",
    "RefinementRecord",
    "Stage",
    "encode_qa_block",
    "parse_qa_block",
    "SyntheticSplit",
    "apply_decisions",
    "run_stage",
    "synthetic_totals",
    "PromptTemplate",
    "default_templates",
    "load_templates",
]
