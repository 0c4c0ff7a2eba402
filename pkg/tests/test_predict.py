from __future__ import annotations

import json

import pytest

from smarthome_qa.errors import EvalError
from smarthome_qa.llm import LlmError
from smarthome_qa.predict import (
    GenerationParams,
    PredictionMode,
    build_prompt,
    generate_predictions,
    load_predictions,
)

from conftest import FakeChatClient, make_dataset, make_pair


class TestBuildPrompt:
    def test_without_context(self):
        pair = make_pair(1)
        prompt = build_prompt(pair, PredictionMode.WITHOUT_CONTEXT)
        assert prompt == f"question: {pair.question}\nanswer:"
        assert "context:" not in prompt

    def test_with_context(self):
        pair = make_pair(1, context="c")
        prompt = build_prompt(pair, PredictionMode.WITH_CONTEXT)
        assert prompt.startswith("context: c\n")
        assert prompt.endswith("\nanswer:")

    def test_missing_context_is_error(self):
        with pytest.raises(EvalError, match="no context"):
            build_prompt(make_pair(1), PredictionMode.WITH_CONTEXT)


class TestGeneratePredictions:
    def test_one_prediction_per_id_with_params(self, tmp_path):
        dataset = make_dataset(6)
        ids = [p.id for p in dataset.pairs][:4]
        client = FakeChatClient(reply="an answer")
        out = tmp_path / "preds.jsonl"
        params = GenerationParams()
        preds = generate_predictions(ids, dataset, client, params, PredictionMode.WITHOUT_CONTEXT, out)
        assert [p.pair_id for p in preds] == ids
        assert all(c["temperature"] == 0.0 and c["seed"] == 0 and c["max_tokens"] == 512
                   for c in client.calls)
        on_disk = load_predictions(out)
        assert {p.pair_id for p in on_disk} == set(ids)
        assert all(p.model_name == "stub-model" for p in on_disk)

    def test_rerun_issues_no_new_requests(self, tmp_path):
        dataset = make_dataset(5)
        ids = [p.id for p in dataset.pairs]
        out = tmp_path / "preds.jsonl"
        client = FakeChatClient(reply="a")
        generate_predictions(ids, dataset, client, GenerationParams(),
                             PredictionMode.WITHOUT_CONTEXT, out)
        first_calls = len(client.calls)
        preds = generate_predictions(ids, dataset, client, GenerationParams(),
                                     PredictionMode.WITHOUT_CONTEXT, out)
        assert len(client.calls) == first_calls
        assert len(preds) == len(ids)
        assert len(load_predictions(out)) == len(ids)

    def test_partial_file_resumes(self, tmp_path):
        dataset = make_dataset(6)
        ids = [p.id for p in dataset.pairs]
        out = tmp_path / "preds.jsonl"
        client = FakeChatClient(reply="a")
        generate_predictions(ids[:2], dataset, client, GenerationParams(),
                             PredictionMode.WITHOUT_CONTEXT, out)
        client.calls.clear()
        generate_predictions(ids, dataset, client, GenerationParams(),
                             PredictionMode.WITHOUT_CONTEXT, out)
        assert len(client.calls) == 4

    def test_unknown_split_id(self, tmp_path):
        dataset = make_dataset(2)
        with pytest.raises(EvalError, match="not in dataset"):
            generate_predictions(["ghost-01"], dataset, FakeChatClient(), GenerationParams(),
                                 PredictionMode.WITHOUT_CONTEXT, tmp_path / "p.jsonl")

    def test_refuses_to_mix_models_in_one_file(self, tmp_path):
        dataset = make_dataset(2)
        ids = [p.id for p in dataset.pairs]
        out = tmp_path / "preds.jsonl"
        generate_predictions(ids, dataset, FakeChatClient(model_name="m1"), GenerationParams(),
                             PredictionMode.WITHOUT_CONTEXT, out)
        with pytest.raises(EvalError, match="refusing to mix"):
            generate_predictions(ids, dataset, FakeChatClient(model_name="m2"),
                                 GenerationParams(), PredictionMode.WITHOUT_CONTEXT, out)

    def test_endpoint_failure_keeps_partial_file(self, tmp_path):
        dataset = make_dataset(4)
        ids = [p.id for p in dataset.pairs]

        def flaky(prompt: str) -> str:
            if "device 3" in prompt:
                raise LlmError("endpoint down")
            return "ok"

        out = tmp_path / "preds.jsonl"
        client = FakeChatClient(reply=flaky, max_concurrency=1)
        with pytest.raises(EvalError, match="partial output kept"):
            generate_predictions(ids, dataset, client, GenerationParams(),
                                 PredictionMode.WITHOUT_CONTEXT, out)
        kept = load_predictions(out)
        assert 0 < len(kept) < len(ids)

    def test_prediction_file_schema(self, tmp_path):
        dataset = make_dataset(1)
        out = tmp_path / "preds.jsonl"
        generate_predictions([dataset.pairs[0].id], dataset, FakeChatClient(reply="x"),
                             GenerationParams(), PredictionMode.WITHOUT_CONTEXT, out)
        row = json.loads(out.read_text().splitlines()[0])
        assert set(row) == {"pair_id", "output", "model_name", "mode"}
