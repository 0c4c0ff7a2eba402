from __future__ import annotations

import itertools
import threading
import time
from pathlib import Path

import pytest

from smarthome_qa.model import Dataset, Provenance, QAPair, Version

FIXTURES = Path(__file__).parent / "fixtures"

# Per-source selected-pair counts from the corpus source table (19 sources).
SELECTED_COUNTS = {
    "avs-forum": 218,
    "smartthings": 500,
    "home-assistant": 481,
    "ezlo": 356,
    "cocoontech": 185,
    "other-forums": 150,
    "digital-home": 64,
    "diynot": 164,
    "whirlpool": 120,
    "google-nest": 110,
    "apple-community": 100,
    "verizon": 145,
    "level1techs": 140,
    "openwrt": 74,
    "diy-home": 96,
    "reddit": 285,
    "snb": 67,
    "toms-guide": 38,
    "stack-exchange": 26,
}


def make_pair(
    n: int = 1,
    source: str = "smartthings",
    version: Version = Version.V1,
    question: str | None = None,
    answer: str | None = None,
    context: str | None = None,
) -> QAPair:
    stem = f"{source}-{n:05d}"
    suffix = {Version.V1: "", Version.V2: "-v2", Version.V3: "-v3", Version.SYNTHETIC: "-syn"}[
        version
    ]
    parent = None
    if version is Version.V2:
        parent = stem
    elif version is Version.V3:
        parent = f"{stem}-v2"
    elif version is Version.SYNTHETIC:
        parent = f"{stem}-v3"
    return QAPair(
        id=stem + suffix,
        source=source,
        question=question or f"how do i secure device {n}?",
        answer=answer if answer is not None else f"change the default password on device {n}",
        version=version,
        parent_id=parent,
        provenance=Provenance.SYNTHETIC if version is Version.SYNTHETIC else Provenance.ORIGINAL,
        context=context,
    )


def make_dataset(n: int = 6, version: Version = Version.V1, **kwargs) -> Dataset:
    return Dataset(version=version, pairs=tuple(make_pair(i + 1, version=version, **kwargs) for i in range(n)))


class FakeChatClient:
    """In-memory chat client implementing the duck type run_stage/predict use.

    ``reply`` maps a prompt to the response text (callable or constant);
    raising inside it simulates endpoint failure. Tracks per-call prompts,
    request params, and the maximum number of concurrently open calls.
    """

    def __init__(self, reply=None, model_name: str = "stub-model", max_concurrency: int = 4,
                 latency_s: float = 0.0):
        self.reply = reply if reply is not None else (lambda prompt: f"echo: {prompt}")
        self.model_name = model_name
        self.max_concurrency = max_concurrency
        self.latency_s = latency_s
        self.calls: list[dict] = []
        self._lock = threading.Lock()
        self._in_flight = 0
        self.max_in_flight = 0

    def complete(self, messages, *, temperature, max_tokens, seed=None) -> str:
        with self._lock:
            self._in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)
            self.calls.append(
                {
                    "prompt": messages[-1]["content"],
                    "temperature": temperature,
                    "max_tokens": max_tokens,
                    "seed": seed,
                }
            )
        try:
            if self.latency_s:
                time.sleep(self.latency_s)
            prompt = messages[-1]["content"]
            return self.reply(prompt) if callable(self.reply) else self.reply
        finally:
            with self._lock:
                self._in_flight -= 1


@pytest.fixture
def fake_client() -> FakeChatClient:
    return FakeChatClient()


_counter = itertools.count(1)


@pytest.fixture
def tmp_jsonl(tmp_path) -> Path:
    return tmp_path / f"file{next(_counter)}.jsonl"
