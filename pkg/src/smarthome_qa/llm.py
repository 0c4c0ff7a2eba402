"""Chat-completion client: provider-agnostic wire contract, bounded retries.

Request: POST {base_url}/chat/completions with {model, messages, temperature,
max_tokens[, seed]}. Response: the first choice's message content. Anything
OpenAI-compatible (or a local stub) plugs in; the API key, when needed, is
read from the environment variable named in the config.
"""

from __future__ import annotations

import os
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import httpx

from .errors import ConfigError, LlmError

RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 4
    backoff_base_ms: int = 250

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ConfigError("retry max_attempts must be >= 1")
        if self.backoff_base_ms < 0:
            raise ConfigError("backoff_base_ms must be >= 0")


@dataclass(frozen=True)
class LlmClientConfig:
    base_url: str
    model_name: str
    api_key_ref: Optional[str] = None
    max_concurrency: int = 4
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    request_timeout_ms: int = 60_000

    def __post_init__(self) -> None:
        if self.max_concurrency < 1:
            raise ConfigError("max_concurrency must be >= 1")
        if self.request_timeout_ms <= 0:
            raise ConfigError("request_timeout_ms must be positive")


class ChatCompletionClient:
    """HTTP chat-completion client with exponential backoff and jitter.

    Retries transport errors and retryable HTTP statuses (429/5xx) up to the
    configured attempt budget; other statuses and malformed responses fail
    immediately.
    """

    def __init__(
        self,
        config: LlmClientConfig,
        transport: Optional[httpx.BaseTransport] = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.config = config
        self._sleep = sleep
        self._jitter = random.Random()
        headers = {}
        if config.api_key_ref:
            key = os.environ.get(config.api_key_ref)
            if not key:
                raise ConfigError(
                    f"API key environment variable {config.api_key_ref!r} is not set"
                )
            headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(
            timeout=config.request_timeout_ms / 1000.0,
            headers=headers,
            transport=transport,
        )

    @property
    def model_name(self) -> str:
        return self.config.model_name

    @property
    def max_concurrency(self) -> int:
        return self.config.max_concurrency

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ChatCompletionClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _backoff(self, attempt: int) -> None:
        base = self.config.retry.backoff_base_ms / 1000.0
        delay = base * (2 ** (attempt - 1)) * (0.5 + self._jitter.random())
        if delay > 0:
            self._sleep(delay)

    def complete(
        self,
        messages: list[dict],
        *,
        temperature: float,
        max_tokens: int,
        seed: Optional[int] = None,
    ) -> str:
        payload: dict = {
            "model": self.config.model_name,
            "messages": messages,
            "temperature": temperature,
            "max_tokens": max_tokens,
        }
        if seed is not None:
            payload["seed"] = seed
        url = f"{self.config.base_url.rstrip('/')}/chat/completions"
        last_error = "no attempt made"
        for attempt in range(1, self.config.retry.max_attempts + 1):
            try:
                resp = self._client.post(url, json=payload)
            except httpx.HTTPError as exc:
                last_error = f"transport error: {exc}"
            else:
                if resp.status_code == 200:
                    try:
                        return str(resp.json()["choices"][0]["message"]["content"])
                    except (KeyError, IndexError, TypeError, ValueError) as exc:
                        raise LlmError(f"malformed completion response: {exc}") from None
                if resp.status_code not in RETRYABLE_STATUS:
                    raise LlmError(f"endpoint returned HTTP {resp.status_code}: {resp.text[:200]}")
                last_error = f"HTTP {resp.status_code}"
            if attempt < self.config.retry.max_attempts:
                self._backoff(attempt)
        raise LlmError(
            f"gave up after {self.config.retry.max_attempts} attempts ({last_error})"
        )
