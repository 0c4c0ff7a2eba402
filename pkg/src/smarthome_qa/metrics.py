"""Answer-overlap metrics: token F1, ROUGE-L, and embedding-based semantic F1.

All three share one normalization (lowercase, strip punctuation, drop English
articles, whitespace split -- the SQuAD convention) so scores stay comparable.
Empty-side conventions are uniform: both sides empty scores 1.0, exactly one
empty scores 0.0.
"""

from __future__ import annotations

import re
import string
from collections import Counter
from typing import NamedTuple, Protocol, Sequence

import numpy as np

from .errors import EvalError

_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNCT = set(string.punctuation)


def normalize_answer(text: str) -> list[str]:
    """Lowercase, remove punctuation, drop articles, split on whitespace."""
    text = text.lower()
    text = "".join(ch for ch in text if ch not in _PUNCT)
    text = _ARTICLES.sub(" ", text)
    return text.split()


class PRF(NamedTuple):
    precision: float
    recall: float
    f1: float


_PERFECT = PRF(1.0, 1.0, 1.0)
_ZERO = PRF(0.0, 0.0, 0.0)


def _empty_convention(n_pred: int, n_gold: int) -> PRF | None:
    if n_pred == 0 and n_gold == 0:
        return _PERFECT
    if n_pred == 0 or n_gold == 0:
        return _ZERO
    return None


def token_f1(pred: str, gold: str) -> PRF:
    """Bag-of-tokens overlap: precision n/|pred|, recall n/|gold|, f1 2n/(|pred|+|gold|)."""
    pred_tokens = normalize_answer(pred)
    gold_tokens = normalize_answer(gold)
    short = _empty_convention(len(pred_tokens), len(gold_tokens))
    if short is not None:
        return short
    overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    if overlap == 0:
        return _ZERO
    return PRF(
        precision=overlap / len(pred_tokens),
        recall=overlap / len(gold_tokens),
        f1=2 * overlap / (len(pred_tokens) + len(gold_tokens)),
    )


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest-common-subsequence length via the two-row DP."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(pred: str, gold: str) -> PRF:
    """LCS-based F-measure over normalized token sequences (beta = 1)."""
    pred_tokens = normalize_answer(pred)
    gold_tokens = normalize_answer(gold)
    short = _empty_convention(len(pred_tokens), len(gold_tokens))
    if short is not None:
        return short
    lcs = lcs_length(pred_tokens, gold_tokens)
    if lcs == 0:
        return _ZERO
    precision = lcs / len(pred_tokens)
    recall = lcs / len(gold_tokens)
    return PRF(precision, recall, 2 * precision * recall / (precision + recall))


class TokenEmbedder(Protocol):
    """Turns texts into one unit-normalized vector per token.

    ``embed`` takes the pred/gold texts of one comparison together so
    implementations can guarantee a shared vector space per call.
    """

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]: ...


def semantic_f1(pred: str, gold: str, embedder: TokenEmbedder) -> PRF:
    """Greedy max-cosine token matching (BERTScore-style, no idf, no rescaling)."""
    pred_vecs, gold_vecs = embedder.embed([pred, gold])
    short = _empty_convention(len(pred_vecs), len(gold_vecs))
    if short is not None:
        return short
    sim = pred_vecs @ gold_vecs.T
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    if precision + recall == 0:
        return _ZERO
    return PRF(precision, recall, 2 * precision * recall / (precision + recall))


class OneHotEmbedder:
    """Deterministic test embedder: each distinct normalized token gets its own
    one-hot axis, making cosine similarity an exact-match indicator."""

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        tokenized = [normalize_answer(t) for t in texts]
        vocabulary: dict[str, int] = {}
        for tokens in tokenized:
            for tok in tokens:
                vocabulary.setdefault(tok, len(vocabulary))
        dim = max(len(vocabulary), 1)
        out = []
        for tokens in tokenized:
            mat = np.zeros((len(tokens), dim))
            for i, tok in enumerate(tokens):
                mat[i, vocabulary[tok]] = 1.0
            out.append(mat)
        return out


class HttpEmbedder:
    """Client for a remote embedding endpoint.

    Wire contract: POST {base_url}/embeddings with {"model": ..., "input":
    [token, ...]} returning {"data": [{"embedding": [...]}, ...]} in input
    order. Vectors are re-normalized to unit length here.
    """

    def __init__(self, base_url: str, model_name: str, timeout_s: float = 60.0, transport=None):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.model_name = model_name
        self._client = httpx.Client(timeout=timeout_s, transport=transport)

    def close(self) -> None:
        self._client.close()

    def _embed_tokens(self, tokens: list[str]) -> np.ndarray:
        if not tokens:
            return np.zeros((0, 1))
        resp = self._client.post(
            f"{self.base_url}/embeddings",
            json={"model": self.model_name, "input": tokens},
        )
        if resp.status_code != 200:
            raise EvalError(f"embedding endpoint returned HTTP {resp.status_code}")
        try:
            vectors = [row["embedding"] for row in resp.json()["data"]]
        except (KeyError, TypeError) as exc:
            raise EvalError(f"malformed embedding response: {exc}") from None
        if len(vectors) != len(tokens):
            raise EvalError(
                f"embedding endpoint returned {len(vectors)} vectors for {len(tokens)} tokens"
            )
        mat = np.asarray(vectors, dtype=float)
        norms = np.linalg.norm(mat, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        return mat / norms

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        mats = [self._embed_tokens(normalize_answer(t)) for t in texts]
        dim = max((m.shape[1] for m in mats if m.shape[0]), default=1)
        return [m if m.shape[0] else np.zeros((0, dim)) for m in mats]
