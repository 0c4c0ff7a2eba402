"""LDA topic extraction: bag-of-words construction, collapsed Gibbs sampling,
per-source segmentation, keyword reports, and UMass coherence.

The sampler resamples every token's topic from the standard collapsed
conditional p(z=k) proportional to (n_dk + alpha) * (n_kw + beta) / (n_k + V*beta),
then estimates phi and theta from the final counts with the smoothed
estimators. The inner sweep is JIT-compiled; the random stream is the same
splitmix64 sequence used elsewhere, so runs are reproducible bit-for-bit for a
fixed seed.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from numba import njit

from .errors import TopicModelError
from .model import Dataset, QAPair
from .rng import SplitMix64

_TOKEN = re.compile(r"[a-z0-9]+")

_U_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_U_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_U_MIX2 = np.uint64(0x94D049BB133111EB)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)
_F53 = 2.0**-53


@njit(cache=True)
def _splitmix_next(state):
    state = state + _U_GAMMA
    z = state
    z = (z ^ (z >> _U30)) * _U_MIX1
    z = (z ^ (z >> _U27)) * _U_MIX2
    z = z ^ (z >> _U31)
    return state, z


# The generator state travels in a 1-element uint64 array: returning it as a
# scalar would unbox to a Python int and retype the next call's arithmetic.


@njit(cache=True)
def _splitmix_fill(state_box, out):
    # Test hook: lets the suite verify the JIT stream matches rng.SplitMix64.
    state = state_box[0]
    for i in range(out.shape[0]):
        state, v = _splitmix_next(state)
        out[i] = v
    state_box[0] = state


@njit(cache=True)
def _gibbs_sweep(doc_of, word_of, z, n_dk, n_kw, n_k, alpha, beta, state_box, probs):
    n_topics = n_kw.shape[0]
    vbeta = n_kw.shape[1] * beta
    state = state_box[0]
    for i in range(z.shape[0]):
        d = doc_of[i]
        w = word_of[i]
        k = z[i]
        n_dk[d, k] -= 1
        n_kw[k, w] -= 1
        n_k[k] -= 1
        total = 0.0
        for kk in range(n_topics):
            total += (n_dk[d, kk] + alpha) * (n_kw[kk, w] + beta) / (n_k[kk] + vbeta)
            probs[kk] = total
        state, rv = _splitmix_next(state)
        u = (rv >> _U11) * _F53 * total
        knew = 0
        while knew < n_topics - 1 and probs[knew] <= u:
            knew += 1
        z[i] = knew
        n_dk[d, knew] += 1
        n_kw[knew, w] += 1
        n_k[knew] += 1
    state_box[0] = state


@dataclass(frozen=True)
class BowCorpus:
    vocabulary: tuple[str, ...]
    docs: tuple[tuple[str, tuple[int, ...]], ...]
    stopwords_applied: tuple[str, ...]
    min_df: int
    dropped_doc_ids: tuple[str, ...] = ()

    @property
    def n_tokens(self) -> int:
        return sum(len(tokens) for _, tokens in self.docs)


@dataclass(frozen=True, eq=False)
class TopicModel:
    k: int
    alpha: float
    beta: float
    phi: np.ndarray  # K x V topic-word distribution
    theta: np.ndarray  # D x K doc-topic distribution
    assignments: np.ndarray  # per-token topic ids, docs concatenated in corpus order
    seed: int
    iterations: int
    vocabulary: tuple[str, ...]


@dataclass(frozen=True)
class TopicEntry:
    topic_id: int
    keywords: tuple[str, ...]
    label: Optional[str] = None


@dataclass(frozen=True)
class TopicReport:
    segment: str
    topics: tuple[TopicEntry, ...]

    def to_json_dict(self) -> dict:
        return {
            "segment": self.segment,
            "topics": [
                {"topic_id": t.topic_id, "label": t.label, "keywords": list(t.keywords)}
                for t in self.topics
            ],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )


@dataclass(frozen=True)
class Segment:
    name: str
    pairs: tuple[QAPair, ...]


def load_stopwords(path: str | Path | None = None) -> tuple[str, ...]:
    if path is None:
        text = resources.files("smarthome_qa.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return tuple(
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.strip().startswith("#")
    )


def tokenize_corpus(
    pairs: Sequence[QAPair], stopwords: Sequence[str], min_df: int = 1
) -> BowCorpus:
    """Bag-of-words over question+answer texts.

    Tokens are lowercase alphanumeric runs of length >= 3, minus stopwords and
    terms occurring in fewer than ``min_df`` documents. Documents left empty
    are dropped (their ids are recorded on the corpus).
    """
    if not pairs:
        raise TopicModelError("no pairs to tokenize")
    if min_df < 1:
        raise TopicModelError("min_df must be >= 1")
    stopset = {s.lower() for s in stopwords}
    raw_docs: list[tuple[str, list[str]]] = []
    doc_freq: dict[str, int] = {}
    for pair in pairs:
        text = f"{pair.question} {pair.answer}".lower()
        tokens = [t for t in _TOKEN.findall(text) if len(t) >= 3 and t not in stopset]
        raw_docs.append((pair.id, tokens))
        for term in set(tokens):
            doc_freq[term] = doc_freq.get(term, 0) + 1
    vocabulary = tuple(sorted(t for t, df in doc_freq.items() if df >= min_df))
    index = {t: i for i, t in enumerate(vocabulary)}
    docs: list[tuple[str, tuple[int, ...]]] = []
    dropped: list[str] = []
    for doc_id, tokens in raw_docs:
        kept = tuple(index[t] for t in tokens if t in index)
        if kept:
            docs.append((doc_id, kept))
        else:
            dropped.append(doc_id)
    if not docs:
        raise TopicModelError("every document is empty after filtering")
    return BowCorpus(
        vocabulary=vocabulary,
        docs=tuple(docs),
        stopwords_applied=tuple(stopwords),
        min_df=min_df,
        dropped_doc_ids=tuple(dropped),
    )


IterationHook = Callable[[int, np.ndarray, np.ndarray, np.ndarray, np.ndarray], None]


def fit_lda(
    corpus: BowCorpus,
    k: int,
    alpha: float,
    beta: float,
    iterations: int,
    seed: int,
    iteration_hook: Optional[IterationHook] = None,
) -> TopicModel:
    """Collapsed Gibbs sampling; point estimates from the final iteration.

    ``iteration_hook(iteration, n_dk, n_kw, n_k, assignments)`` receives count
    snapshots after each full sweep (copies; mutating them is safe).
    """
    if k < 1:
        raise TopicModelError("k must be >= 1")
    if iterations < 1:
        raise TopicModelError("iterations must be >= 1")
    if alpha <= 0 or beta <= 0:
        raise TopicModelError("alpha and beta must be positive")
    n_tokens = corpus.n_tokens
    if n_tokens == 0:
        raise TopicModelError("corpus has no tokens")
    if k > n_tokens:
        raise TopicModelError(f"k={k} exceeds total token count {n_tokens}")

    n_docs = len(corpus.docs)
    vocab_size = len(corpus.vocabulary)
    doc_of = np.empty(n_tokens, dtype=np.int32)
    word_of = np.empty(n_tokens, dtype=np.int32)
    pos = 0
    for d, (_, tokens) in enumerate(corpus.docs):
        for w in tokens:
            doc_of[pos] = d
            word_of[pos] = w
            pos += 1

    rng = SplitMix64(seed)
    z = np.fromiter((rng.next_below(k) for _ in range(n_tokens)), dtype=np.int32, count=n_tokens)

    n_dk = np.zeros((n_docs, k), dtype=np.int64)
    n_kw = np.zeros((k, vocab_size), dtype=np.int64)
    np.add.at(n_dk, (doc_of, z), 1)
    np.add.at(n_kw, (z, word_of), 1)
    n_k = np.bincount(z, minlength=k).astype(np.int64)
    n_d = np.bincount(doc_of, minlength=n_docs).astype(np.int64)

    state_box = np.array([rng.state], dtype=np.uint64)
    probs = np.empty(k, dtype=np.float64)
    for it in range(iterations):
        _gibbs_sweep(
            doc_of, word_of, z, n_dk, n_kw, n_k, float(alpha), float(beta), state_box, probs
        )
        if iteration_hook is not None:
            iteration_hook(it, n_dk.copy(), n_kw.copy(), n_k.copy(), z.copy())

    phi = (n_kw + beta) / (n_k[:, None] + vocab_size * beta)
    theta = (n_dk + alpha) / (n_d[:, None] + k * alpha)
    return TopicModel(
        k=k,
        alpha=float(alpha),
        beta=float(beta),
        phi=phi,
        theta=theta,
        assignments=z,
        seed=seed,
        iterations=iterations,
        vocabulary=corpus.vocabulary,
    )


RESIDUAL_SEGMENT = "combined-small"


def segment_dataset(dataset: Dataset, top_n: int = 12) -> list[Segment]:
    """One segment per top-``top_n`` source by pair count (ties by name), plus
    a residual segment pooling every remaining source."""
    counts: dict[str, int] = {}
    for pair in dataset.pairs:
        counts[pair.source] = counts.get(pair.source, 0) + 1
    if len(counts) < top_n:
        raise TopicModelError(
            f"dataset has {len(counts)} distinct sources; need at least {top_n}"
        )
    ranked = sorted(counts, key=lambda s: (-counts[s], s))
    top_sources = ranked[:top_n]
    top_set = set(top_sources)
    segments = [
        Segment(name=src, pairs=tuple(p for p in dataset.pairs if p.source == src))
        for src in top_sources
    ]
    residual = tuple(p for p in dataset.pairs if p.source not in top_set)
    segments.append(Segment(name=RESIDUAL_SEGMENT, pairs=residual))
    return segments


def top_keywords(model: TopicModel, k: int, segment: str = "all") -> TopicReport:
    """Per topic, the ``k`` highest-weight terms, descending; ties break on the
    term string so reports are stable."""
    vocab_size = len(model.vocabulary)
    if k > vocab_size:
        raise TopicModelError(f"asked for {k} keywords but vocabulary has {vocab_size} terms")
    entries = []
    for topic in range(model.k):
        weights = model.phi[topic]
        order = sorted(range(vocab_size), key=lambda t: (-weights[t], model.vocabulary[t]))
        entries.append(
            TopicEntry(topic_id=topic, keywords=tuple(model.vocabulary[t] for t in order[:k]))
        )
    return TopicReport(segment=segment, topics=tuple(entries))


def umass_coherence(model: TopicModel, corpus: BowCorpus, k: int) -> list[float]:
    """Standard UMass coherence over each topic's top-``k`` words:
    sum over ordered pairs of log((D(w_i, w_j) + 1) / D(w_j))."""
    if k < 2:
        raise TopicModelError("coherence needs k >= 2")
    report = top_keywords(model, k)
    term_index = {t: i for i, t in enumerate(model.vocabulary)}
    doc_sets = [set(tokens) for _, tokens in corpus.docs]
    scores: list[float] = []
    for entry in report.topics:
        ids = [term_index[w] for w in entry.keywords]
        score = 0.0
        for i in range(1, len(ids)):
            for j in range(i):
                co = sum(1 for ds in doc_sets if ids[i] in ds and ids[j] in ds)
                dj = sum(1 for ds in doc_sets if ids[j] in ds)
                score += math.log((co + 1) / dj)
        scores.append(score)
    return scores


def write_topics_csv(reports: Sequence[TopicReport], path: str | Path) -> None:
    """Table-shaped CSV: one row per (segment, topic) with its keyword list."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["segment", "topic_id", "label", "keywords"])
        for report in reports:
            for entry in report.topics:
                writer.writerow(
                    [report.segment, entry.topic_id, entry.label or "", ", ".join(entry.keywords)]
                )
