"""C_v topic coherence: boolean sliding windows, NPMI word vectors,
indirect cosine over a one-set segmentation.

For each topic's top-N words, every word gets a context vector of NPMI
values against all N words (computed from window co-occurrence counts);
the topic's coherence is the mean cosine similarity between each word's
vector and the sum of all N vectors. Model coherence is the mean over
topics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .lda.model import TopicModel

MODEL_CORPUS = "model_corpus"
EXTERNAL_CORPUS = "external_corpus"


@dataclass(frozen=True)
class CoherenceConfig:
    top_n: int = 10
    window: int = 110
    npmi_epsilon: float = 1e-12
    reference: str = MODEL_CORPUS

    def __post_init__(self) -> None:
        if self.top_n < 2:
            raise ValueError("top_n must be >= 2")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.npmi_epsilon <= 0:
            raise ValueError("npmi_epsilon must be positive")
        if self.reference not in (MODEL_CORPUS, EXTERNAL_CORPUS):
            raise ValueError(f"unknown reference mode {self.reference!r}")


@dataclass
class CooccurrenceTable:
    """Boolean window occurrence counts for words and word pairs."""

    total_windows: int = 0
    word_counts: dict[str, int] = field(default_factory=dict)
    pair_counts: dict[tuple[str, str], int] = field(default_factory=dict)

    def count(self, word: str) -> int:
        return self.word_counts.get(word, 0)

    def pair_count(self, w1: str, w2: str) -> int:
        if w1 == w2:
            return self.count(w1)
        key = (w1, w2) if w1 < w2 else (w2, w1)
        return self.pair_counts.get(key, 0)


def build_windows(
    docs: Iterable[Sequence[str]],
    window: int,
    restrict_to: set[str] | None = None,
) -> CooccurrenceTable:
    """Count boolean occurrences over all sliding windows (step 1).

    Documents shorter than the window width contribute a single window
    containing the whole document; empty documents contribute none. When
    ``restrict_to`` is given, only those words are counted (the totals are
    unaffected).
    """
    table = CooccurrenceTable()
    for tokens in docs:
        n = len(tokens)
        if n == 0:
            continue
        if n <= window:
            spans = [(0, n)]
        else:
            spans = [(i, i + window) for i in range(n - window + 1)]
        for start, end in spans:
            table.total_windows += 1
            present = set(tokens[start:end])
            if restrict_to is not None:
                present &= restrict_to
            for w in present:
                table.word_counts[w] = table.word_counts.get(w, 0) + 1
            ordered = sorted(present)
            for i, w1 in enumerate(ordered):
                for w2 in ordered[i + 1 :]:
                    key = (w1, w2)
                    table.pair_counts[key] = table.pair_counts.get(key, 0) + 1
    return table


def npmi(
    pair_count: int,
    count1: int,
    count2: int,
    total: int,
    eps: float = 1e-12,
) -> float:
    """Normalized pointwise mutual information from window counts, in [-1, 1].

    npmi = log((p12 + eps) / (p1 p2)) / (-log(p12 + eps)); the epsilon keeps
    the logs finite when the pair never co-occurs. Words with zero support
    get 0 by convention.
    """
    if total <= 0:
        raise ValueError("total window count must be positive")
    if count1 == 0 or count2 == 0:
        return 0.0
    p12 = pair_count / total
    p1 = count1 / total
    p2 = count2 / total
    value = math.log((p12 + eps) / (p1 * p2)) / -math.log(p12 + eps)
    return max(-1.0, min(1.0, value))


@dataclass(frozen=True)
class CoherenceResult:
    per_topic: dict[int, float]
    skipped_topics: tuple[int, ...]

    @property
    def mean(self) -> float:
        if not self.per_topic:
            return float("nan")
        return sum(self.per_topic.values()) / len(self.per_topic)


def top_words(model: TopicModel, topic: int, top_n: int) -> list[str]:
    """Top-N terms of a topic by word probability, ties broken by word id."""
    row = model.phi[topic]
    order = sorted(range(model.V), key=lambda w: (-row[w], w))[:top_n]
    terms = model.terms
    return [terms[w] for w in order]


def _cosine(u: list[float], v: list[float]) -> float:
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


def topic_coherence(
    words: Sequence[str], table: CooccurrenceTable, eps: float
) -> float:
    """C_v coherence of one word set against a co-occurrence table."""
    n = len(words)
    vectors = [
        [
            npmi(table.pair_count(wi, wj), table.count(wi), table.count(wj), table.total_windows, eps)
            for wj in words
        ]
        for wi in words
    ]
    set_vector = [sum(vec[j] for vec in vectors) for j in range(n)]
    return sum(_cosine(vec, set_vector) for vec in vectors) / n


def cv_coherence(
    model: TopicModel,
    docs: Iterable[Sequence[str]],
    cfg: CoherenceConfig,
    reference_docs: Iterable[Sequence[str]] | None = None,
) -> CoherenceResult:
    """Per-topic C_v coherence and its model mean.

    ``docs`` are the model corpus token streams; in external-corpus mode
    ``reference_docs`` supplies the window statistics instead. Topics with
    fewer than top_n distinct supported words (words occurring in at least
    one window) are skipped and excluded from the mean.
    """
    if cfg.reference == EXTERNAL_CORPUS:
        if reference_docs is None:
            raise ValueError("external-corpus mode requires reference_docs")
        window_docs = reference_docs
    else:
        window_docs = docs

    topic_tops = [top_words(model, t, cfg.top_n) for t in range(model.k)]
    candidates = {w for tops in topic_tops for w in tops}
    table = build_windows(window_docs, cfg.window, restrict_to=candidates)

    per_topic: dict[int, float] = {}
    skipped: list[int] = []
    for t, tops in enumerate(topic_tops):
        supported = [w for w in tops if table.count(w) > 0]
        if len(supported) < cfg.top_n:
            skipped.append(t)
            continue
        per_topic[t] = topic_coherence(tops, table, cfg.npmi_epsilon)
    return CoherenceResult(per_topic=per_topic, skipped_topics=tuple(skipped))
