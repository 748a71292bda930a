"""Deterministic synthetic corpora.

Two generators: a planted-topic corpus for recovery checks (token ids
drawn from known topic-word distributions) and a JSONL fixture corpus
exercising the full pipeline (two networks, several weeks, accounts with
distinct activity shapes, disjoint per-topic vocabularies).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from .corpus import CorpusWeek, Document
from .normalizers import NormalizedToken


@dataclass(frozen=True)
class PlantedCorpus:
    week: CorpusWeek
    phi: np.ndarray  # planted topic-word distributions (k x V)
    theta: np.ndarray  # planted document-topic proportions (D x k)


def planted_lda_corpus(
    v: int = 200,
    k: int = 5,
    n_docs: int = 1000,
    doc_len: int = 50,
    seed: int = 0,
    leak: float = 0.02,
) -> PlantedCorpus:
    """Corpus drawn from sparse planted topics.

    Each topic concentrates on its own block of v/k words (Dirichlet
    weights within the block) with a small uniform leak outside it.
    """
    rng = np.random.default_rng(seed)
    block = v // k
    phi = np.full((k, v), leak / v)
    for t in range(k):
        weights = rng.dirichlet(np.full(block, 0.5))
        phi[t, t * block : (t + 1) * block] += (1.0 - leak) * weights
    phi /= phi.sum(axis=1, keepdims=True)

    theta = rng.dirichlet(np.full(k, 0.2), size=n_docs)
    width = len(str(v - 1))
    terms = [f"w{i:0{width}d}" for i in range(v)]

    start = datetime(2020, 3, 22, tzinfo=timezone.utc)
    docs = []
    for d in range(n_docs):
        z = rng.choice(k, size=doc_len, p=theta[d])
        words = [terms[rng.choice(v, p=phi[t])] for t in z]
        docs.append(
            Document(
                id=f"d{d:05d}",
                author_id=f"a{d % 100:03d}",
                network="synthetic",
                timestamp=start + timedelta(minutes=d),
                raw_text=" ".join(words),
                tokens=tuple(NormalizedToken(lemma=w) for w in words),
                status="ok",
            )
        )
    week = CorpusWeek(
        week_index=1,
        window=(start, start + timedelta(days=7)),
        network="synthetic",
        documents=tuple(docs),
    )
    return PlantedCorpus(week=week, phi=phi, theta=theta)


# Account archetypes for the fixture corpus: (name, per-week activity
# weights). Weights are scaled by the per-network posting volume.
_ARCHETYPES = (
    ("steady", (1.0, 1.0, 1.0, 1.0)),
    ("burst2", (0.1, 3.0, 0.1, 0.0)),
    ("fading", (2.0, 1.2, 0.6, 0.2)),
)


def fixture_corpus(
    path,
    n_weeks: int = 4,
    accounts_per_network: int = 12,
    topics: int = 3,
    words_per_topic: int = 60,
    seed: int = 7,
) -> dict:
    """Write a deterministic JSONL corpus; returns a summary dict.

    Topic vocabularies are disjoint, so cross-week topic matching has an
    unambiguous ground truth. Accounts follow one of three activity shapes
    and prefer one or two topics. A twitter one-token post and a URL-only
    variant are included to exercise the cleanup rules.
    """
    if n_weeks > len(_ARCHETYPES[0][1]):
        raise ValueError(f"fixture supports at most {len(_ARCHETYPES[0][1])} weeks")
    rng = np.random.default_rng(seed)
    start = datetime(2020, 3, 22, tzinfo=timezone.utc)
    vocab = {
        t: [f"topic{t}word{j:02d}" for j in range(words_per_topic)] for t in range(topics)
    }
    stop = ["the", "and", "of"]
    records = []
    counts = {"lj": 0, "twitter": 0}
    for network, base_len, volume in (("lj", 14, 2), ("twitter", 7, 3)):
        for a in range(accounts_per_network):
            _, weights = _ARCHETYPES[a % len(_ARCHETYPES)]
            preferred = a % topics
            secondary = (a + 1) % topics
            for week in range(n_weeks):
                n_posts = int(round(weights[week] * volume))
                for p in range(n_posts):
                    # roughly one post in four strays to the secondary topic
                    topic = secondary if (a + p) % 4 == 3 else preferred
                    length = base_len + int(rng.integers(0, 6))
                    words = [
                        vocab[topic][int(rng.integers(0, words_per_topic))]
                        for _ in range(length)
                    ]
                    words.insert(0, stop[p % len(stop)])
                    if network == "lj" and a == 0 and p == 0:
                        words.append("http://example.com/some/path")
                    text = " ".join(words)
                    ts = start + timedelta(
                        days=7 * week, hours=a % 24, minutes=10 * p + (a % 10)
                    )
                    doc_id = f"{network}-{a:02d}-{week + 1}-{p:02d}"
                    records.append(
                        {
                            "id": doc_id,
                            "author_id": f"{network}_user{a:02d}",
                            "network": network,
                            "timestamp": ts.isoformat(),
                            "text": text,
                        }
                    )
                    counts[network] += 1
    # a one-token tweet (removed by the one-token floor) and an out-of-range post
    records.append(
        {
            "id": "twitter-short-1",
            "author_id": "twitter_user00",
            "network": "twitter",
            "timestamp": (start + timedelta(days=1)).isoformat(),
            "text": "topic0word00",
        }
    )
    records.append(
        {
            "id": "lj-late-1",
            "author_id": "lj_user00",
            "network": "lj",
            "timestamp": (start + timedelta(days=7 * n_weeks + 1)).isoformat(),
            "text": "topic0word00 topic0word01 topic0word02",
        }
    )
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    boundaries = [(start + timedelta(days=7 * i)).isoformat() for i in range(n_weeks + 1)]
    return {
        "path": str(path),
        "records": len(records),
        "per_network": counts,
        "boundaries": boundaries,
        "stopwords": stop,
        "topics": topics,
    }
