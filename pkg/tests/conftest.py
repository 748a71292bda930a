from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone

import pytest

from topicwatch.config import load_config
from topicwatch.corpus import CorpusWeek, Document, PreprocessConfig
from topicwatch.normalizers import NormalizedToken
from topicwatch.pipeline import PipelineRun
from topicwatch.synthetic import fixture_corpus

START = datetime(2020, 3, 22, tzinfo=timezone.utc)


def fixture_config_payload(corpus_path: str, boundaries: list[str]) -> dict:
    """Pipeline config used by the end-to-end fixture tests."""
    return {
        "input": {"path": corpus_path},
        "networks": ["lj", "twitter"],
        "weeks": {"boundaries": boundaries},
        "preprocess": {
            "stopwords": ["the", "and", "of"],
            "one_token_floor_networks": ["twitter"],
        },
        "lda": {
            "k": 3,
            "iterations": 120,
            "burn_in": 30,
            "optimize_interval": 10,
            "seed": 11,
        },
        "sweep": {"enabled": True, "k_min": 2, "k_max": 4, "intervals": [10, 50], "seeds": [0]},
        "selection": {"epsilon_fraction": 0.05, "min_shared": 2},
        "coherence": {"top_n": 5, "window": 20},
        "clustering": {"k_min": 2, "k_max": 6},
        "graphs": {"granularity": "theme"},
    }


def build_fixture_run(base_dir, seed: int = 7):
    """Generate the synthetic corpus, write its config, run all stages."""
    base_dir.mkdir(parents=True, exist_ok=True)
    corpus_path = base_dir / "corpus.jsonl"
    summary = fixture_corpus(corpus_path, seed=seed)
    config_path = base_dir / "config.json"
    payload = fixture_config_payload(str(corpus_path), summary["boundaries"])
    config_path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    config = load_config(config_path)
    run = PipelineRun(config, base_dir / "runs")
    statuses = run.run_all()
    return run, config_path, statuses


@pytest.fixture(scope="session")
def fixture_run(tmp_path_factory):
    base_dir = tmp_path_factory.mktemp("e2e")
    run, config_path, statuses = build_fixture_run(base_dir)
    return {"run": run, "config_path": config_path, "statuses": statuses, "base_dir": base_dir}


def make_doc(
    doc_id: str,
    lemmas: list[str],
    author: str = "alice",
    network: str = "lj",
    at: datetime | None = None,
    pos: list[str] | None = None,
) -> Document:
    tokens = tuple(
        NormalizedToken(lemma=lm, pos=(pos[i] if pos else None))
        for i, lm in enumerate(lemmas)
    )
    return Document(
        id=doc_id,
        author_id=author,
        network=network,
        timestamp=at or (START + timedelta(hours=1)),
        raw_text=" ".join(lemmas),
        tokens=tokens,
        status="ok",
    )


def make_week(
    docs: list[Document], week_index: int = 1, network: str = "lj"
) -> CorpusWeek:
    window_start = START + timedelta(days=7 * (week_index - 1))
    return CorpusWeek(
        week_index=week_index,
        window=(window_start, window_start + timedelta(days=7)),
        network=network,
        documents=tuple(docs),
    )


@pytest.fixture
def base_cfg() -> PreprocessConfig:
    return PreprocessConfig()
