"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to see them)."""

from __future__ import annotations

import itertools
import json
import threading
import time
from contextlib import contextmanager
from pathlib import Path
from urllib.request import urlopen

import numpy as np
from scipy.optimize import linear_sum_assignment

from topicwatch.cli import main as cli_main
from topicwatch.coherence import CoherenceConfig, cv_coherence, top_words
from topicwatch.config import load_config
from topicwatch.corpus import term_frequencies
from topicwatch.dynamics import dispersion_groups
from topicwatch.graphs import serialize_document
from topicwatch.kmeans import elbow, kmeans
from topicwatch.lda.model import LdaConfig, fit
from topicwatch.modelsel import SelectionRule, SweepResult, select_k
from topicwatch.pipeline import PipelineRun
from topicwatch.server import make_server
from topicwatch.synthetic import planted_lda_corpus
from topicwatch.topics import RelevanceRanking, TopicInstance, build_unique_set, rank_relevance

from conftest import make_doc, make_week
from test_coherence import brute_force_cv
from test_graphs import build_two_account_graph
from test_topics import random_model_like


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {name}: FAIL")
        raise
    print(f"ACCEPTANCE {name}: PASS")


def test_planted_topic_recovery():
    with criterion("planted-topic recovery (>= 0.8 cosine, < 2 min)"):
        started = time.perf_counter()
        scores = []
        for seed in range(5):
            planted = planted_lda_corpus(v=200, k=5, n_docs=1000, doc_len=50, seed=seed)
            model = fit(
                planted.week,
                LdaConfig(k=5, iterations=200, burn_in=50, optimize_interval=25, seed=seed),
            )
            observed = [int(term[1:]) for term in model.terms]
            planted_phi = planted.phi[:, observed]
            planted_phi = planted_phi / np.linalg.norm(planted_phi, axis=1, keepdims=True)
            recovered = model.phi / np.linalg.norm(model.phi, axis=1, keepdims=True)
            similarity = planted_phi @ recovered.T
            rows, cols = linear_sum_assignment(-similarity)
            scores.append(float(similarity[rows, cols].mean()))
        elapsed = time.perf_counter() - started
        assert np.mean(scores) >= 0.8, f"mean best-match cosine {np.mean(scores):.3f}"
        assert elapsed < 120.0, f"runtime {elapsed:.1f}s exceeds 2 minutes"


def test_coherence_matches_independent_oracle():
    with criterion("coherence vs brute-force oracle (1e-9)"):
        docs = [
            ["sun", "moon", "star", "sun"],
            ["moon", "star", "rock", "dust"],
            ["rock", "dust", "gas", "sun"],
            ["gas", "dust", "rock"],
            ["star", "sun", "moon", "gas"],
        ]
        week = make_week([make_doc(f"d{i}", lemmas) for i, lemmas in enumerate(docs)])
        model = fit(
            week, LdaConfig(k=2, iterations=40, burn_in=10, optimize_interval=10, seed=4)
        )
        cfg = CoherenceConfig(top_n=3, window=2, npmi_epsilon=1e-12)
        top_lists = [top_words(model, t, cfg.top_n) for t in range(model.k)]
        expected = brute_force_cv(docs, top_lists, cfg.window, cfg.npmi_epsilon)
        result = cv_coherence(model, docs, cfg)
        for t in range(model.k):
            assert abs(result.per_topic[t] - expected[t]) < 1e-9


def test_relevance_degeneracy_on_random_models():
    with criterion("relevance degeneracy (lambda 1 and 0, 100 models)"):
        rng = np.random.default_rng(123)
        for _ in range(100):
            model, phi, p_w = random_model_like(rng, k=3, v=25)
            prob_rankings = rank_relevance(model, lam=1.0, top_m=model.V)
            lift_rankings = rank_relevance(model, lam=0.0, top_m=model.V)
            for t in range(model.k):
                by_prob = [
                    model.terms[w]
                    for w in sorted(range(model.V), key=lambda w: (-phi[t, w], w))
                ]
                lift = phi[t] / p_w
                by_lift = [
                    model.terms[w]
                    for w in sorted(range(model.V), key=lambda w: (-lift[w], w))
                ]
                # identical orderings == rank correlation exactly 1
                assert list(prob_rankings[t].terms) == by_prob
                assert list(lift_rankings[t].terms) == by_lift


def _instance(week, topic, terms):
    return TopicInstance(
        week_index=week,
        network="lj",
        topic_id=topic,
        ranking=RelevanceRanking(
            lam=0.6,
            top_m=len(terms),
            terms=tuple(terms),
            scores=tuple(float(len(terms) - i) for i in range(len(terms))),
        ),
        doc_count=0,
        contributors=frozenset(),
    )


def test_matching_threshold_boundary():
    with criterion("matching boundary (15/50 matched, 14/50 appended)"):
        base = [f"a{i:02d}" for i in range(50)]
        share_15 = base[:15] + [f"b{i:02d}" for i in range(35)]
        share_14 = base[:14] + [f"c{i:02d}" for i in range(36)]
        result = build_unique_set(
            [
                [_instance(1, 0, base)],
                [_instance(2, 0, share_15)],
                [_instance(3, 0, share_14)],
            ],
            threshold=0.30,
            top_m=50,
        )
        assert len(result.entries) == 2
        matched = result.attribution(2, "lj", 0)
        assert matched.unique_id == result.entries[0].unique_id and not matched.founded
        assert result.attribution(3, "lj", 0).founded


def test_relative_frequency_identity(fixture_run):
    with criterion("f_w identity (sum = 1 +/- 1e-12, hand cases exact)"):
        # hand cases
        week = make_week([make_doc("d", ["a", "b", "c", "d"])])
        assert term_frequencies(week).freqs["a"] == 0.25
        two = make_week(
            [make_doc("d1", ["t"] * 2 + ["x"] * 8), make_doc("d2", ["y"] * 5)]
        )
        assert term_frequencies(two).freqs["t"] == 0.1
        # every fixture week of the end-to-end corpus
        run: PipelineRun = fixture_run["run"]
        weeks = run.load_weeks()
        assert weeks, "fixture produced no weeks"
        for corpus_week in weeks:
            table = term_frequencies(corpus_week)
            assert abs(sum(table.freqs.values()) - 1.0) <= 1e-12


def test_clustering_blobs_and_monotone_traces():
    with criterion("clustering (elbow=3, >= 0.95 agreement, monotone WCSS)"):
        rng = np.random.default_rng(0)
        centers = np.array([[0.0, 0.0], [6.0, 6.0], [-6.0, 6.0]])
        rows, labels = [], []
        for c, center in enumerate(centers):
            rows.append(center + 0.3 * rng.standard_normal((40, 2)))
            labels.extend([c] * 40)
        matrix, labels = np.vstack(rows), np.array(labels)

        seeds = tuple(range(9))
        result = elbow(matrix, k_range=(2, 9), seeds=seeds)
        assert result.suggested_k == 3

        clustering = kmeans(matrix, 3, seeds=seeds)
        best = 0.0
        for perm in itertools.permutations(range(3)):
            mapped = np.array([perm[a] for a in clustering.assignments])
            best = max(best, float(np.mean(mapped == labels)))
        assert best >= 0.95

        # WCSS non-increasing within every Lloyd run on all fixtures
        fixtures = [matrix] + [np.random.default_rng(s).random((30, 4)) for s in range(3)]
        for fixture_matrix in fixtures:
            for k in (2, 3, 5):
                trace = kmeans(fixture_matrix, k, seeds=seeds).wcss_trace
                assert all(a >= b - 1e-9 for a, b in zip(trace, trace[1:]))


def test_dispersion_and_graph_conservation(fixture_run):
    with criterion("dispersion/graph conservation on the e2e fixture"):
        run: PipelineRun = fixture_run["run"]
        weeks = run.load_weeks()
        assert weeks
        for corpus_week in weeks:
            assignments = run.load_week_assignments(corpus_week)
            dispersion = dispersion_groups(assignments, mode="plain")
            grouped = [a for g in dispersion.groups for a in g.accounts]
            active = assignments.authors()
            assert len(grouped) == len(set(grouped)) == len(active)
            assert set(grouped) == active

        # serialized cluster=all graphs: edge widths sum to 1 (6-dp quantized)
        for path in sorted(run.store.path("graphs").glob("*_all.json")):
            document = json.loads(path.read_text(encoding="utf-8"))
            width_total = sum(e["width_ratio"] for e in document["edges"])
            assert abs(width_total - 1.0) <= 5e-6 * max(1, len(document["edges"]))

        # exact ratios of the worked two-account example
        graph = build_two_account_graph()
        topic_sizes = {n.key: n.size_ratio for n in graph.topic_nodes}
        assert topic_sizes == {"ThemeA": 1.0, "ThemeB": 0.5}
        assert {g.size_ratio for g in graph.group_nodes} == {0.5}
        assert sorted(e.width_ratio for e in graph.edges) == [1 / 3, 1 / 3, 1 / 3]

        # byte-identical round trip for every shipped graph artifact
        for path in sorted(run.store.path("graphs").glob("*.json")):
            text = path.read_text(encoding="utf-8")
            assert serialize_document(json.loads(text)) == text

        # golden file
        golden = Path(__file__).parent / "data" / "graph_two_account_golden.json"
        from topicwatch.graphs import serialize_graph

        assert serialize_graph(graph) == golden.read_text(encoding="utf-8")


def test_selection_rule_reproduces_shared_peak():
    with criterion("selection rule (shared interior peak at k=13)"):
        ks = list(range(5, 26))
        results = []
        for i, interval in enumerate((10, 50, 100, 500, 1000)):
            for k in ks:
                base = 0.30 + 0.004 * k
                bump = 0.08 if (k == 13 and interval in (10, 50, 100)) else 0.0
                results.append(
                    SweepResult(
                        week_index=1,
                        network="lj",
                        k=k,
                        optimize_interval=interval,
                        seed=0,
                        coherence=base + bump - 0.0001 * i,
                        per_topic={},
                        runtime_seconds=0.0,
                    )
                )
        selection = select_k(results, SelectionRule(epsilon_fraction=0.05, min_shared=3))
        assert selection.k == 13
        assert 13 in selection.shared_peaks
        # complete audit trail: every k accounted for plus the decision
        audited_ks = {int(line.split(":")[0][2:]) for line in selection.audit if line.startswith("k=")}
        assert audited_ks == set(ks)
        assert any("smallest shared peak k=13" in line for line in selection.audit)


def test_end_to_end_determinism_and_api(fixture_run, tmp_path):
    with criterion("end-to-end determinism + API verbatim"):
        config_path = str(fixture_run["config_path"])
        first_run: PipelineRun = fixture_run["run"]
        # full CLI run against the same config into a fresh runs dir
        exit_code = cli_main(["run", "--config", config_path, "--runs-dir", str(tmp_path / "runs")])
        assert exit_code == 0
        config = load_config(config_path)
        second_dir = tmp_path / "runs" / config.config_hash()

        def hashes(root: Path):
            import hashlib

            return {
                str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
                for p in sorted(root.rglob("*"))
                if p.is_file()
            }

        assert hashes(first_run.run_dir) == hashes(second_dir)

        # API responses are the artifact bytes, verbatim
        server = make_server(second_dir, host="127.0.0.1", port=0)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            host, port = server.server_address[:2]
            base = f"http://{host}:{port}/v1"
            with urlopen(f"{base}/meta") as response:
                assert response.read() == (second_dir / "meta.json").read_bytes()
            with urlopen(f"{base}/graph?week=1&network=lj&cluster=all") as response:
                assert response.read() == (
                    second_dir / "graphs" / "week01_lj_all.json"
                ).read_bytes()
            with urlopen(f"{base}/timeseries") as response:
                assert response.read() == (second_dir / "timeseries" / "all.json").read_bytes()
        finally:
            server.shutdown()
            server.server_close()
