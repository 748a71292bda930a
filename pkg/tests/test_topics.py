from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topicwatch.config import shipped_theme_map_path
from topicwatch.lda.model import LdaConfig, fit
from topicwatch.topics import (
    RelevanceRanking,
    TopicInstance,
    assign_themes,
    build_unique_set,
    load_theme_map,
    log_relevance,
    prevalent_topic,
    prevalent_topics,
    rank_relevance,
    suggest_themes,
    topic_instances,
)

from conftest import make_doc, make_week


def random_model_like(rng, k=4, v=30):
    """Random phi and marginals standing in for a fitted model."""

    class Stub:
        pass

    stub = Stub()
    phi = rng.random((k, v)) + 1e-6
    phi /= phi.sum(axis=1, keepdims=True)
    p_w = rng.random(v) + 1e-6
    p_w /= p_w.sum()
    stub.phi = phi
    stub.k = k
    stub.V = v
    stub.terms = [f"t{i:03d}" for i in range(v)]
    stub.corpus_word_frequencies = lambda: p_w
    return stub, phi, p_w


class TestRelevance:
    def test_lambda_one_equals_probability_order(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            model, phi, p_w = random_model_like(rng)
            rankings = rank_relevance(model, lam=1.0, top_m=model.V)
            for t, ranking in enumerate(rankings):
                by_prob = [
                    model.terms[w]
                    for w in sorted(range(model.V), key=lambda w: (-phi[t, w], w))
                ]
                assert list(ranking.terms) == by_prob

    def test_lambda_zero_equals_lift_order(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            model, phi, p_w = random_model_like(rng)
            rankings = rank_relevance(model, lam=0.0, top_m=model.V)
            for t, ranking in enumerate(rankings):
                lift = phi[t] / p_w
                by_lift = [
                    model.terms[w]
                    for w in sorted(range(model.V), key=lambda w: (-lift[w], w))
                ]
                assert list(ranking.terms) == by_lift

    def test_hand_computed_score(self):
        # p(w|t)=0.1, p(w)=0.05, lambda=0.6
        value = log_relevance(0.1, 0.05, 0.6)
        expected = 0.6 * math.log(0.1) + 0.4 * math.log(2.0)
        assert value == pytest.approx(expected, abs=1e-12)
        assert value == pytest.approx(-1.1042, abs=1e-4)

    def test_rank_order_invariant_to_marginal_scaling(self):
        rng = np.random.default_rng(2)
        model, phi, p_w = random_model_like(rng)
        base = rank_relevance(model, lam=0.6, top_m=model.V)
        model.corpus_word_frequencies = lambda: p_w * 4.0  # unnormalized scaling
        scaled = rank_relevance(model, lam=0.6, top_m=model.V)
        for r1, r2 in zip(base, scaled):
            assert r1.terms == r2.terms

    def test_real_model_rankings_sorted_and_distinct(self):
        week = make_week(
            [make_doc(f"d{i}", ["ant", "axe", "bow", "bug"][i % 4 :] or ["ant"]) for i in range(8)]
        )
        model = fit(week, LdaConfig(k=2, iterations=20, burn_in=5, optimize_interval=0, seed=0))
        rankings = rank_relevance(model, lam=0.6, top_m=3)
        for ranking in rankings:
            assert len(set(ranking.terms)) == len(ranking.terms) == 3
            assert list(ranking.scores) == sorted(ranking.scores, reverse=True)


class TestPrevalentTopic:
    def test_argmax_row(self):
        week = make_week([make_doc("d1", ["a", "b", "c"]), make_doc("d2", ["c", "d", "e"])])
        model = fit(week, LdaConfig(k=2, iterations=10, burn_in=2, optimize_interval=0, seed=0))
        model.theta = np.array([[0.1, 0.9], [0.7, 0.3]])
        assert prevalent_topic(model, "d1") == 1
        assert prevalent_topic(model, "d2") == 0

    def test_uniform_tie_goes_to_lowest_index(self):
        week = make_week([make_doc("d1", ["a", "b"])])
        model = fit(week, LdaConfig(k=2, iterations=5, burn_in=1, optimize_interval=0, seed=0))
        model.theta = np.array([[0.5, 0.5]])
        assert prevalent_topic(model, "d1") == 0

    def test_planted_docs_align_with_recovered_topics(self):
        # documents drawn purely from one planted topic follow it
        from topicwatch.synthetic import planted_lda_corpus

        planted = planted_lda_corpus(v=60, k=3, n_docs=150, doc_len=25, seed=3)
        model = fit(
            planted.week,
            LdaConfig(k=3, iterations=120, burn_in=30, optimize_interval=20, seed=3),
        )
        # project planted phi onto the observed vocabulary before comparing
        observed = [int(term[1:]) for term in model.terms]
        planted_phi = planted.phi[:, observed]
        sims = planted_phi @ model.phi.T
        mapping = {p: int(np.argmax(sims[p])) for p in range(3)}
        planted_major = np.argmax(planted.theta, axis=1)
        pure = planted.theta.max(axis=1) > 0.95
        assert pure.sum() > 20  # the Dirichlet(0.2) prior gives plenty of pure docs
        recovered = prevalent_topics(model)
        agree = sum(
            1
            for d in np.flatnonzero(pure)
            if recovered[d] == mapping[int(planted_major[d])]
        )
        assert agree / pure.sum() >= 0.95


def ranking_from_terms(terms, top_m=None):
    n = len(terms)
    return RelevanceRanking(
        lam=0.6,
        top_m=top_m or n,
        terms=tuple(terms),
        scores=tuple(float(n - i) for i in range(n)),
    )


def instance(week, topic, terms, network="lj", top_m=None):
    return TopicInstance(
        week_index=week,
        network=network,
        topic_id=topic,
        ranking=ranking_from_terms(terms, top_m),
        doc_count=0,
        contributors=frozenset(),
    )


def fifty_terms(prefix, start=0):
    return [f"{prefix}{i:02d}" for i in range(start, start + 50)]


class TestUniqueSet:
    def test_identical_rankings_matched_not_appended(self):
        terms = fifty_terms("w")
        weeks = [[instance(1, 0, terms)], [instance(2, 0, terms)]]
        result = build_unique_set(weeks, threshold=0.30, top_m=50)
        assert len(result.entries) == 1
        rec = result.attribution(2, "lj", 0)
        assert rec is not None and rec.ratio == 1.0

    def test_threshold_boundary_fifteen_of_fifty(self):
        base = fifty_terms("a")
        overlap_15 = base[:15] + fifty_terms("b")[: 50 - 15]
        overlap_14 = base[:14] + fifty_terms("c")[: 50 - 14]
        weeks = [
            [instance(1, 0, base)],
            [instance(2, 0, overlap_15)],
            [instance(3, 0, overlap_14)],
        ]
        result = build_unique_set(weeks, threshold=0.30, top_m=50)
        # 15/50 = 30% matched; 14/50 = 28% appended
        assert len(result.entries) == 2
        assert result.attribution(2, "lj", 0).unique_id == result.entries[0].unique_id
        assert result.attribution(3, "lj", 0).founded

    def test_single_week_returns_topics_in_order(self):
        weeks = [[instance(1, t, fifty_terms(f"t{t}x")) for t in range(4)]]
        result = build_unique_set(weeks, threshold=0.30, top_m=50)
        assert [e.founder_topic for e in result.entries] == [0, 1, 2, 3]
        assert [e.founder_week for e in result.entries] == [1, 1, 1, 1]

    def test_multi_match_attributed_to_max_intersection(self):
        a = fifty_terms("a")
        b = a[:20] + fifty_terms("b")[:30]  # b shares 20 with a -> own entry? 40% -> matched!
        # make b distinct enough to found its own entry
        b = a[:10] + fifty_terms("b")[:40]  # 10/50 = 20% < 30%
        hybrid = a[:25] + b[10:35]  # shares 25 with a, 25 with b... compute below
        weeks = [[instance(1, 0, a), instance(1, 1, b)], [instance(2, 0, hybrid)]]
        result = build_unique_set(weeks, threshold=0.30, top_m=50)
        assert len(result.entries) == 2
        records = [
            r for r in result.match_records if r.week_index == 2 and r.topic_id == 0
        ]
        assert len(records) == 2  # all matches recorded
        attributed = [r for r in records if r.attributed]
        assert len(attributed) == 1
        best = max(records, key=lambda r: r.intersection)
        assert attributed[0].unique_id == best.unique_id

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(5)
        pool = [f"v{i:03d}" for i in range(300)]
        weeks = []
        for w in range(1, 4):
            instances = []
            for t in range(3):
                terms = list(rng.choice(pool, size=50, replace=False))
                instances.append(instance(w, t, terms))
            weeks.append(instances)
        sizes = []
        for threshold in (0.1, 0.2, 0.3, 0.5, 0.9):
            sizes.append(len(build_unique_set(weeks, threshold=threshold).entries))
        assert sizes == sorted(sizes)

    def test_mixed_networks_rejected(self):
        weeks = [[instance(1, 0, fifty_terms("a"))], [instance(2, 0, fifty_terms("a"), network="twitter")]]
        with pytest.raises(ValueError, match="mixed networks"):
            build_unique_set(weeks)


class TestThemes:
    def test_shipped_map_loads(self):
        theme_map = load_theme_map(shipped_theme_map_path())
        names = theme_map.names()
        assert len(names) == len(set(names)) == 17
        assert "Virus_control_measures (personal level)" in names
        by_name = {t.name: t for t in theme_map.themes}
        assert "mask" in by_name["Virus_control_measures (personal level)"].keywords

    def test_empty_map_plus_default_theme(self, tmp_path):
        path = tmp_path / "themes.json"
        path.write_text(
            json.dumps(
                {
                    "themes": [{"name": "catchall", "keywords": []}],
                    "default_theme": "catchall",
                }
            )
        )
        theme_map = load_theme_map(path)
        unique_set = build_unique_set([[instance(1, 0, fifty_terms("a"))]])
        assignment = assign_themes(unique_set, theme_map)
        assert set(assignment.values()) == {"catchall"}

    def test_unmapped_topics_fall_into_unassigned(self):
        theme_map = load_theme_map(shipped_theme_map_path())
        unique_set = build_unique_set([[instance(1, 0, fifty_terms("a"))]])
        assignment = assign_themes(unique_set, theme_map)
        assert assignment[unique_set.entries[0].unique_id] == "unassigned"

    def test_nonexistent_member_rejected(self, tmp_path):
        path = tmp_path / "themes.json"
        path.write_text(
            json.dumps(
                {"themes": [{"name": "x", "keywords": [], "members": ["lj-999"]}]}
            )
        )
        theme_map = load_theme_map(path)
        unique_set = build_unique_set([[instance(1, 0, fifty_terms("a"))]])
        with pytest.raises(ValueError, match="nonexistent"):
            assign_themes(unique_set, theme_map)

    def test_malformed_map_diagnostics(self, tmp_path):
        path = tmp_path / "themes.json"
        path.write_text('{"themes": [  ')
        with pytest.raises(ValueError, match="line"):
            load_theme_map(path)

    def test_assignment_is_partition(self, tmp_path):
        path = tmp_path / "themes.json"
        path.write_text(
            json.dumps(
                {
                    "themes": [
                        {"name": "A", "keywords": [], "members": ["lj-000"]},
                        {"name": "B", "keywords": [], "members": ["lj-001"]},
                    ]
                }
            )
        )
        theme_map = load_theme_map(path)
        weeks = [
            [instance(1, 0, fifty_terms("a")), instance(1, 1, fifty_terms("b"))],
            [instance(2, 0, fifty_terms("c"))],
        ]
        unique_set = build_unique_set(weeks)
        assignment = assign_themes(unique_set, theme_map)
        assert len(assignment) == len(unique_set.entries)
        counts: dict[str, int] = {}
        for theme in assignment.values():
            counts[theme] = counts.get(theme, 0) + 1
        assert sum(counts.values()) == len(unique_set.entries)


class TestSuggestions:
    def test_protective_gear_topic_suggests_personal_measures(self):
        theme_map = load_theme_map(shipped_theme_map_path())
        terms = ["mask", "glove", "sanitizer"] + fifty_terms("zz")[:47]
        unique_set = build_unique_set([[instance(1, 0, terms)]])
        suggestions = suggest_themes(unique_set, theme_map)
        assert suggestions[0].ranked[0][0] == "Virus_control_measures (personal level)"
        assert suggestions[0].ranked[0][1] == 3

    def test_zero_overlap_gives_empty_list(self):
        theme_map = load_theme_map(shipped_theme_map_path())
        unique_set = build_unique_set([[instance(1, 0, fifty_terms("qq"))]])
        suggestions = suggest_themes(unique_set, theme_map)
        assert suggestions[0].ranked == ()

    def test_ties_listed_alphabetically(self, tmp_path):
        path = tmp_path / "themes.json"
        path.write_text(
            json.dumps(
                {
                    "themes": [
                        {"name": "Zeta", "keywords": ["shared"]},
                        {"name": "Alpha", "keywords": ["shared"]},
                    ]
                }
            )
        )
        theme_map = load_theme_map(path)
        terms = ["shared"] + fifty_terms("x")[:49]
        unique_set = build_unique_set([[instance(1, 0, terms)]])
        suggestions = suggest_themes(unique_set, theme_map)
        assert [name for name, _ in suggestions[0].ranked] == ["Alpha", "Zeta"]


class TestInstances:
    def test_counts_consistent_with_assignments(self):
        week = make_week(
            [
                make_doc("d1", ["ant", "axe", "ant"], author="u1"),
                make_doc("d2", ["bow", "bug", "bug"], author="u2"),
                make_doc("d3", ["ant", "axe"], author="u1"),
            ]
        )
        model = fit(week, LdaConfig(k=2, iterations=30, burn_in=5, optimize_interval=0, seed=2))
        rankings = rank_relevance(model, top_m=3)
        instances = topic_instances(model, rankings)
        assert sum(i.doc_count for i in instances) == 3
        prevalent = prevalent_topics(model)
        for inst in instances:
            expected_docs = [
                model.doc_ids[d] for d in np.flatnonzero(prevalent == inst.topic_id)
            ]
            assert inst.doc_count == len(expected_docs)


@given(st.floats(min_value=0.0, max_value=1.0), st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_relevance_order_matches_direct_formula(lam, seed):
    rng = np.random.default_rng(seed)
    model, phi, p_w = random_model_like(rng, k=2, v=12)
    rankings = rank_relevance(model, lam=lam, top_m=12)
    for t in range(2):
        scores = {
            model.terms[w]: log_relevance(phi[t, w], p_w[w], lam) for w in range(12)
        }
        expected = sorted(scores, key=lambda term: (-scores[term], term))
        assert list(rankings[t].terms) == expected
