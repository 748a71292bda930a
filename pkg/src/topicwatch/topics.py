"""Topic representations and cross-week topic identity.

Topics are represented by their relevance-ranked term lists (probability
blended with lift). The unique-topic set is grown week by week: a week
topic whose top-m term intersection with every base entry stays below the
threshold founds a new unique topic, otherwise it is matched (attributed
to the max-intersection entry, earliest entry on ties). Themes are an
operator-maintained grouping of unique topics loaded from a map file.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .lda.model import TopicModel

logger = logging.getLogger(__name__)

UNASSIGNED_THEME = "unassigned"


@dataclass(frozen=True)
class RelevanceRanking:
    """Terms of one topic ordered by descending relevance."""

    lam: float
    top_m: int
    terms: tuple[str, ...]
    scores: tuple[float, ...]

    def term_set(self) -> frozenset[str]:
        return frozenset(self.terms)

    def score_of(self, term: str) -> float:
        return self.scores[self.terms.index(term)]


def rank_relevance(
    model: TopicModel,
    lam: float = 0.6,
    top_m: int = 50,
    word_frequencies: np.ndarray | None = None,
) -> list[RelevanceRanking]:
    """Relevance-ranked term list per topic.

    relevance(w, t) = lam * log p(w|t) + (1 - lam) * log(p(w|t) / p(w)),
    with p(w) the empirical corpus token frequency (natural log; any base
    gives the same ordering). Ties break on ascending term id.
    """
    if not (0.0 <= lam <= 1.0):
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    top_m = min(top_m, model.V)
    p_w = word_frequencies if word_frequencies is not None else model.corpus_word_frequencies()
    if np.any(p_w <= 0):
        raise AssertionError("marginal word probability must be positive for vocabulary terms")

    log_phi = np.log(model.phi)
    log_lift = log_phi - np.log(p_w)[None, :]
    relevance = lam * log_phi + (1.0 - lam) * log_lift
    terms = model.terms
    rankings = []
    for t in range(model.k):
        row = relevance[t]
        order = sorted(range(model.V), key=lambda w: (-row[w], w))[:top_m]
        rankings.append(
            RelevanceRanking(
                lam=lam,
                top_m=top_m,
                terms=tuple(terms[w] for w in order),
                scores=tuple(float(row[w]) for w in order),
            )
        )
    return rankings


def prevalent_topic(model: TopicModel, doc_id: str) -> int:
    """Topic with the highest share of the document's topic distribution
    (lowest index on ties)."""
    return int(np.argmax(model.theta[model.doc_index(doc_id)]))


def prevalent_topics(model: TopicModel) -> np.ndarray:
    return np.argmax(model.theta, axis=1)


@dataclass(frozen=True)
class TopicInstance:
    """One topic of one week's model, with its ranking and audience."""

    week_index: int
    network: str
    topic_id: int
    ranking: RelevanceRanking
    doc_count: int
    contributors: frozenset[str]


def topic_instances(
    model: TopicModel, rankings: list[RelevanceRanking]
) -> list[TopicInstance]:
    """Assemble per-topic instances from a fitted model and its rankings."""
    prevalent = prevalent_topics(model)
    instances = []
    for t in range(model.k):
        doc_indices = np.flatnonzero(prevalent == t)
        instances.append(
            TopicInstance(
                week_index=model.week_index,
                network=model.network,
                topic_id=t,
                ranking=rankings[t],
                doc_count=int(doc_indices.shape[0]),
                contributors=frozenset(model.doc_ids[i] for i in doc_indices),
            )
        )
    return instances


@dataclass(frozen=True)
class MatchRecord:
    week_index: int
    network: str
    topic_id: int
    unique_id: str
    intersection: int
    ratio: float
    attributed: bool
    founded: bool = False


@dataclass(frozen=True)
class UniqueTopic:
    unique_id: str
    founder_week: int
    founder_topic: int
    terms_ordered: tuple[str, ...]  # the founder's relevance-ranked top list

    @property
    def terms(self) -> frozenset[str]:
        return frozenset(self.terms_ordered)


@dataclass
class UniqueTopicSet:
    network: str
    threshold: float
    top_m: int
    entries: list[UniqueTopic] = field(default_factory=list)
    match_records: list[MatchRecord] = field(default_factory=list)

    def ids(self) -> list[str]:
        return [e.unique_id for e in self.entries]

    def entry(self, unique_id: str) -> UniqueTopic:
        for e in self.entries:
            if e.unique_id == unique_id:
                return e
        raise KeyError(f"unknown unique topic {unique_id!r}")

    def attribution(self, week_index: int, network: str, topic_id: int) -> MatchRecord | None:
        for rec in self.match_records:
            if (
                rec.attributed
                and rec.week_index == week_index
                and rec.network == network
                and rec.topic_id == topic_id
            ):
                return rec
        return None


def build_unique_set(
    weeks: list[list[TopicInstance]],
    threshold: float = 0.30,
    top_m: int = 50,
) -> UniqueTopicSet:
    """Grow the cross-week base list of distinct topics.

    The first week's topics seed the list. Every later topic is compared
    against each base entry's founder ranking by |intersection| / top_m;
    a ratio reaching the threshold means "same topic" (all such matches are
    recorded), anything below it everywhere founds a new entry. Base
    entries never change once inserted.
    """
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    if not weeks or not weeks[0]:
        raise ValueError("need at least one week with at least one topic")
    network = weeks[0][0].network

    result = UniqueTopicSet(network=network, threshold=threshold, top_m=top_m)
    for instances in weeks:
        for instance in instances:
            if instance.network != network:
                raise ValueError(
                    f"mixed networks in one unique set: {instance.network!r} vs {network!r}"
                )
            _absorb(result, instance)
    return result


def _absorb(result: UniqueTopicSet, instance: TopicInstance) -> None:
    terms = instance.ranking.term_set()
    matches: list[tuple[int, float, int, str]] = []
    for position, entry in enumerate(result.entries):
        overlap = len(terms & entry.terms)
        ratio = overlap / result.top_m
        if ratio >= result.threshold:
            matches.append((overlap, ratio, position, entry.unique_id))
    if matches:
        best_overlap = max(m[0] for m in matches)
        best_position = min(pos for ov, _, pos, _ in matches if ov == best_overlap)
        for overlap, ratio, position, unique_id in matches:
            result.match_records.append(
                MatchRecord(
                    week_index=instance.week_index,
                    network=instance.network,
                    topic_id=instance.topic_id,
                    unique_id=unique_id,
                    intersection=overlap,
                    ratio=ratio,
                    attributed=(position == best_position),
                )
            )
    else:
        unique_id = f"{result.network}-{len(result.entries):03d}"
        result.entries.append(
            UniqueTopic(
                unique_id=unique_id,
                founder_week=instance.week_index,
                founder_topic=instance.topic_id,
                terms_ordered=instance.ranking.terms,
            )
        )
        result.match_records.append(
            MatchRecord(
                week_index=instance.week_index,
                network=instance.network,
                topic_id=instance.topic_id,
                unique_id=unique_id,
                intersection=result.top_m,
                ratio=1.0,
                attributed=True,
                founded=True,
            )
        )


@dataclass(frozen=True)
class Theme:
    name: str
    keywords: tuple[str, ...]
    members: tuple[str, ...] = ()


@dataclass(frozen=True)
class ThemeMap:
    themes: tuple[Theme, ...]
    default_theme: str | None = None
    provenance: str | None = None

    def names(self) -> list[str]:
        return [t.name for t in self.themes]

    def theme_of(self) -> dict[str, str]:
        """unique-topic id -> theme name for explicitly listed members."""
        mapping: dict[str, str] = {}
        for theme in self.themes:
            for member in theme.members:
                if member in mapping:
                    raise ValueError(
                        f"unique topic {member!r} listed under both "
                        f"{mapping[member]!r} and {theme.name!r}"
                    )
                mapping[member] = theme.name
        return mapping


def load_theme_map(path) -> ThemeMap:
    """Read a theme map file (JSON: themes[{name, keywords, members}])."""
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: malformed theme map at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(payload, dict) or "themes" not in payload:
        raise ValueError(f"{path}: theme map must be an object with a 'themes' array")
    themes = []
    seen = set()
    for i, entry in enumerate(payload["themes"]):
        for key in ("name", "keywords"):
            if key not in entry:
                raise ValueError(f"{path}: theme #{i} missing field {key!r}")
        name = str(entry["name"])
        if name in seen:
            raise ValueError(f"{path}: duplicate theme name {name!r}")
        seen.add(name)
        themes.append(
            Theme(
                name=name,
                keywords=tuple(str(k).lower() for k in entry["keywords"]),
                members=tuple(str(m) for m in entry.get("members", ())),
            )
        )
    if not themes:
        raise ValueError(f"{path}: theme map has no themes")
    return ThemeMap(
        themes=tuple(themes),
        default_theme=payload.get("default_theme"),
        provenance=payload.get("provenance"),
    )


def assign_themes(unique_set: UniqueTopicSet, theme_map: ThemeMap) -> dict[str, str]:
    """Total unique-topic -> theme assignment.

    Topics not listed in the map fall into the default theme (or the
    reserved "unassigned" theme) with a warning; a map member that does not
    exist in the unique set is a validation error.
    """
    known = set(unique_set.ids())
    mapping = theme_map.theme_of()
    unknown = sorted(set(mapping) - known)
    if unknown:
        raise ValueError(f"theme map references nonexistent unique topics: {unknown}")
    fallback = theme_map.default_theme or UNASSIGNED_THEME
    assignment: dict[str, str] = {}
    unmapped = []
    for unique_id in unique_set.ids():
        theme = mapping.get(unique_id)
        if theme is None:
            unmapped.append(unique_id)
            theme = fallback
        assignment[unique_id] = theme
    if unmapped:
        logger.warning(
            "%d unique topics not covered by the theme map; assigned to %r",
            len(unmapped),
            fallback,
        )
    return assignment


@dataclass(frozen=True)
class ThemeSuggestion:
    unique_id: str
    ranked: tuple[tuple[str, int], ...]  # (theme, keyword overlap), best first


def suggest_themes(unique_set: UniqueTopicSet, theme_map: ThemeMap) -> list[ThemeSuggestion]:
    """Keyword-overlap suggestions for unique topics the map does not cover.

    Purely assistive: scores are |top-m terms ∩ theme keywords| per theme,
    ranked descending with alphabetical tie order; zero-overlap themes are
    omitted. Nothing is ever auto-assigned.
    """
    covered = set(theme_map.theme_of())
    suggestions = []
    for entry in unique_set.entries:
        if entry.unique_id in covered:
            continue
        terms = entry.terms
        scored = []
        for theme in theme_map.themes:
            overlap = sum(1 for kw in theme.keywords if kw in terms)
            if overlap > 0:
                scored.append((theme.name, overlap))
        scored.sort(key=lambda item: (-item[1], item[0]))
        suggestions.append(ThemeSuggestion(unique_id=entry.unique_id, ranked=tuple(scored)))
    return suggestions


def relevance_rank_order(scores: dict[str, float]) -> list[str]:
    """Descending-score order with ascending-term tie break (shared by
    reports and tests)."""
    return sorted(scores, key=lambda term: (-scores[term], term))


def log_relevance(p_wt: float, p_w: float, lam: float) -> float:
    """Scalar relevance formula (kept for audits and spot checks)."""
    return lam * math.log(p_wt) + (1.0 - lam) * math.log(p_wt / p_w)
