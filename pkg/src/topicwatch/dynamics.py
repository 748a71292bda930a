"""Per-topic time series, account activity matrices and dispersion groups.

All computations run on :class:`WeekAssignments`, a light summary of one
(week, network): which author wrote each document, each document's
prevalent topic, and the per-topic relevance rankings. Dispersion is the
number of distinct prevalent topics an account contributed to within the
week.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import CorpusWeek
from .lda.model import TopicModel
from .topics import RelevanceRanking, UniqueTopicSet, prevalent_topics

from .kmeans import ElbowResult, KMeansResult, elbow, kmeans  # noqa: F401  (re-exported)


@dataclass(frozen=True)
class WeekAssignments:
    week_index: int
    network: str
    doc_authors: dict[str, str]
    prevalent: dict[str, int]
    doc_terms: dict[str, frozenset[str]]
    rankings: tuple[RelevanceRanking, ...]

    @classmethod
    def from_model(
        cls, model: TopicModel, rankings: list[RelevanceRanking], week: CorpusWeek
    ) -> "WeekAssignments":
        authors = {doc.id: doc.author_id for doc in week.documents}
        terms = {doc.id: frozenset(doc.lemmas()) for doc in week.documents}
        prevalent = {
            doc_id: int(topic)
            for doc_id, topic in zip(model.doc_ids, prevalent_topics(model))
        }
        return cls(
            week_index=model.week_index,
            network=model.network,
            doc_authors=authors,
            prevalent=prevalent,
            doc_terms=terms,
            rankings=tuple(rankings),
        )

    @property
    def doc_count(self) -> int:
        return len(self.doc_authors)

    def authors(self) -> set[str]:
        return set(self.doc_authors.values())

    def topic_docs(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for doc_id, topic in self.prevalent.items():
            out.setdefault(topic, []).append(doc_id)
        return out

    def account_topics(self, accounts: set[str] | None = None) -> dict[str, set[int]]:
        """Distinct prevalent topics per account (optionally restricted)."""
        out: dict[str, set[int]] = {}
        for doc_id, author in self.doc_authors.items():
            if accounts is not None and author not in accounts:
                continue
            out.setdefault(author, set()).add(self.prevalent[doc_id])
        return out


@dataclass(frozen=True)
class WeekIndicators:
    week_index: int
    median_intersection_relevance: float
    text_ratio: float
    contributor_ratio: float
    onetopic_share_of_topic: float
    onetopic_share_of_onetopic_users: float
    term_shift: float | None
    term_shift_from_week: int | None


@dataclass(frozen=True)
class TopicTimeSeries:
    unique_id: str
    network: str
    points: dict[int, WeekIndicators]  # weeks where the topic is absent are missing

    def present_weeks(self) -> list[int]:
        return sorted(self.points)


def _median(values: list[float]) -> float:
    xs = sorted(values)
    n = len(xs)
    mid = n // 2
    if n % 2:
        return xs[mid]
    return 0.5 * (xs[mid - 1] + xs[mid])


def topic_timeseries(
    unique_set: UniqueTopicSet, weeks: list[WeekAssignments]
) -> dict[str, TopicTimeSeries]:
    """Indicator time series per unique topic.

    Week topics contribute to the unique topic they are attributed to (the
    max-intersection match). The median intersection relevance comes from
    the closest matched pair: the median, within the week topic's ranking,
    of the scores of the terms shared with the unique topic's top list.
    The term shift is the Jaccard distance between the closest pair's term
    sets in consecutive present weeks (gaps are flagged via
    ``term_shift_from_week``).
    """
    weeks = sorted(weeks, key=lambda w: w.week_index)
    series: dict[str, TopicTimeSeries] = {
        entry.unique_id: TopicTimeSeries(
            unique_id=entry.unique_id, network=unique_set.network, points={}
        )
        for entry in unique_set.entries
    }
    last_terms: dict[str, tuple[int, frozenset[str]]] = {}

    for week in weeks:
        topic_docs = week.topic_docs()
        week_authors = week.authors()
        account_topics = week.account_topics()
        onetopic_accounts = {a for a, topics in account_topics.items() if len(topics) == 1}

        attributed: dict[str, list] = {}
        for rec in unique_set.match_records:
            if rec.attributed and rec.week_index == week.week_index and rec.network == week.network:
                attributed.setdefault(rec.unique_id, []).append(rec)

        for unique_id, records in attributed.items():
            entry = unique_set.entry(unique_id)
            closest = max(records, key=lambda r: (r.ratio, -r.topic_id))
            closest_ranking = week.rankings[closest.topic_id]
            shared = entry.terms & closest_ranking.term_set()
            median_rel = _median([closest_ranking.score_of(t) for t in sorted(shared)])

            doc_ids = [d for rec in records for d in topic_docs.get(rec.topic_id, [])]
            contributors = {week.doc_authors[d] for d in doc_ids}
            onetopic_in_topic = contributors & onetopic_accounts

            text_ratio = len(doc_ids) / week.doc_count if week.doc_count else 0.0
            contributor_ratio = (
                len(contributors) / len(week_authors) if week_authors else 0.0
            )
            share_of_topic = (
                len(onetopic_in_topic) / len(contributors) if contributors else 0.0
            )
            share_of_onetopic = (
                len(onetopic_in_topic) / len(onetopic_accounts)
                if onetopic_accounts
                else 0.0
            )

            term_shift = None
            shift_from = None
            current_terms = closest_ranking.term_set()
            if unique_id in last_terms:
                shift_from, previous_terms = last_terms[unique_id]
                union = previous_terms | current_terms
                jaccard = len(previous_terms & current_terms) / len(union) if union else 1.0
                term_shift = 1.0 - jaccard
            last_terms[unique_id] = (week.week_index, current_terms)

            series[unique_id].points[week.week_index] = WeekIndicators(
                week_index=week.week_index,
                median_intersection_relevance=median_rel,
                text_ratio=text_ratio,
                contributor_ratio=contributor_ratio,
                onetopic_share_of_topic=share_of_topic,
                onetopic_share_of_onetopic_users=share_of_onetopic,
                term_shift=term_shift,
                term_shift_from_week=shift_from,
            )
    return series


@dataclass(frozen=True)
class ActivityMatrix:
    """Per-account, per-week post counts with normalization state flags."""

    accounts: tuple[str, ...]
    week_indices: tuple[int, ...]
    matrix: np.ndarray
    row_normalized: bool = False
    standardized: bool = False


def build_activity_matrix(
    weeks: list[WeekAssignments], week_indices: list[int] | None = None
) -> ActivityMatrix:
    """Raw post-count matrix; rows are accounts in sorted id order."""
    if week_indices is None:
        week_indices = sorted({w.week_index for w in weeks})
    counts: dict[str, dict[int, int]] = {}
    for week in weeks:
        for author in week.doc_authors.values():
            per_week = counts.setdefault(author, {})
            per_week[week.week_index] = per_week.get(week.week_index, 0) + 1
    accounts = tuple(sorted(counts))
    matrix = np.zeros((len(accounts), len(week_indices)), dtype=np.int64)
    col = {w: j for j, w in enumerate(week_indices)}
    for i, account in enumerate(accounts):
        for week_index, n in counts[account].items():
            if week_index in col:
                matrix[i, col[week_index]] = n
    return ActivityMatrix(
        accounts=accounts, week_indices=tuple(week_indices), matrix=matrix
    )


def normalize_activity(am: ActivityMatrix) -> ActivityMatrix:
    """Row-normalize (per-account share per week), then standardize columns.

    Columns use the population standard deviation; a zero-variance column
    is left centered at 0. Accounts with zero posts are dropped first.
    """
    raw = am.matrix.astype(np.float64)
    row_sums = raw.sum(axis=1)
    keep = row_sums > 0
    raw = raw[keep]
    accounts = tuple(a for a, k in zip(am.accounts, keep) if k)
    rows = raw / raw.sum(axis=1, keepdims=True)
    means = rows.mean(axis=0)
    stds = rows.std(axis=0)  # population (ddof=0)
    centered = rows - means
    scaled = np.where(stds > 0, centered / np.where(stds > 0, stds, 1.0), centered)
    return ActivityMatrix(
        accounts=accounts,
        week_indices=am.week_indices,
        matrix=scaled,
        row_normalized=True,
        standardized=True,
    )


PLAIN = "plain"
WEIGHTED = "weighted"


@dataclass(frozen=True)
class DispersionGroup:
    week_index: int
    network: str
    n: int
    accounts: frozenset[str]
    mode: str
    n_terms: int | None


@dataclass(frozen=True)
class DispersionResult:
    groups: tuple[DispersionGroup, ...]
    excluded: frozenset[str]

    def group_of(self) -> dict[str, int]:
        return {a: g.n for g in self.groups for a in g.accounts}


def dispersion_groups(
    week: WeekAssignments,
    mode: str = PLAIN,
    n_terms: int = 5,
    accounts: set[str] | None = None,
) -> DispersionResult:
    """Group the week's active accounts by dispersion.

    Plain mode counts distinct prevalent topics per account. Weighted mode
    counts a topic only when at least one of the account's documents in it
    contains one of that topic's top ``n_terms`` relevant terms; accounts
    whose every topic fails the filter are excluded (reported, not
    grouped). ``accounts`` restricts the grouping to a subset (e.g. one
    activity cluster).
    """
    if mode not in (PLAIN, WEIGHTED):
        raise ValueError(f"unknown dispersion mode {mode!r}")

    account_docs: dict[str, list[str]] = {}
    for doc_id, author in week.doc_authors.items():
        if accounts is not None and author not in accounts:
            continue
        account_docs.setdefault(author, []).append(doc_id)

    dispersion: dict[str, int] = {}
    excluded: set[str] = set()
    for account, doc_ids in account_docs.items():
        topics = {week.prevalent[d] for d in doc_ids}
        if mode == PLAIN:
            dispersion[account] = len(topics)
            continue
        counted = 0
        for topic in topics:
            top_terms = set(week.rankings[topic].terms[:n_terms])
            docs_in_topic = (d for d in doc_ids if week.prevalent[d] == topic)
            if any(week.doc_terms[d] & top_terms for d in docs_in_topic):
                counted += 1
        if counted == 0:
            excluded.add(account)
        else:
            dispersion[account] = counted

    by_n: dict[int, set[str]] = {}
    for account, n in dispersion.items():
        by_n.setdefault(n, set()).add(account)
    groups = tuple(
        DispersionGroup(
            week_index=week.week_index,
            network=week.network,
            n=n,
            accounts=frozenset(members),
            mode=mode,
            n_terms=n_terms if mode == WEIGHTED else None,
        )
        for n, members in sorted(by_n.items())
    )
    return DispersionResult(groups=groups, excluded=frozenset(excluded))
