"""Bipartite topic/dispersion-group graphs and their canonical JSON form.

Node numerators come from the selected accounts (after any cluster
filter); every denominator is the full unfiltered week (unique accounts
for node sizes, total texts for post shares and edge widths). Numeric
fields are serialized with 6 decimal places, half-even, so graph documents
are byte-stable golden files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal

from .dynamics import DispersionResult, WeekAssignments
from .kmeans import KMeansResult
from .topics import UniqueTopicSet

GRAPH_VERSION = 1

CLUSTER_ALL = "all"
CLUSTER_MAIN = "main"
CLUSTER_PEAK = "peak"

GRANULARITY_THEME = "theme"
GRANULARITY_UNIQUE = "unique"


@dataclass(frozen=True)
class GroupCell:
    n: int
    accounts: int
    pct_of_topic: float


@dataclass(frozen=True)
class TopicNode:
    key: str
    size_ratio: float  # topic accounts / unique accounts in the full week
    pct_posts_of_week: float
    mean_posts_per_account: float
    groups: tuple[GroupCell, ...]


@dataclass(frozen=True)
class GroupNode:
    n: int
    size_ratio: float  # group accounts / unique accounts in the full week
    account_count: int
    ratio_to_all_accounts: float
    topics_covered: int


@dataclass(frozen=True)
class Edge:
    group_n: int
    topic_key: str
    width_ratio: float  # texts contributed by the group to the topic / all week texts
    contributed_texts: int


@dataclass(frozen=True)
class WeekGraph:
    week_index: int
    network: str
    cluster: str
    granularity: str
    topic_nodes: tuple[TopicNode, ...]
    group_nodes: tuple[GroupNode, ...]
    edges: tuple[Edge, ...]


def topic_key_map(
    week: WeekAssignments,
    unique_set: UniqueTopicSet,
    themes: dict[str, str] | None,
    granularity: str,
) -> dict[int, str]:
    """Week topic id -> display key (theme name or unique-topic id)."""
    if granularity not in (GRANULARITY_THEME, GRANULARITY_UNIQUE):
        raise ValueError(f"unknown granularity {granularity!r}")
    mapping: dict[int, str] = {}
    for topic_id in set(week.prevalent.values()):
        record = unique_set.attribution(week.week_index, week.network, topic_id)
        if record is None:
            raise ValueError(
                f"week {week.week_index} topic {topic_id} has no unique-set attribution"
            )
        if granularity == GRANULARITY_UNIQUE or themes is None:
            mapping[topic_id] = record.unique_id
        else:
            mapping[topic_id] = themes[record.unique_id]
    return mapping


def select_cluster_accounts(
    clustering: KMeansResult,
    accounts: tuple[str, ...],
    cluster: str,
    week_col: int,
) -> set[str] | None:
    """Accounts in the selected activity cluster (None means no filter).

    "main" is the largest cluster; "peak" is the cluster whose centroid is
    highest at the given week column (ties to the larger cluster, which has
    the lower canonical label).
    """
    if cluster == CLUSTER_ALL:
        return None
    if cluster == CLUSTER_MAIN:
        label = 0  # canonical labels are ordered by descending size
    elif cluster == CLUSTER_PEAK:
        column = clustering.centroids[:, week_col]
        best = column.max()
        label = int(min(c for c in range(clustering.k) if column[c] == best))
    else:
        raise ValueError(f"unknown cluster selector {cluster!r}")
    member = clustering.assignments == label
    return {a for a, m in zip(accounts, member) if m}


def build_graph(
    week: WeekAssignments,
    dispersion: DispersionResult,
    topic_keys: dict[int, str],
    cluster: str,
    granularity: str,
    selection: set[str] | None = None,
) -> WeekGraph:
    """Assemble one bipartite graph.

    ``dispersion`` must have been computed on the same ``selection``. An
    empty selection yields an empty graph, not an error.
    """
    week_accounts = week.authors()
    week_posts = week.doc_count
    selected = week_accounts if selection is None else (selection & week_accounts)

    group_of = dispersion.group_of()
    topic_docs: dict[str, list[str]] = {}
    for doc_id, topic_id in week.prevalent.items():
        author = week.doc_authors[doc_id]
        if author not in selected or author not in group_of:
            continue
        topic_docs.setdefault(topic_keys[topic_id], []).append(doc_id)

    topic_accounts = {
        key: {week.doc_authors[d] for d in docs} for key, docs in topic_docs.items()
    }

    denominator_accounts = len(week_accounts)
    topic_nodes = []
    for key in sorted(topic_docs):
        docs = topic_docs[key]
        contributors = topic_accounts[key]
        cells = []
        for group in dispersion.groups:
            members = contributors & group.accounts
            if members:
                cells.append(
                    GroupCell(
                        n=group.n,
                        accounts=len(members),
                        pct_of_topic=len(members) / len(contributors),
                    )
                )
        topic_nodes.append(
            TopicNode(
                key=key,
                size_ratio=len(contributors) / denominator_accounts,
                pct_posts_of_week=len(docs) / week_posts,
                mean_posts_per_account=len(docs) / len(contributors),
                groups=tuple(cells),
            )
        )

    group_nodes = []
    edges = []
    for group in dispersion.groups:
        if not group.accounts:
            continue
        covered = set()
        for key, contributors in topic_accounts.items():
            if contributors & group.accounts:
                covered.add(key)
        group_nodes.append(
            GroupNode(
                n=group.n,
                size_ratio=len(group.accounts) / denominator_accounts,
                account_count=len(group.accounts),
                ratio_to_all_accounts=len(group.accounts) / denominator_accounts,
                topics_covered=len(covered),
            )
        )
        for key in sorted(topic_docs):
            contributed = [
                d for d in topic_docs[key] if week.doc_authors[d] in group.accounts
            ]
            if contributed:
                edges.append(
                    Edge(
                        group_n=group.n,
                        topic_key=key,
                        width_ratio=len(contributed) / week_posts,
                        contributed_texts=len(contributed),
                    )
                )

    return WeekGraph(
        week_index=week.week_index,
        network=week.network,
        cluster=cluster,
        granularity=granularity,
        topic_nodes=tuple(topic_nodes),
        group_nodes=tuple(group_nodes),
        edges=tuple(edges),
    )


def _q6(value: float) -> float:
    """6-decimal half-even quantization for serialization stability."""
    return float(Decimal(repr(float(value))).quantize(Decimal("0.000001"), ROUND_HALF_EVEN))


def graph_to_document(graph: WeekGraph) -> dict:
    return {
        "meta": {
            "week": graph.week_index,
            "network": graph.network,
            "cluster": graph.cluster,
            "granularity": graph.granularity,
            "version": GRAPH_VERSION,
        },
        "topic_nodes": [
            {
                "key": n.key,
                "size_ratio": _q6(n.size_ratio),
                "pct_posts_of_week": _q6(n.pct_posts_of_week),
                "mean_posts_per_account": _q6(n.mean_posts_per_account),
                "groups": [
                    {
                        "n": c.n,
                        "accounts": c.accounts,
                        "pct_of_topic": _q6(c.pct_of_topic),
                    }
                    for c in n.groups
                ],
            }
            for n in graph.topic_nodes
        ],
        "group_nodes": [
            {
                "n": g.n,
                "size_ratio": _q6(g.size_ratio),
                "account_count": g.account_count,
                "ratio_to_all_accounts": _q6(g.ratio_to_all_accounts),
                "topics_covered": g.topics_covered,
            }
            for g in graph.group_nodes
        ],
        "edges": [
            {
                "group_n": e.group_n,
                "topic_key": e.topic_key,
                "width_ratio": _q6(e.width_ratio),
                "contributed_texts": e.contributed_texts,
            }
            for e in graph.edges
        ],
    }


def serialize_graph(graph: WeekGraph) -> str:
    """Canonical JSON text for a graph (stable key order, 6-dp numbers)."""
    return serialize_document(graph_to_document(graph))


def serialize_document(document: dict) -> str:
    return json.dumps(document, ensure_ascii=False, indent=2) + "\n"
