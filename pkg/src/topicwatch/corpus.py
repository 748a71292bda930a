"""Corpus ingestion, normalization, weekly partitioning and filtering.

The ingest format is line-delimited JSON with fields ``id``, ``author_id``,
``network``, ``timestamp`` (RFC 3339), ``text`` and optionally ``lemmas``
(array), ``pos`` (array aligned with lemmas) and ``lang`` (string for the
whole document or array aligned with sentences).

Documents flow through: ingest -> normalize -> partition into half-open
weekly windows per network -> relative-term-frequency outlier removal ->
length-quantile pruning. Everything downstream consumes the resulting
:class:`CorpusWeek` objects.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from .normalizers import (
    NormalizedToken,
    get_language_detector,
    get_normalizer,
)

SNAPSHOT_VERSION = 1

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_SENTENCE_SPLIT_RE = re.compile(r"[.\n]")

DOC_RAW = "raw"
DOC_OK = "ok"
DOC_EMPTY = "empty"
DOC_FAILED = "failed"


@dataclass(frozen=True)
class PreprocessConfig:
    """Normalization and filtering knobs.

    ``length_quantiles`` are the (lower, upper) quantile ranks used by
    :func:`prune_lengths`; documents shorter than the lower bound or longer
    than the upper bound are dropped. ``one_token_floor_networks`` lists
    networks where single-token documents are always removed.
    """

    stopwords: frozenset[str] = frozenset()
    kept_pos: frozenset[str] = frozenset()
    length_quantiles: tuple[float, float] = (0.2, 0.8)
    outlier_iqr_multiplier: float = 3.0
    outlier_min_docs: int = 5
    normalizer: str = "whitespace"
    target_lang: str | None = None
    language_detector: str | None = None
    one_token_floor_networks: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        lo, hi = self.length_quantiles
        if not (0.0 < lo < hi < 1.0):
            raise ValueError(
                f"length quantile ranks must satisfy 0 < lower < upper < 1, got {self.length_quantiles}"
            )
        if self.outlier_iqr_multiplier <= 0:
            raise ValueError("outlier_iqr_multiplier must be positive")
        if self.outlier_min_docs < 1:
            raise ValueError("outlier_min_docs must be >= 1")


@dataclass(frozen=True)
class Document:
    id: str
    author_id: str
    network: str
    timestamp: datetime
    raw_text: str
    tokens: tuple[NormalizedToken, ...] = ()
    lang: str | tuple[str, ...] | None = None
    status: str = DOC_RAW

    @property
    def length(self) -> int:
        return len(self.tokens)

    def lemmas(self) -> list[str]:
        return [t.lemma for t in self.tokens]


@dataclass(frozen=True)
class CorpusWeek:
    """The per-(week, network) document subset with its vocabulary."""

    week_index: int
    window: tuple[datetime, datetime]
    network: str
    documents: tuple[Document, ...]
    vocabulary: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.vocabulary:
            object.__setattr__(self, "vocabulary", build_vocabulary(self.documents))
        start, end = self.window
        for doc in self.documents:
            if not (start <= doc.timestamp < end):
                raise ValueError(
                    f"document {doc.id!r} timestamp {doc.timestamp} outside window [{start}, {end})"
                )

    @property
    def T(self) -> int:
        return len(self.documents)

    @property
    def V(self) -> int:
        return len(self.vocabulary)


def build_vocabulary(documents: tuple[Document, ...] | list[Document]) -> dict[str, int]:
    """Dense term -> id map over all document tokens, ids assigned in sorted term order."""
    terms = sorted({t.lemma for doc in documents for t in doc.tokens})
    return {term: i for i, term in enumerate(terms)}


@dataclass(frozen=True)
class TermFrequencyTable:
    """Per-term relative frequencies for one week, with per-document audit data.

    ``freqs`` holds, for every term, the mean over documents of that term's
    in-document share: freq(term) = (1/T) * sum_d count_d(term) / len_d.
    """

    week_index: int
    network: str
    freqs: dict[str, float]
    doc_lengths: dict[str, int]
    doc_term_counts: dict[str, dict[str, int]]

    @property
    def T(self) -> int:
        return len(self.doc_lengths)

    def doc_count(self, term: str) -> int:
        """Number of documents the term occurs in."""
        return sum(1 for counts in self.doc_term_counts.values() if term in counts)


@dataclass(frozen=True)
class IngestError:
    line_no: int
    message: str


@dataclass(frozen=True)
class IngestResult:
    documents: list[Document]
    errors: list[IngestError]


@dataclass(frozen=True)
class PartitionResult:
    weeks: list[CorpusWeek]
    out_of_range: dict[str, int]


@dataclass(frozen=True)
class PruneResult:
    week: CorpusWeek
    bounds: tuple[int, int]
    removed: int


def _parse_timestamp(value: str) -> datetime:
    ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def ingest(path, cfg: PreprocessConfig) -> IngestResult:
    """Parse a JSONL file into documents, collecting per-line errors.

    Malformed lines (bad JSON, missing fields, unparseable timestamps) are
    reported and skipped. A file that yields zero valid documents is a hard
    error. Records carrying precomputed ``lemmas`` arrive with tokens
    already populated, which makes :func:`normalize` bypass the normalizer.
    """
    documents: list[Document] = []
    errors: list[IngestError] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.append(IngestError(line_no, f"invalid JSON: {exc}"))
                continue
            try:
                doc = _record_to_document(record)
            except (KeyError, TypeError, ValueError) as exc:
                errors.append(IngestError(line_no, str(exc)))
                continue
            if doc.id in seen_ids:
                errors.append(IngestError(line_no, f"duplicate document id {doc.id!r}"))
                continue
            seen_ids.add(doc.id)
            documents.append(doc)
    if not documents:
        raise ValueError(f"{path}: no valid documents ({len(errors)} errors)")
    return IngestResult(documents=documents, errors=errors)


def record_to_document(record: dict) -> Document:
    """Parse one already-decoded JSONL record (raises on bad fields)."""
    return _record_to_document(record)


def _record_to_document(record: dict) -> Document:
    for key in ("id", "author_id", "network", "timestamp"):
        if key not in record:
            raise KeyError(f"missing field {key!r}")
    try:
        ts = _parse_timestamp(str(record["timestamp"]))
    except ValueError:
        raise ValueError(f"unparseable timestamp {record['timestamp']!r}") from None
    tokens: tuple[NormalizedToken, ...] = ()
    if record.get("lemmas"):
        lemmas = record["lemmas"]
        pos = record.get("pos") or [None] * len(lemmas)
        if len(pos) != len(lemmas):
            raise ValueError("pos array not aligned with lemmas array")
        tokens = tuple(
            NormalizedToken(lemma=str(lm).lower(), pos=p) for lm, p in zip(lemmas, pos)
        )
    lang = record.get("lang")
    if isinstance(lang, list):
        lang = tuple(str(x) for x in lang)
    return Document(
        id=str(record["id"]),
        author_id=str(record["author_id"]),
        network=str(record["network"]),
        timestamp=ts,
        raw_text=str(record.get("text", "")),
        tokens=tokens,
        lang=lang,
    )


def split_sentences(text: str) -> list[str]:
    """Newline/period sentence heuristic; empty pieces dropped."""
    return [s for s in (p.strip() for p in _SENTENCE_SPLIT_RE.split(text)) if s]


def normalize(doc: Document, cfg: PreprocessConfig) -> Document:
    """Apply the normalization pipeline to one document.

    Steps: keep only target-language sentences (using per-sentence tags or
    the configured detector), strip URLs, tokenize/lemmatize via the
    configured normalizer, drop tokens with POS outside the kept set, drop
    stopwords. Documents ending with zero tokens are marked empty; documents
    with precomputed tokens skip the normalizer but still get POS/stopword
    filtering.
    """
    if doc.tokens:
        tokens = _filter_tokens(doc.tokens, cfg)
        status = DOC_OK if tokens else DOC_EMPTY
        return replace(doc, tokens=tuple(tokens), status=status)

    text = _URL_RE.sub(" ", doc.raw_text)
    sentences = split_sentences(text)
    sentences = _filter_language(sentences, doc, cfg)

    normalizer = get_normalizer(cfg.normalizer)
    tokens: list[NormalizedToken] = []
    try:
        for sentence in sentences:
            tokens.extend(normalizer(sentence))
    except Exception:
        return replace(doc, tokens=(), status=DOC_FAILED)

    tokens = _filter_tokens(tokens, cfg)
    status = DOC_OK if tokens else DOC_EMPTY
    return replace(doc, tokens=tuple(tokens), status=status)


def _filter_language(
    sentences: list[str], doc: Document, cfg: PreprocessConfig
) -> list[str]:
    if cfg.target_lang is None:
        return sentences
    if isinstance(doc.lang, str):
        return sentences if doc.lang == cfg.target_lang else []
    if isinstance(doc.lang, tuple):
        # tags align with sentence order; untagged trailing sentences are kept
        kept = []
        for i, sentence in enumerate(sentences):
            tag = doc.lang[i] if i < len(doc.lang) else None
            if tag is None or tag == cfg.target_lang:
                kept.append(sentence)
        return kept
    if cfg.language_detector is not None:
        detect = get_language_detector(cfg.language_detector)
        return [s for s in sentences if detect(s) == cfg.target_lang]
    return sentences


def _filter_tokens(
    tokens: tuple[NormalizedToken, ...] | list[NormalizedToken], cfg: PreprocessConfig
) -> list[NormalizedToken]:
    out = []
    for tok in tokens:
        if cfg.kept_pos and tok.pos is not None and tok.pos not in cfg.kept_pos:
            continue
        if tok.lemma in cfg.stopwords:
            continue
        out.append(tok)
    return out


def weekly_boundaries(start: datetime, n_weeks: int) -> list[datetime]:
    """n_weeks 7-day windows from ``start``: n_weeks + 1 boundaries."""
    from datetime import timedelta

    if start.tzinfo is None:
        start = start.replace(tzinfo=timezone.utc)
    return [start + timedelta(days=7 * i) for i in range(n_weeks + 1)]


def partition_weeks(
    docs: list[Document], boundaries: list[datetime]
) -> PartitionResult:
    """Assign documents to half-open [start, end) windows per network.

    Documents outside every window are counted out-of-range per network.
    Week indices are 1-based in boundary order.
    """
    if len(boundaries) < 2:
        raise ValueError("need at least 2 boundaries")
    if any(a >= b for a, b in zip(boundaries, boundaries[1:])):
        raise ValueError("boundaries must be strictly increasing")

    buckets: dict[tuple[int, str], list[Document]] = {}
    out_of_range: dict[str, int] = {}
    for doc in docs:
        week = _window_index(doc.timestamp, boundaries)
        if week is None:
            out_of_range[doc.network] = out_of_range.get(doc.network, 0) + 1
            continue
        buckets.setdefault((week, doc.network), []).append(doc)

    weeks = [
        CorpusWeek(
            week_index=week,
            window=(boundaries[week - 1], boundaries[week]),
            network=network,
            documents=tuple(bucket),
        )
        for (week, network), bucket in sorted(buckets.items())
    ]
    return PartitionResult(weeks=weeks, out_of_range=out_of_range)


def _window_index(ts: datetime, boundaries: list[datetime]) -> int | None:
    if ts < boundaries[0] or ts >= boundaries[-1]:
        return None
    lo, hi = 0, len(boundaries) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ts < boundaries[mid]:
            hi = mid
        else:
            lo = mid
    return lo + 1


def term_frequencies(week: CorpusWeek) -> TermFrequencyTable:
    """Relative term frequencies: freq(term) = (1/T) * sum_d count_d/len_d."""
    if week.T == 0:
        raise ValueError(f"week {week.week_index} ({week.network}) has no documents")
    doc_lengths: dict[str, int] = {}
    doc_term_counts: dict[str, dict[str, int]] = {}
    sums: dict[str, float] = {}
    for doc in week.documents:
        if doc.length == 0:
            raise ValueError(f"document {doc.id!r} has no tokens; prune empties first")
        counts: dict[str, int] = {}
        for tok in doc.tokens:
            counts[tok.lemma] = counts.get(tok.lemma, 0) + 1
        doc_lengths[doc.id] = doc.length
        doc_term_counts[doc.id] = counts
        inv_len = 1.0 / doc.length
        for term, n in counts.items():
            sums[term] = sums.get(term, 0.0) + n * inv_len
    inv_t = 1.0 / week.T
    freqs = {term: s * inv_t for term, s in sums.items()}
    return TermFrequencyTable(
        week_index=week.week_index,
        network=week.network,
        freqs=freqs,
        doc_lengths=doc_lengths,
        doc_term_counts=doc_term_counts,
    )


def _quartiles(values: list[float]) -> tuple[float, float]:
    """Q1/Q3 with linear interpolation on the sorted sample."""
    xs = sorted(values)
    n = len(xs)
    if n == 1:
        return xs[0], xs[0]

    def at(q: float) -> float:
        pos = q * (n - 1)
        lo = math.floor(pos)
        hi = math.ceil(pos)
        if lo == hi:
            return xs[lo]
        frac = pos - lo
        return xs[lo] * (1.0 - frac) + xs[hi] * frac

    return at(0.25), at(0.75)


def weekly_outliers(table: TermFrequencyTable, cfg: PreprocessConfig) -> set[str]:
    """Terms whose frequency exceeds Q3 + multiplier*IQR for this week.

    The distribution is taken over terms occurring in at least
    ``outlier_min_docs`` documents; rarer terms are never flagged.
    """
    eligible = {
        term: f
        for term, f in table.freqs.items()
        if table.doc_count(term) >= cfg.outlier_min_docs
    }
    if not eligible:
        return set()
    q1, q3 = _quartiles(list(eligible.values()))
    cutoff = q3 + cfg.outlier_iqr_multiplier * (q3 - q1)
    return {term for term, f in eligible.items() if f > cutoff}


def detect_persistent_outliers(
    tables: list[TermFrequencyTable], cfg: PreprocessConfig
) -> set[str]:
    """Terms flagged as frequency outliers in every week."""
    if not tables:
        raise ValueError("need at least one week's frequency table")
    result = weekly_outliers(tables[0], cfg)
    for table in tables[1:]:
        if not result:
            break
        result &= weekly_outliers(table, cfg)
    return result


def drop_terms(week: CorpusWeek, terms: set[str]) -> CorpusWeek:
    """Remove the given terms from every document; vocabulary is rebuilt.

    Documents left with zero tokens are dropped.
    """
    if not terms:
        return week
    docs = []
    for doc in week.documents:
        kept = tuple(t for t in doc.tokens if t.lemma not in terms)
        if kept:
            docs.append(replace(doc, tokens=kept) if len(kept) != doc.length else doc)
    return CorpusWeek(
        week_index=week.week_index,
        window=week.window,
        network=week.network,
        documents=tuple(docs),
    )


def length_bounds(lengths: list[int], quantiles: tuple[float, float]) -> tuple[int, int]:
    """(lower, upper) length bounds for the keep rule lower <= len <= upper.

    lower is the smallest length whose empirical CDF strictly exceeds the
    lower rank; upper is the smallest length whose CDF reaches the upper
    rank (nearest rank). With all lengths equal the bounds coincide and
    nothing is pruned.
    """
    q_lo, q_hi = quantiles
    xs = sorted(lengths)
    n = len(xs)
    lo_idx = math.floor(q_lo * n)  # first index with CDF > q_lo
    if lo_idx >= n:
        lo_idx = n - 1
    hi_idx = math.ceil(q_hi * n) - 1  # nearest-rank index for q_hi
    if hi_idx < 0:
        hi_idx = 0
    return xs[lo_idx], xs[hi_idx]


def prune_lengths(
    week: CorpusWeek,
    cfg: PreprocessConfig,
    bounds: tuple[int, int] | None = None,
) -> PruneResult:
    """Drop documents outside the per-week length-quantile bounds.

    ``bounds`` overrides the computed quantile bounds (used to re-apply a
    frozen first-pass rule). On networks listed in
    ``one_token_floor_networks``, single-token documents are removed
    regardless of the quantile bounds. Pruning that would empty the week is
    an error.
    """
    if week.T == 0:
        raise ValueError("cannot prune an empty week")
    if bounds is None:
        bounds = length_bounds([d.length for d in week.documents], cfg.length_quantiles)
    lower, upper = bounds
    one_token_floor = week.network in cfg.one_token_floor_networks
    kept = tuple(
        doc
        for doc in week.documents
        if lower <= doc.length <= upper and not (one_token_floor and doc.length <= 1)
    )
    if not kept:
        raise ValueError(
            f"length pruning removed every document in week {week.week_index} ({week.network})"
        )
    pruned = CorpusWeek(
        week_index=week.week_index,
        window=week.window,
        network=week.network,
        documents=kept,
    )
    return PruneResult(week=pruned, bounds=bounds, removed=week.T - len(kept))


def week_to_dict(week: CorpusWeek) -> dict:
    return {
        "version": SNAPSHOT_VERSION,
        "week_index": week.week_index,
        "window": [week.window[0].isoformat(), week.window[1].isoformat()],
        "network": week.network,
        "documents": [
            {
                "id": d.id,
                "author_id": d.author_id,
                "timestamp": d.timestamp.isoformat(),
                "tokens": [[t.lemma, t.pos] for t in d.tokens],
                "status": d.status,
            }
            for d in week.documents
        ],
        "vocabulary": week.vocabulary,
    }


def week_from_dict(payload: dict) -> CorpusWeek:
    if payload.get("version") != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported corpus snapshot version {payload.get('version')!r}")
    window = (
        _parse_timestamp(payload["window"][0]),
        _parse_timestamp(payload["window"][1]),
    )
    network = payload["network"]
    docs = tuple(
        Document(
            id=d["id"],
            author_id=d["author_id"],
            network=network,
            timestamp=_parse_timestamp(d["timestamp"]),
            raw_text="",
            tokens=tuple(NormalizedToken(lemma=lm, pos=p) for lm, p in d["tokens"]),
            status=d.get("status", DOC_OK),
        )
        for d in payload["documents"]
    )
    week = CorpusWeek(
        week_index=payload["week_index"],
        window=window,
        network=network,
        documents=docs,
        vocabulary={str(k): int(v) for k, v in payload["vocabulary"].items()},
    )
    return week
