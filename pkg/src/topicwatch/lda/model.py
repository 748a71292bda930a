"""Collapsed Gibbs LDA with symmetric beta and an asymmetric alpha vector
re-optimized during training by the Minka fixed-point update.

A fit is deterministic given (corpus, config, seed): token-level randomness
comes from per-document splitmix64 streams, and each sweep samples against
sweep-start topic-word counts so document order does not matter.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma, gammaln

from .._backend import backend_name
from ..corpus import CorpusWeek
from ._rng import MASK64, fnv1a64

logger = logging.getLogger(__name__)

MODEL_VERSION = 1
ALPHA_FLOOR = 1e-10


@dataclass(frozen=True)
class LdaConfig:
    k: int
    alpha0: float = 5.0
    beta: float = 0.01
    iterations: int = 1000
    burn_in: int = 200
    optimize_interval: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError(f"topic count must be >= 2, got {self.k}")
        if self.alpha0 <= 0 or self.beta <= 0:
            raise ValueError("alpha0 and beta must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not (0 <= self.burn_in < self.iterations):
            raise ValueError("burn_in must satisfy 0 <= burn_in < iterations")
        if self.optimize_interval < 0:
            raise ValueError("optimize_interval must be >= 0 (0 disables)")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "alpha0": self.alpha0,
            "beta": self.beta,
            "iterations": self.iterations,
            "burn_in": self.burn_in,
            "optimize_interval": self.optimize_interval,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "LdaConfig":
        return cls(**payload)


@dataclass(frozen=True)
class FlatCorpus:
    """Week documents flattened to token arrays (CSR over documents)."""

    doc_ptr: np.ndarray  # int64, D+1
    words: np.ndarray  # int32 word id per token
    wcols: np.ndarray  # int32 per-document distinct-word column per token
    dwords_ptr: np.ndarray  # int64, D+1
    dwords: np.ndarray  # int32 distinct word ids per document
    doc_keys: np.ndarray  # uint64 stream key per document
    doc_ids: tuple[str, ...]

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    @property
    def n_tokens(self) -> int:
        return int(self.words.shape[0])

    def doc_lengths(self) -> np.ndarray:
        return np.diff(self.doc_ptr)


def flatten_week(week: CorpusWeek) -> FlatCorpus:
    doc_ptr = [0]
    words: list[int] = []
    wcols: list[int] = []
    dwords_ptr = [0]
    dwords: list[int] = []
    doc_keys = []
    doc_ids = []
    vocab = week.vocabulary
    for doc in week.documents:
        if doc.length == 0:
            raise ValueError(f"document {doc.id!r} is empty; prune before fitting")
        local: dict[int, int] = {}
        for tok in doc.tokens:
            wid = vocab[tok.lemma]
            col = local.setdefault(wid, len(local))
            words.append(wid)
            wcols.append(col)
        dwords.extend(local.keys())
        dwords_ptr.append(len(dwords))
        doc_ptr.append(len(words))
        doc_keys.append(fnv1a64(doc.id))
        doc_ids.append(doc.id)
    return FlatCorpus(
        doc_ptr=np.asarray(doc_ptr, dtype=np.int64),
        words=np.asarray(words, dtype=np.int32),
        wcols=np.asarray(wcols, dtype=np.int32),
        dwords_ptr=np.asarray(dwords_ptr, dtype=np.int64),
        dwords=np.asarray(dwords, dtype=np.int32),
        doc_keys=np.asarray(doc_keys, dtype=np.uint64),
        doc_ids=tuple(doc_ids),
    )


@dataclass
class TopicModel:
    """Fitted LDA state for one (week, network)."""

    config: LdaConfig
    week_index: int
    network: str
    vocabulary: dict[str, int]
    doc_ids: tuple[str, ...]
    z: np.ndarray
    doc_ptr: np.ndarray
    words: np.ndarray
    n_dk: np.ndarray
    n_kw: np.ndarray
    n_k: np.ndarray
    alpha: np.ndarray
    phi: np.ndarray = field(init=False)
    theta: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.phi = estimate_phi(self.n_kw, self.n_k, self.config.beta)
        self.theta = estimate_theta(self.n_dk, self.alpha)

    @property
    def k(self) -> int:
        return self.config.k

    @property
    def V(self) -> int:
        return len(self.vocabulary)

    @property
    def terms(self) -> list[str]:
        out = [""] * len(self.vocabulary)
        for term, i in self.vocabulary.items():
            out[i] = term
        return out

    def vocab_hash(self) -> str:
        return vocabulary_hash(self.vocabulary)

    def doc_index(self, doc_id: str) -> int:
        try:
            return self.doc_ids.index(doc_id)
        except ValueError:
            raise KeyError(f"document {doc_id!r} not in model corpus") from None

    def corpus_word_frequencies(self) -> np.ndarray:
        """Empirical marginal token frequency per word id."""
        counts = np.bincount(self.words, minlength=self.V).astype(np.float64)
        return counts / counts.sum()

    def validate_counts(self, atol: float = 0.0) -> None:
        """Raise if the count matrices are inconsistent with each other."""
        doc_lengths = np.diff(self.doc_ptr)
        if not np.array_equal(self.n_dk.sum(axis=1), doc_lengths):
            raise AssertionError("n_dk rows do not sum to document lengths")
        if not np.array_equal(self.n_kw.sum(axis=1), self.n_k):
            raise AssertionError("n_kw rows do not sum to n_k")
        if int(self.n_k.sum()) != int(doc_lengths.sum()):
            raise AssertionError("topic totals do not sum to token count")
        if not np.allclose(self.phi.sum(axis=1), 1.0, atol=1e-9):
            raise AssertionError("phi rows do not sum to 1")
        if not np.allclose(self.theta.sum(axis=1), 1.0, atol=1e-9):
            raise AssertionError("theta rows do not sum to 1")
        if np.any(self.alpha <= 0):
            raise AssertionError("alpha has non-positive components")


def vocabulary_hash(vocabulary: dict[str, int]) -> str:
    terms = [""] * len(vocabulary)
    for term, i in vocabulary.items():
        terms[i] = term
    digest = hashlib.sha256("\x00".join(terms).encode("utf-8"))
    return digest.hexdigest()


def estimate_phi(n_kw: np.ndarray, n_k: np.ndarray, beta: float) -> np.ndarray:
    v = n_kw.shape[1]
    return (n_kw + beta) / (n_k + v * beta)[:, None]


def estimate_theta(n_dk: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    doc_lengths = n_dk.sum(axis=1)
    return (n_dk + alpha) / (doc_lengths + alpha.sum())[:, None]


def _kernels():
    if backend_name() == "numba":
        from . import _gibbs_numba as mod

        def init(z, doc_ptr, words, n_dk, n_kw, n_k, k, doc_keys, seed):
            mod.init_assignments(
                z, doc_ptr, words, n_dk, n_kw, n_k, k, doc_keys, np.uint64(seed)
            )

        def sweep(flat, z, n_dk, n_kw, n_k, alpha, beta, seed, sweep_idx):
            mod.sweep(
                z,
                flat.doc_ptr,
                flat.words,
                flat.wcols,
                flat.dwords_ptr,
                flat.dwords,
                n_dk,
                n_kw,
                n_k,
                alpha,
                beta,
                flat.doc_keys,
                np.uint64(seed),
                np.uint64(sweep_idx),
            )

    else:
        from . import _gibbs_numpy as mod

        def init(z, doc_ptr, words, n_dk, n_kw, n_k, k, doc_keys, seed):
            mod.init_assignments(z, doc_ptr, words, n_dk, n_kw, n_k, k, doc_keys, seed)

        def sweep(flat, z, n_dk, n_kw, n_k, alpha, beta, seed, sweep_idx):
            mod.sweep(
                z,
                flat.doc_ptr,
                flat.words,
                flat.wcols,
                flat.dwords_ptr,
                flat.dwords,
                n_dk,
                n_kw,
                n_k,
                alpha,
                beta,
                flat.doc_keys,
                seed,
                sweep_idx,
            )

    return init, sweep


def fit(week: CorpusWeek, cfg: LdaConfig) -> TopicModel:
    """Train one model on one week's documents.

    Alpha starts symmetric at alpha0/k and is re-optimized every
    ``optimize_interval`` sweeps once past ``burn_in`` (0 disables
    optimization entirely).
    """
    if week.T == 0:
        raise ValueError("cannot fit an empty week")
    if week.V < cfg.k:
        raise ValueError(f"vocabulary size {week.V} smaller than topic count {cfg.k}")

    flat = flatten_week(week)
    k = cfg.k
    v = week.V
    seed = cfg.seed & MASK64

    z = np.zeros(flat.n_tokens, dtype=np.int32)
    n_dk = np.zeros((flat.n_docs, k), dtype=np.int64)
    n_kw = np.zeros((k, v), dtype=np.int64)
    n_k = np.zeros(k, dtype=np.int64)
    alpha = np.full(k, cfg.alpha0 / k, dtype=np.float64)

    init, sweep = _kernels()
    init(z, flat.doc_ptr, flat.words, n_dk, n_kw, n_k, k, flat.doc_keys, seed)
    for s in range(1, cfg.iterations + 1):
        sweep(flat, z, n_dk, n_kw, n_k, alpha, cfg.beta, seed, s)
        if (
            cfg.optimize_interval > 0
            and s > cfg.burn_in
            and (s - cfg.burn_in) % cfg.optimize_interval == 0
        ):
            alpha = minka_fixed_point(n_dk, alpha)

    return TopicModel(
        config=cfg,
        week_index=week.week_index,
        network=week.network,
        vocabulary=week.vocabulary,
        doc_ids=flat.doc_ids,
        z=z,
        doc_ptr=flat.doc_ptr,
        words=flat.words,
        n_dk=n_dk,
        n_kw=n_kw,
        n_k=n_k,
        alpha=alpha,
    )


def minka_fixed_point(
    n_dk: np.ndarray,
    alpha: np.ndarray,
    tol: float = 1e-6,
    max_iter: int = 100,
) -> np.ndarray:
    """Dirichlet-multinomial ML fixed point over the document-topic counts.

        alpha_k <- alpha_k * (sum_d psi(n_dk + alpha_k) - D psi(alpha_k))
                           / (sum_d psi(N_d + sum(alpha)) - D psi(sum(alpha)))

    iterated until max component change < tol. A non-finite intermediate
    aborts the update and returns the previous alpha unchanged.

    Rows are summed in canonical (lexicographically sorted) order so the
    result is bit-identical under document permutation.
    """
    n_dk = n_dk[np.lexsort(n_dk.T[::-1])]
    n_docs = n_dk.shape[0]
    doc_lengths = n_dk.sum(axis=1)
    alpha = alpha.astype(np.float64).copy()
    for _ in range(max_iter):
        alpha_sum = alpha.sum()
        numerator = digamma(n_dk + alpha).sum(axis=0) - n_docs * digamma(alpha)
        denominator = (
            digamma(doc_lengths + alpha_sum).sum() - n_docs * digamma(alpha_sum)
        )
        if not np.isfinite(numerator).all() or not np.isfinite(denominator):
            logger.warning("alpha update hit a non-finite intermediate; keeping previous alpha")
            return alpha
        if denominator == 0.0:
            logger.warning("alpha update denominator is zero; keeping previous alpha")
            return alpha
        new_alpha = np.maximum(alpha * numerator / denominator, ALPHA_FLOOR)
        if not np.isfinite(new_alpha).all():
            logger.warning("alpha update produced non-finite components; keeping previous alpha")
            return alpha
        delta = np.max(np.abs(new_alpha - alpha))
        alpha = new_alpha
        if delta < tol:
            break
    return alpha


def optimize_alpha(model: TopicModel, tol: float = 1e-6, max_iter: int = 100) -> np.ndarray:
    """Re-run the alpha fixed point on a fitted model's counts."""
    return minka_fixed_point(model.n_dk, model.alpha, tol=tol, max_iter=max_iter)


def collapsed_conditional(
    n_dk: np.ndarray,
    n_kw: np.ndarray,
    n_k: np.ndarray,
    alpha: np.ndarray,
    beta: float,
    d: int,
    w: int,
    current_topic: int,
) -> np.ndarray:
    """Normalized sampling distribution for one token given all others.

    The token's current assignment is removed from the counts before
    evaluating p(k) ~ (n_dk + alpha_k)(n_kw + beta)/(n_k + V beta).
    """
    v = n_kw.shape[1]
    dk = n_dk[d].astype(np.float64).copy()
    kw = n_kw[:, w].astype(np.float64).copy()
    nk = n_k.astype(np.float64).copy()
    dk[current_topic] -= 1
    kw[current_topic] -= 1
    nk[current_topic] -= 1
    weights = (dk + alpha) * (kw + beta) / (nk + v * beta)
    return weights / weights.sum()


def log_likelihood(model: TopicModel) -> float:
    """Collapsed joint log p(words | z, beta) + log p(z | alpha)."""
    return words_log_likelihood(
        model.n_kw, model.n_k, model.config.beta
    ) + assignments_log_likelihood(model.n_dk, model.alpha)


def words_log_likelihood(n_kw: np.ndarray, n_k: np.ndarray, beta: float) -> float:
    k, v = n_kw.shape
    value = k * (gammaln(v * beta) - v * gammaln(beta))
    value += gammaln(n_kw + beta).sum()
    value -= gammaln(n_k + v * beta).sum()
    return float(value)


def assignments_log_likelihood(n_dk: np.ndarray, alpha: np.ndarray) -> float:
    n_docs = n_dk.shape[0]
    alpha_sum = alpha.sum()
    doc_lengths = n_dk.sum(axis=1)
    value = n_docs * (gammaln(alpha_sum) - gammaln(alpha).sum())
    value += gammaln(n_dk + alpha).sum()
    value -= gammaln(doc_lengths + alpha_sum).sum()
    return float(value)


def save_model(model: TopicModel, path) -> None:
    meta = {
        "version": MODEL_VERSION,
        "config": model.config.to_dict(),
        "week_index": model.week_index,
        "network": model.network,
        "vocab_hash": model.vocab_hash(),
        "terms": model.terms,
        "doc_ids": list(model.doc_ids),
    }
    with open(path, "wb") as fh:
        np.savez_compressed(
            fh,
            meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8),
            z=model.z,
            doc_ptr=model.doc_ptr,
            words=model.words,
            n_dk=model.n_dk,
            n_kw=model.n_kw,
            n_k=model.n_k,
            alpha=model.alpha,
            phi=model.phi,
            theta=model.theta,
        )


def load_model(path, expected_vocab_hash: str | None = None) -> TopicModel:
    with np.load(path) as payload:
        meta = json.loads(bytes(payload["meta"]).decode("utf-8"))
        if meta.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model snapshot version {meta.get('version')!r}")
        vocabulary = {term: i for i, term in enumerate(meta["terms"])}
        if expected_vocab_hash is not None:
            actual = vocabulary_hash(vocabulary)
            if actual != expected_vocab_hash:
                raise ValueError(
                    f"vocabulary hash mismatch: snapshot {actual}, expected {expected_vocab_hash}"
                )
        model = TopicModel(
            config=LdaConfig.from_dict(meta["config"]),
            week_index=meta["week_index"],
            network=meta["network"],
            vocabulary=vocabulary,
            doc_ids=tuple(meta["doc_ids"]),
            z=payload["z"],
            doc_ptr=payload["doc_ptr"],
            words=payload["words"],
            n_dk=payload["n_dk"],
            n_kw=payload["n_kw"],
            n_k=payload["n_k"],
            alpha=payload["alpha"],
        )
    return model
