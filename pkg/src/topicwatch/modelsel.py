"""Coherence-driven choice of the topic count.

A sweep fits one model per (k, optimize_interval, seed) combination and
records mean C_v coherence. The selection rule encodes the shared-peak
heuristic: prefer the smallest k that is a local coherence maximum for
enough optimize_interval settings and lies within a tolerance of the
global maximum; otherwise fall back to the global argmax.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .coherence import CoherenceConfig, cv_coherence
from .corpus import CorpusWeek
from .lda.model import LdaConfig, TopicModel, fit


@dataclass(frozen=True)
class SweepResult:
    week_index: int
    network: str
    k: int
    optimize_interval: int
    seed: int
    coherence: float
    per_topic: dict[int, float]
    runtime_seconds: float
    model_path: str | None = None
    error: str | None = None

    def key(self) -> tuple:
        return (self.week_index, self.network, self.k, self.optimize_interval, self.seed)

    def to_json(self) -> str:
        """Persisted form; wall-clock runtime is deliberately left out so
        result files are byte-deterministic and resume-stable."""
        payload = dataclasses.asdict(self)
        payload.pop("runtime_seconds")
        if payload["coherence"] != payload["coherence"]:
            payload["coherence"] = None
        payload["per_topic"] = {str(t): v for t, v in self.per_topic.items()}
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "SweepResult":
        payload = json.loads(line)
        payload.setdefault("runtime_seconds", 0.0)
        if payload.get("coherence") is None:
            payload["coherence"] = float("nan")
        payload["per_topic"] = {int(t): v for t, v in payload["per_topic"].items()}
        return cls(**payload)


@dataclass(frozen=True)
class SelectionRule:
    epsilon_fraction: float = 0.02
    min_shared: int = 3
    prefer_small_k: bool = True

    def __post_init__(self) -> None:
        if self.epsilon_fraction < 0:
            raise ValueError("epsilon_fraction must be >= 0")
        if self.min_shared < 1:
            raise ValueError("min_shared must be >= 1")


@dataclass(frozen=True)
class Selection:
    k: int
    audit: list[str]
    shared_peaks: tuple[int, ...]
    global_argmax: int


def sweep(
    week: CorpusWeek,
    ks: Sequence[int],
    intervals: Sequence[int],
    seeds: Sequence[int],
    base_cfg: LdaConfig,
    coherence_cfg: CoherenceConfig | None = None,
    results_path: str | Path | None = None,
    on_model: Callable[[TopicModel, SweepResult], str | None] | None = None,
) -> list[SweepResult]:
    """Fit and score every (k, optimize_interval, seed) combination.

    Results are appended to ``results_path`` (JSONL) as they complete, and
    combinations already present there are skipped, which makes an
    interrupted sweep resumable with an identical final result set.
    Individual fit failures are recorded and do not stop the sweep.
    """
    if not ks or not intervals or not seeds:
        raise ValueError("ks, intervals and seeds must all be non-empty")
    coherence_cfg = coherence_cfg or CoherenceConfig()

    done: dict[tuple, SweepResult] = {}
    if results_path is not None:
        results_path = Path(results_path)
        results_path.parent.mkdir(parents=True, exist_ok=True)
        if results_path.exists():
            with open(results_path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        result = SweepResult.from_json(line)
                        done[result.key()] = result

    docs = [doc.lemmas() for doc in week.documents]
    results: list[SweepResult] = []
    for k in ks:
        for interval in intervals:
            for seed in seeds:
                key = (week.week_index, week.network, k, interval, seed)
                if key in done:
                    results.append(done[key])
                    continue
                result = _run_cell(week, docs, k, interval, seed, base_cfg, coherence_cfg, on_model)
                results.append(result)
                if results_path is not None:
                    with open(results_path, "a", encoding="utf-8") as fh:
                        fh.write(result.to_json() + "\n")
    return results


def _run_cell(week, docs, k, interval, seed, base_cfg, coherence_cfg, on_model):
    cfg = replace(base_cfg, k=k, optimize_interval=interval, seed=seed)
    started = time.perf_counter()
    try:
        model = fit(week, cfg)
        scores = cv_coherence(model, docs, coherence_cfg)
        model_path = on_model(model, None) if on_model else None
        return SweepResult(
            week_index=week.week_index,
            network=week.network,
            k=k,
            optimize_interval=interval,
            seed=seed,
            coherence=scores.mean,
            per_topic=dict(scores.per_topic),
            runtime_seconds=time.perf_counter() - started,
            model_path=model_path,
        )
    except Exception as exc:  # recorded, sweep continues
        return SweepResult(
            week_index=week.week_index,
            network=week.network,
            k=k,
            optimize_interval=interval,
            seed=seed,
            coherence=float("nan"),
            per_topic={},
            runtime_seconds=time.perf_counter() - started,
            error=f"{type(exc).__name__}: {exc}",
        )


def _local_maxima(curve: dict[int, float]) -> set[int]:
    """k values strictly greater than both grid neighbours (endpoints
    compare to their single neighbour)."""
    ks = sorted(curve)
    if len(ks) == 1:
        return {ks[0]}
    maxima = set()
    for i, k in enumerate(ks):
        left_ok = i == 0 or curve[k] > curve[ks[i - 1]]
        right_ok = i == len(ks) - 1 or curve[k] > curve[ks[i + 1]]
        if left_ok and right_ok:
            maxima.add(k)
    return maxima


def select_k(results: Iterable[SweepResult], rule: SelectionRule) -> Selection:
    """Pick the operating k from a sweep's coherence table.

    Per interval, coherence is averaged over seeds per k; a shared peak is
    a k that is a local maximum on at least min_shared interval curves
    (capped at the number of intervals present) and whose mean coherence is
    within epsilon of the global maximum. The smallest shared peak wins
    (or the best-coherence one when prefer_small_k is off); with no shared
    peak the global argmax wins. The audit trail records every candidate.
    """
    table: dict[int, dict[int, list[float]]] = {}
    for r in results:
        if r.error is not None or r.coherence != r.coherence:  # NaN-safe
            continue
        table.setdefault(r.optimize_interval, {}).setdefault(r.k, []).append(r.coherence)
    if not table:
        raise ValueError("no usable sweep results")

    curves = {
        interval: {k: sum(vals) / len(vals) for k, vals in per_k.items()}
        for interval, per_k in table.items()
    }
    all_ks = sorted({k for curve in curves.values() for k in curve})
    mean_curve = {
        k: sum(curve[k] for curve in curves.values() if k in curve)
        / sum(1 for curve in curves.values() if k in curve)
        for k in all_ks
    }
    global_max_value = max(mean_curve.values())
    global_argmax = min(k for k, v in mean_curve.items() if v == global_max_value)
    epsilon = rule.epsilon_fraction * global_max_value

    peak_counts: dict[int, int] = {k: 0 for k in all_ks}
    for interval, curve in sorted(curves.items()):
        for k in _local_maxima(curve):
            peak_counts[k] += 1

    needed = min(rule.min_shared, len(curves))
    audit = [
        f"intervals={sorted(curves)} ks={all_ks}",
        f"global argmax k={global_argmax} mean coherence={global_max_value:.6f}",
        f"epsilon={epsilon:.6f} (fraction {rule.epsilon_fraction}) shared-peak quorum={needed}",
    ]
    shared: list[int] = []
    for k in all_ks:
        near = mean_curve[k] >= global_max_value - epsilon
        is_shared = peak_counts[k] >= needed and near
        audit.append(
            f"k={k}: mean={mean_curve[k]:.6f} local-max on {peak_counts[k]}/{len(curves)} intervals, "
            f"within epsilon={near} -> {'shared peak' if is_shared else 'rejected'}"
        )
        if is_shared:
            shared.append(k)

    if shared:
        if rule.prefer_small_k:
            chosen = shared[0]
            audit.append(f"chose smallest shared peak k={chosen}")
        else:
            chosen = max(shared, key=lambda k: (mean_curve[k], -k))
            audit.append(f"chose best-coherence shared peak k={chosen}")
    else:
        chosen = global_argmax
        audit.append(f"no shared peak; fell back to global argmax k={chosen}")
    return Selection(
        k=chosen,
        audit=audit,
        shared_peaks=tuple(shared),
        global_argmax=global_argmax,
    )
