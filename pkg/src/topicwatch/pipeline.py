"""Staged pipeline over an immutable run directory.

Each stage reads the artifacts of its declared upstream stages through the
run's :class:`ArtifactStore`, writes its own artifacts, and records their
content hashes in the manifest. A stage is skipped when its signature
(relevant config sections + upstream artifact hashes + external file
hashes) matches the manifest and its outputs still hash-check, which makes
reruns idempotent and interrupted runs resumable.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from .config import PipelineConfig
from .dynamics import (
    WeekAssignments,
    build_activity_matrix,
    dispersion_groups,
    normalize_activity,
    topic_timeseries,
)
from .graphs import (
    CLUSTER_ALL,
    CLUSTER_MAIN,
    CLUSTER_PEAK,
    build_graph,
    graph_to_document,
    select_cluster_accounts,
    serialize_document,
    topic_key_map,
)
from .kmeans import elbow, kmeans
from .lda.model import TopicModel, fit as fit_lda, load_model, log_likelihood, save_model
from .modelsel import SweepResult, select_k, sweep as run_sweep
from .topics import (
    MatchRecord,
    RelevanceRanking,
    UniqueTopic,
    UniqueTopicSet,
    assign_themes,
    build_unique_set,
    load_theme_map,
    rank_relevance,
    suggest_themes,
    topic_instances,
)

logger = logging.getLogger(__name__)

PIPELINE_VERSION = 1
MANIFEST_NAME = "manifest.json"

CLUSTER_SELECTORS = (CLUSTER_ALL, CLUSTER_MAIN, CLUSTER_PEAK)


class StageError(RuntimeError):
    pass


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class ArtifactStore:
    """Hashed read/write access to one run directory.

    Reads are logged so tests can verify that a stage touches only its
    declared upstream artifacts.
    """

    def __init__(self, root: Path):
        self.root = Path(root)
        self.reads: list[str] = []
        self._writes: dict[str, str] = {}

    def path(self, rel: str) -> Path:
        return self.root / rel

    def exists(self, rel: str) -> bool:
        return self.path(rel).exists()

    def begin_capture(self) -> None:
        self._writes = {}

    def end_capture(self) -> dict[str, str]:
        writes, self._writes = self._writes, {}
        return writes

    def write_bytes(self, rel: str, data: bytes) -> str:
        path = self.path(rel)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        digest = sha256_bytes(data)
        self._writes[rel] = digest
        return digest

    def register_file(self, rel: str) -> str:
        """Record an artifact written directly to ``path(rel)``."""
        digest = sha256_file(self.path(rel))
        self._writes[rel] = digest
        return digest

    def write_text(self, rel: str, text: str) -> str:
        return self.write_bytes(rel, text.encode("utf-8"))

    def write_json(self, rel: str, payload, sort_keys: bool = True) -> str:
        text = json.dumps(payload, sort_keys=sort_keys, ensure_ascii=False, indent=2) + "\n"
        return self.write_text(rel, text)

    def read_bytes(self, rel: str) -> bytes:
        self.reads.append(rel)
        return self.path(rel).read_bytes()

    def read_text(self, rel: str) -> str:
        return self.read_bytes(rel).decode("utf-8")

    def read_json(self, rel: str):
        return json.loads(self.read_text(rel))

    def hash_of(self, rel: str) -> str:
        return sha256_file(self.path(rel))


@dataclass(frozen=True)
class Stage:
    name: str
    deps: tuple[str, ...]
    sections: tuple[str, ...]


STAGES = (
    Stage("ingest", (), ("input",)),
    Stage("preprocess", ("ingest",), ("preprocess", "weeks", "networks")),
    Stage("sweep", ("preprocess",), ("sweep", "lda", "coherence", "selection")),
    Stage("fit", ("preprocess", "sweep"), ("lda", "sweep")),
    Stage("rank", ("preprocess", "fit"), ("relevance",)),
    Stage("match", ("preprocess", "fit", "rank"), ("matching",)),
    Stage("themes", ("match",), ("themes",)),
    Stage("cluster", ("preprocess",), ("clustering",)),
    Stage("dynamics", ("preprocess", "fit", "rank", "match", "themes"), ()),
    Stage(
        "graphs",
        ("preprocess", "fit", "rank", "match", "themes", "cluster"),
        ("graphs", "dispersion"),
    ),
    Stage("report", ("preprocess", "fit", "rank", "match", "themes"), ("graphs",)),
)

STAGE_MAP = {s.name: s for s in STAGES}
STAGE_ORDER = tuple(s.name for s in STAGES)


class PipelineRun:
    """One config-addressed run directory and its stage machinery."""

    def __init__(self, config: PipelineConfig, runs_dir: Path | str):
        self.config = config
        self.run_dir = Path(runs_dir) / config.config_hash()
        self.store = ArtifactStore(self.run_dir)
        self.run_dir.mkdir(parents=True, exist_ok=True)
        config_snapshot = self.run_dir / "config.json"
        if not config_snapshot.exists():
            config_snapshot.write_text(
                json.dumps(config.raw, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
                encoding="utf-8",
            )
        self.manifest = self._load_manifest()

    # -- manifest -----------------------------------------------------

    def _load_manifest(self) -> dict:
        path = self.run_dir / MANIFEST_NAME
        if path.exists():
            return json.loads(path.read_text(encoding="utf-8"))
        return {
            "version": PIPELINE_VERSION,
            "run_id": self.config.config_hash(),
            "stages": {},
        }

    def _save_manifest(self) -> None:
        path = self.run_dir / MANIFEST_NAME
        path.write_text(
            json.dumps(self.manifest, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )

    def stage_outputs(self, name: str) -> dict[str, str]:
        entry = self.manifest["stages"].get(name)
        return dict(entry["outputs"]) if entry else {}

    def _external_files(self, stage: Stage) -> list[str]:
        if stage.name == "ingest":
            return [self.config.input_path]
        if stage.name == "themes" and self.config.theme_map_path:
            return [self.config.theme_map_path]
        return []

    def _signature(self, stage: Stage) -> str:
        externals = {}
        for path in self._external_files(stage):
            p = Path(path)
            externals[path] = sha256_file(p) if p.exists() else None
        payload = {
            "config": {sec: self.config.raw.get(sec) for sec in stage.sections},
            "upstream": {dep: self.stage_outputs(dep) for dep in stage.deps},
            "externals": externals,
        }
        return sha256_bytes(json.dumps(payload, sort_keys=True).encode("utf-8"))

    def _outputs_intact(self, entry: dict) -> bool:
        for rel, digest in entry["outputs"].items():
            path = self.store.path(rel)
            if not path.exists() or sha256_file(path) != digest:
                return False
        return True

    def run_stage(self, name: str, force: bool = False) -> str:
        """Run one stage; returns "ran" or "skipped"."""
        if name not in STAGE_MAP:
            raise StageError(f"unknown stage {name!r}; stages: {', '.join(STAGE_ORDER)}")
        stage = STAGE_MAP[name]
        for dep in stage.deps:
            if dep == "sweep" and not self.config.sweep.enabled:
                continue
            entry = self.manifest["stages"].get(dep)
            if entry is None or not self._outputs_intact(entry):
                raise StageError(
                    f"stage {name!r} needs artifacts from {dep!r}; "
                    f"run `topicwatch {dep}` first"
                )
        signature = self._signature(stage)
        entry = self.manifest["stages"].get(name)
        if not force and entry and entry["signature"] == signature and self._outputs_intact(entry):
            logger.info("stage %s up to date; skipping", name)
            return "skipped"
        if name == "sweep" and not self.config.sweep.enabled:
            self.manifest["stages"][name] = {"signature": signature, "outputs": {}}
            self._save_manifest()
            logger.info("stage sweep disabled by config; recorded as empty")
            return "ran"
        self.store.begin_capture()
        getattr(self, f"_stage_{name}")()
        outputs = self.store.end_capture()
        self.manifest["stages"][name] = {"signature": signature, "outputs": outputs}
        self._save_manifest()
        logger.info("stage %s wrote %d artifacts", name, len(outputs))
        return "ran"

    def run_all(self, force: bool = False) -> dict[str, str]:
        return {name: self.run_stage(name, force=force) for name in STAGE_ORDER}

    # -- shared loaders -----------------------------------------------

    def _week_key(self, week_index: int, network: str) -> str:
        return f"week{week_index:02d}_{network}"

    def load_weeks(self) -> list[corpus_mod.CorpusWeek]:
        index = self.store.read_json("corpus/index.json")
        return [
            corpus_mod.week_from_dict(self.store.read_json(f"corpus/{key}.json"))
            for key in index["weeks"]
        ]

    def load_model_for(self, week_index: int, network: str) -> TopicModel:
        rel = f"models/{self._week_key(week_index, network)}.npz"
        self.store.reads.append(rel)
        return load_model(self.store.path(rel))

    def load_rankings_for(self, week_index: int, network: str) -> list[RelevanceRanking]:
        payload = self.store.read_json(
            f"rankings/{self._week_key(week_index, network)}.json"
        )
        return [
            RelevanceRanking(
                lam=payload["lambda"],
                top_m=payload["top_m"],
                terms=tuple(t["terms"]),
                scores=tuple(t["scores"]),
            )
            for t in payload["topics"]
        ]

    def load_unique_set(self, network: str) -> UniqueTopicSet:
        payload = self.store.read_json(f"unique_sets/{network}.json")
        result = UniqueTopicSet(
            network=payload["network"],
            threshold=payload["threshold"],
            top_m=payload["top_m"],
        )
        for e in payload["entries"]:
            result.entries.append(
                UniqueTopic(
                    unique_id=e["unique_id"],
                    founder_week=e["founder_week"],
                    founder_topic=e["founder_topic"],
                    terms_ordered=tuple(e["terms"]),
                )
            )
        for r in payload["match_records"]:
            result.match_records.append(
                MatchRecord(
                    week_index=r["week_index"],
                    network=payload["network"],
                    topic_id=r["topic_id"],
                    unique_id=r["unique_id"],
                    intersection=r["intersection"],
                    ratio=r["ratio"],
                    attributed=r["attributed"],
                    founded=r.get("founded", False),
                )
            )
        return result

    def load_theme_assignment(self) -> dict[str, str]:
        payload = self.store.read_json("themes/assignment.json")
        return dict(payload["assignment"])

    def load_week_assignments(self, week: corpus_mod.CorpusWeek) -> WeekAssignments:
        model = self.load_model_for(week.week_index, week.network)
        rankings = self.load_rankings_for(week.week_index, week.network)
        return WeekAssignments.from_model(model, rankings, week)

    def n_weeks(self) -> int:
        return len(self.config.boundaries) - 1

    # -- stages ---------------------------------------------------------

    def _stage_ingest(self) -> None:
        cfg = self.config
        result = corpus_mod.ingest(cfg.input_path, cfg.preprocess)
        known = set(cfg.networks)
        lines = []
        skipped_networks = 0
        for doc in result.documents:
            if doc.network not in known:
                skipped_networks += 1
                continue
            record = {
                "id": doc.id,
                "author_id": doc.author_id,
                "network": doc.network,
                "timestamp": doc.timestamp.isoformat(),
                "text": doc.raw_text,
            }
            if doc.tokens:
                record["lemmas"] = [t.lemma for t in doc.tokens]
                record["pos"] = [t.pos for t in doc.tokens]
            if doc.lang is not None:
                record["lang"] = list(doc.lang) if isinstance(doc.lang, tuple) else doc.lang
            lines.append(json.dumps(record, sort_keys=True, ensure_ascii=False))
        self.store.write_text("ingested/documents.jsonl", "\n".join(lines) + "\n")
        self.store.write_json(
            "ingested/errors.json",
            {
                "version": PIPELINE_VERSION,
                "errors": [{"line": e.line_no, "message": e.message} for e in result.errors],
                "skipped_unknown_network": skipped_networks,
                "accepted": len(lines),
            },
        )

    def _stage_preprocess(self) -> None:
        cfg = self.config
        docs = []
        for line in self.store.read_text("ingested/documents.jsonl").splitlines():
            if line.strip():
                docs.append(corpus_mod.record_to_document(json.loads(line)))

        normalized = []
        dropped = {"empty": 0, "failed": 0}
        for doc in docs:
            doc = corpus_mod.normalize(doc, cfg.preprocess)
            if doc.status == corpus_mod.DOC_OK:
                normalized.append(doc)
            else:
                dropped[doc.status] = dropped.get(doc.status, 0) + 1

        partition = corpus_mod.partition_weeks(normalized, list(cfg.boundaries))
        by_network: dict[str, list[corpus_mod.CorpusWeek]] = {}
        for week in partition.weeks:
            by_network.setdefault(week.network, []).append(week)

        report: dict = {
            "version": PIPELINE_VERSION,
            "normalized": len(normalized),
            "dropped": dropped,
            "out_of_range": partition.out_of_range,
            "networks": {},
        }
        index = []
        for network in self.config.networks:
            weeks = by_network.get(network, [])
            if not weeks:
                report["networks"][network] = {"weeks": 0}
                continue
            tables = [corpus_mod.term_frequencies(w) for w in weeks]
            outliers = corpus_mod.detect_persistent_outliers(tables, cfg.preprocess)
            cleaned = [corpus_mod.drop_terms(w, outliers) for w in weeks]
            pruned = []
            prune_stats = {}
            for week in cleaned:
                result = corpus_mod.prune_lengths(week, cfg.preprocess)
                pruned.append(result.week)
                prune_stats[str(week.week_index)] = {
                    "bounds": list(result.bounds),
                    "removed": result.removed,
                }
            report["networks"][network] = {
                "weeks": len(pruned),
                "persistent_outliers": sorted(outliers),
                "prune": prune_stats,
                "documents": {str(w.week_index): w.T for w in pruned},
            }
            for week in pruned:
                key = self._week_key(week.week_index, week.network)
                self.store.write_json(f"corpus/{key}.json", corpus_mod.week_to_dict(week))
                index.append(key)
        if not index:
            raise StageError("preprocessing left no (week, network) subsets")
        self.store.write_json("corpus/index.json", {"version": PIPELINE_VERSION, "weeks": sorted(index)})
        self.store.write_json("preprocess/report.json", report)

    def _stage_sweep(self) -> None:
        cfg = self.config
        weeks = self.load_weeks()
        ks = list(range(cfg.sweep.k_min, cfg.sweep.k_max + 1))
        by_network: dict[str, list[corpus_mod.CorpusWeek]] = {}
        for week in weeks:
            by_network.setdefault(week.network, []).append(week)
        for network, net_weeks in sorted(by_network.items()):
            net_weeks.sort(key=lambda w: w.week_index)
            targets = net_weeks if cfg.sweep.per_week else net_weeks[:1]
            selections = {}
            results_rel = f"sweep/results_{network}.jsonl"
            for week in targets:
                usable_ks = [k for k in ks if k <= week.V]
                results = run_sweep(
                    week,
                    usable_ks,
                    list(cfg.sweep.intervals),
                    list(cfg.sweep.seeds),
                    cfg.lda,
                    cfg.coherence,
                    results_path=self.store.path(results_rel),
                )
                selection = select_k(results, cfg.selection)
                selections[str(week.week_index)] = {
                    "k": selection.k,
                    "global_argmax": selection.global_argmax,
                    "shared_peaks": list(selection.shared_peaks),
                    "audit": selection.audit,
                }
            # the results file is written incrementally by run_sweep
            self.store.register_file(results_rel)
            self.store.write_json(
                f"sweep/selection_{network}.json",
                {
                    "version": PIPELINE_VERSION,
                    "network": network,
                    "per_week": cfg.sweep.per_week,
                    "selections": selections,
                },
            )
            all_results = [
                SweepResult.from_json(line)
                for line in self.store.path(results_rel).read_text().splitlines()
                if line.strip()
            ]
            tsv = [
                f"# topicwatch coherence sweep v{PIPELINE_VERSION}",
                "week\tnetwork\tk\toptimize_interval\tseed\tmean_coherence\tper_topic",
            ]
            for r in sorted(all_results, key=lambda r: r.key()):
                per_topic = ",".join(f"{t}:{v:.6f}" for t, v in sorted(r.per_topic.items()))
                mean = "" if r.coherence != r.coherence else f"{r.coherence:.6f}"
                tsv.append(
                    f"{r.week_index}\t{r.network}\t{r.k}\t{r.optimize_interval}"
                    f"\t{r.seed}\t{mean}\t{per_topic}"
                )
            self.store.write_text(f"sweep/results_{network}.tsv", "\n".join(tsv) + "\n")
            audit_lines = [f"# topicwatch selection audit v{PIPELINE_VERSION}"]
            for week_index, entry in sorted(selections.items(), key=lambda kv: int(kv[0])):
                audit_lines.append(f"== week {week_index}: chose k={entry['k']} ==")
                audit_lines.extend(entry["audit"])
            self.store.write_text(
                f"sweep/selection_{network}.txt", "\n".join(audit_lines) + "\n"
            )

    def _chosen_k(self, network: str, week_index: int) -> int:
        if not self.config.sweep.enabled:
            return self.config.lda.k
        payload = self.store.read_json(f"sweep/selection_{network}.json")
        selections = payload["selections"]
        if payload["per_week"]:
            entry = selections.get(str(week_index))
            if entry is None:
                raise StageError(
                    f"no sweep selection for week {week_index} ({network}); rerun sweep"
                )
            return entry["k"]
        first = sorted(selections, key=int)[0]
        return selections[first]["k"]

    def _stage_fit(self) -> None:
        summary = {}
        for week in self.load_weeks():
            k = self._chosen_k(week.network, week.week_index)
            cfg = replace(self.config.lda, k=min(k, week.V))
            model = fit_lda(week, cfg)
            key = self._week_key(week.week_index, week.network)
            rel = f"models/{key}.npz"
            path = self.store.path(rel)
            path.parent.mkdir(parents=True, exist_ok=True)
            save_model(model, path)
            self.store.register_file(rel)
            summary[key] = {
                "k": cfg.k,
                "alpha": [float(a) for a in model.alpha],
                "log_likelihood": log_likelihood(model),
                "vocab_hash": model.vocab_hash(),
                "documents": len(model.doc_ids),
            }
        self.store.write_json(
            "models/summary.json", {"version": PIPELINE_VERSION, "models": summary}
        )

    def _stage_rank(self) -> None:
        for week in self.load_weeks():
            model = self.load_model_for(week.week_index, week.network)
            rankings = rank_relevance(
                model, lam=self.config.relevance.lam, top_m=self.config.relevance.top_m
            )
            key = self._week_key(week.week_index, week.network)
            self.store.write_json(
                f"rankings/{key}.json",
                {
                    "version": PIPELINE_VERSION,
                    "week": week.week_index,
                    "network": week.network,
                    "lambda": self.config.relevance.lam,
                    "top_m": self.config.relevance.top_m,
                    "topics": [
                        {
                            "topic": t,
                            "terms": list(r.terms),
                            "scores": [float(s) for s in r.scores],
                        }
                        for t, r in enumerate(rankings)
                    ],
                },
                sort_keys=False,
            )

    def _stage_match(self) -> None:
        weeks = self.load_weeks()
        by_network: dict[str, list[corpus_mod.CorpusWeek]] = {}
        for week in weeks:
            by_network.setdefault(week.network, []).append(week)
        for network, net_weeks in sorted(by_network.items()):
            net_weeks.sort(key=lambda w: w.week_index)
            instance_lists = []
            for week in net_weeks:
                model = self.load_model_for(week.week_index, week.network)
                rankings = self.load_rankings_for(week.week_index, week.network)
                instance_lists.append(topic_instances(model, rankings))
            unique_set = build_unique_set(
                instance_lists,
                threshold=self.config.matching.threshold,
                top_m=self.config.relevance.top_m,
            )
            self.store.write_json(
                f"unique_sets/{network}.json",
                {
                    "version": PIPELINE_VERSION,
                    "network": network,
                    "threshold": unique_set.threshold,
                    "top_m": unique_set.top_m,
                    "entries": [
                        {
                            "unique_id": e.unique_id,
                            "founder_week": e.founder_week,
                            "founder_topic": e.founder_topic,
                            "terms": list(e.terms_ordered),
                        }
                        for e in unique_set.entries
                    ],
                    "match_records": [
                        {
                            "week_index": r.week_index,
                            "topic_id": r.topic_id,
                            "unique_id": r.unique_id,
                            "intersection": r.intersection,
                            "ratio": r.ratio,
                            "attributed": r.attributed,
                            "founded": r.founded,
                        }
                        for r in unique_set.match_records
                    ],
                },
                sort_keys=False,
            )
            matches_tsv = [
                f"# topicwatch topic matches v{PIPELINE_VERSION}",
                "week\ttopic\tunique_id\tintersection\tratio\tattributed\tfounded",
            ]
            for r in unique_set.match_records:
                matches_tsv.append(
                    f"{r.week_index}\t{r.topic_id}\t{r.unique_id}\t{r.intersection}"
                    f"\t{r.ratio:.6f}\t{int(r.attributed)}\t{int(r.founded)}"
                )
            self.store.write_text(
                f"unique_sets/{network}_matches.tsv", "\n".join(matches_tsv) + "\n"
            )

    def _stage_themes(self) -> None:
        assignment: dict[str, str] = {}
        suggestions = []
        theme_names: list[str] = []
        for network in self.config.networks:
            rel = f"unique_sets/{network}.json"
            if not self.store.exists(rel):
                continue
            unique_set = self.load_unique_set(network)
            if self.config.theme_map_path:
                theme_map = load_theme_map(self.config.theme_map_path)
                theme_names = theme_map.names()
                assignment.update(assign_themes(unique_set, theme_map))
                for s in suggest_themes(unique_set, theme_map):
                    suggestions.append(
                        {"unique_id": s.unique_id, "ranked": [list(r) for r in s.ranked]}
                    )
            else:
                for uid in unique_set.ids():
                    assignment[uid] = uid  # no map: every unique topic is its own theme
        themes = sorted(set(assignment.values()))
        self.store.write_json(
            "themes/assignment.json",
            {
                "version": PIPELINE_VERSION,
                "themes": themes,
                "map_themes": theme_names,
                "assignment": assignment,
            },
        )
        self.store.write_json(
            "themes/suggestions.json",
            {"version": PIPELINE_VERSION, "suggestions": suggestions},
        )
        for network in self.config.networks:
            rel = f"unique_sets/{network}.json"
            if not self.store.exists(rel):
                continue
            unique_set = self.load_unique_set(network)
            tsv = [
                f"# topicwatch topics v{PIPELINE_VERSION}",
                "unique_id\ttheme\tfounder_week\tfounder_topic\tterms",
            ]
            for entry in unique_set.entries:
                tsv.append(
                    f"{entry.unique_id}\t{assignment.get(entry.unique_id, '')}"
                    f"\t{entry.founder_week}\t{entry.founder_topic}"
                    f"\t{' '.join(entry.terms_ordered)}"
                )
            self.store.write_text(f"themes/topics_{network}.tsv", "\n".join(tsv) + "\n")

    def _stage_cluster(self) -> None:
        cfg = self.config
        weeks = self.load_weeks()
        by_network: dict[str, list[corpus_mod.CorpusWeek]] = {}
        for week in weeks:
            by_network.setdefault(week.network, []).append(week)
        all_week_indices = list(range(1, self.n_weeks() + 1))
        for network, net_weeks in sorted(by_network.items()):
            assignments = [
                WeekAssignments(
                    week_index=w.week_index,
                    network=network,
                    doc_authors={d.id: d.author_id for d in w.documents},
                    prevalent={},
                    doc_terms={},
                    rankings=(),
                )
                for w in net_weeks
            ]
            matrix = build_activity_matrix(assignments, week_indices=all_week_indices)
            normalized = normalize_activity(matrix)
            result_by_k = elbow(
                normalized.matrix,
                k_range=(cfg.clustering.k_min, cfg.clustering.k_max),
                seeds=cfg.clustering.seeds,
            )
            chosen_k = cfg.clustering.k or result_by_k.suggested_k
            chosen = result_by_k.results.get(chosen_k) or kmeans(
                normalized.matrix, chosen_k, seeds=cfg.clustering.seeds
            )
            sizes = chosen.cluster_sizes()
            self.store.write_json(
                f"clusters/{network}.json",
                {
                    "version": PIPELINE_VERSION,
                    "network": network,
                    "week_indices": all_week_indices,
                    "accounts": list(normalized.accounts),
                    "assignments": [int(a) for a in chosen.assignments],
                    "centroids": [[float(x) for x in row] for row in chosen.centroids],
                    "wcss": chosen.wcss,
                    "wcss_curve": {str(k): v for k, v in sorted(result_by_k.curve.items())},
                    "suggested_k": result_by_k.suggested_k,
                    "chosen_k": chosen_k,
                    "seeds": list(cfg.clustering.seeds),
                    "cluster_shares": [
                        float(s) / len(normalized.accounts) for s in sizes
                    ],
                },
                sort_keys=False,
            )
            assignments_tsv = [
                f"# topicwatch activity clusters v{PIPELINE_VERSION}",
                "account\tcluster",
            ]
            for account, label in zip(normalized.accounts, chosen.assignments):
                assignments_tsv.append(f"{account}\t{int(label)}")
            self.store.write_text(
                f"clusters/{network}_assignments.tsv", "\n".join(assignments_tsv) + "\n"
            )
            wcss_tsv = [f"# topicwatch wcss curve v{PIPELINE_VERSION}", "k\twcss"]
            for k, value in sorted(result_by_k.curve.items()):
                wcss_tsv.append(f"{k}\t{value:.6f}")
            self.store.write_text(
                f"clusters/{network}_wcss.tsv", "\n".join(wcss_tsv) + "\n"
            )

    def _stage_dynamics(self) -> None:
        weeks = self.load_weeks()
        themes = self.load_theme_assignment()
        by_network: dict[str, list[corpus_mod.CorpusWeek]] = {}
        for week in weeks:
            by_network.setdefault(week.network, []).append(week)
        all_series = []
        tsv_rows = []
        for network, net_weeks in sorted(by_network.items()):
            unique_set = self.load_unique_set(network)
            assignments = [self.load_week_assignments(w) for w in net_weeks]
            series = topic_timeseries(unique_set, assignments)
            for uid in unique_set.ids():
                ts = series[uid]
                payload = {
                    "version": PIPELINE_VERSION,
                    "unique_id": uid,
                    "network": network,
                    "theme": themes.get(uid),
                    "points": {
                        str(w): _indicators_to_dict(p) for w, p in sorted(ts.points.items())
                    },
                }
                all_series.append(payload)
                self.store.write_json(f"timeseries/by_topic/{uid}.json", payload, sort_keys=False)
                for w, p in sorted(ts.points.items()):
                    tsv_rows.append(
                        "\t".join(
                            [
                                network,
                                uid,
                                themes.get(uid, ""),
                                str(w),
                                f"{p.median_intersection_relevance:.6f}",
                                f"{p.text_ratio:.6f}",
                                f"{p.contributor_ratio:.6f}",
                                f"{p.onetopic_share_of_topic:.6f}",
                                f"{p.onetopic_share_of_onetopic_users:.6f}",
                                "" if p.term_shift is None else f"{p.term_shift:.6f}",
                                "" if p.term_shift_from_week is None else str(p.term_shift_from_week),
                            ]
                        )
                    )
        self.store.write_json(
            "timeseries/all.json",
            {"version": PIPELINE_VERSION, "series": all_series},
            sort_keys=False,
        )
        header = [
            f"# topicwatch timeseries v{PIPELINE_VERSION}",
            "network\tunique_id\ttheme\tweek\tmedian_intersection_relevance\ttext_ratio"
            "\tcontributor_ratio\tonetopic_share_of_topic\tonetopic_share_of_onetopic_users"
            "\tterm_shift\tterm_shift_from_week",
        ]
        self.store.write_text("timeseries/table.tsv", "\n".join(header + tsv_rows) + "\n")

    def _load_clustering(self, network: str):
        payload = self.store.read_json(f"clusters/{network}.json")
        from .kmeans import KMeansResult

        return (
            KMeansResult(
                k=payload["chosen_k"],
                assignments=np.asarray(payload["assignments"], dtype=np.int64),
                centroids=np.asarray(payload["centroids"], dtype=np.float64),
                wcss=payload["wcss"],
                wcss_trace=(),
                seeds=tuple(payload["seeds"]),
                best_seed=None,
            ),
            tuple(payload["accounts"]),
            list(payload["week_indices"]),
        )

    def _stage_graphs(self) -> None:
        cfg = self.config
        weeks = self.load_weeks()
        themes = self.load_theme_assignment()
        meta_weeks = sorted({w.week_index for w in weeks})
        graph_files = []
        for week in weeks:
            unique_set = self.load_unique_set(week.network)
            assignments = self.load_week_assignments(week)
            keys = topic_key_map(assignments, unique_set, themes, cfg.graphs.granularity)
            clustering, cluster_accounts, week_indices = self._load_clustering(week.network)
            week_col = week_indices.index(week.week_index)
            for selector in CLUSTER_SELECTORS:
                selection = select_cluster_accounts(
                    clustering, cluster_accounts, selector, week_col
                )
                dispersion = dispersion_groups(
                    assignments,
                    mode=cfg.dispersion.mode,
                    n_terms=cfg.dispersion.n_terms,
                    accounts=selection,
                )
                graph = build_graph(
                    assignments,
                    dispersion,
                    keys,
                    cluster=selector,
                    granularity=cfg.graphs.granularity,
                    selection=selection,
                )
                rel = f"graphs/{self._week_key(week.week_index, week.network)}_{selector}.json"
                self.store.write_text(rel, serialize_document(graph_to_document(graph)))
                graph_files.append(rel)
        theme_names = sorted(set(themes.values()))
        topics_by_network = {}
        for network in cfg.networks:
            rel = f"unique_sets/{network}.json"
            if self.store.exists(rel):
                topics_by_network[network] = self.load_unique_set(network).ids()
        self.store.write_json(
            "meta.json",
            {
                "version": PIPELINE_VERSION,
                "weeks": meta_weeks,
                "networks": sorted({w.network for w in weeks}),
                "clusters": list(CLUSTER_SELECTORS),
                "granularity": cfg.graphs.granularity,
                "themes": theme_names,
                "topics": topics_by_network,
                "graphs": sorted(graph_files),
            },
            sort_keys=False,
        )

    def _stage_report(self) -> None:
        weeks = self.load_weeks()
        themes = self.load_theme_assignment()
        for week in weeks:
            unique_set = self.load_unique_set(week.network)
            assignments = self.load_week_assignments(week)
            keys = topic_key_map(
                assignments, unique_set, themes, self.config.graphs.granularity
            )
            week_users = assignments.authors()
            rows: dict[str, dict] = {}
            for doc_id, topic in assignments.prevalent.items():
                key = keys[topic]
                row = rows.setdefault(key, {"posts": 0, "users": set()})
                row["posts"] += 1
                row["users"].add(assignments.doc_authors[doc_id])
            table = [
                {
                    "key": key,
                    "posts": row["posts"],
                    "users": len(row["users"]),
                    "post_pct": 100.0 * row["posts"] / assignments.doc_count,
                    "user_pct": 100.0 * len(row["users"]) / len(week_users),
                }
                for key, row in sorted(rows.items())
            ]
            self.store.write_json(
                f"reports/{self._week_key(week.week_index, week.network)}.json",
                {
                    "version": PIPELINE_VERSION,
                    "week": week.week_index,
                    "network": week.network,
                    "week_posts": assignments.doc_count,
                    "week_users": len(week_users),
                    "rows": table,
                },
                sort_keys=False,
            )


def _indicators_to_dict(p) -> dict:
    return {
        "median_intersection_relevance": p.median_intersection_relevance,
        "text_ratio": p.text_ratio,
        "contributor_ratio": p.contributor_ratio,
        "onetopic_share_of_topic": p.onetopic_share_of_topic,
        "onetopic_share_of_onetopic_users": p.onetopic_share_of_onetopic_users,
        "term_shift": p.term_shift,
        "term_shift_from_week": p.term_shift_from_week,
    }
