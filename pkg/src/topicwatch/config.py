"""Pipeline configuration: one JSON file drives every stage.

See README for the documented schema. Unknown keys are rejected so typos
fail fast; everything has a default except the input path and the week
boundaries (which may alternatively be generated from a start instant).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources

from .coherence import CoherenceConfig
from .corpus import PreprocessConfig, weekly_boundaries
from .lda.model import LdaConfig
from .modelsel import SelectionRule

CONFIG_VERSION = 1


def lockdown_2020_boundaries() -> list[datetime]:
    """The shipped ten-window boundary list (2020-03-22 .. 2020-06-01)."""
    payload = json.loads(
        resources.files("topicwatch.data").joinpath("lockdown_weeks_2020.json").read_text()
    )
    return [datetime.fromisoformat(b) for b in payload["boundaries"]]


def shipped_theme_map_path() -> str:
    return str(resources.files("topicwatch.data").joinpath("themes_lockdown_2020.json"))


@dataclass(frozen=True)
class SweepSettings:
    enabled: bool = False
    k_min: int = 2
    k_max: int = 50
    intervals: tuple[int, ...] = (10, 50, 100, 500, 1000)
    seeds: tuple[int, ...] = (0,)
    per_week: bool = False  # default: select on the first week, apply globally


@dataclass(frozen=True)
class RelevanceSettings:
    lam: float = 0.6
    top_m: int = 50


@dataclass(frozen=True)
class MatchingSettings:
    threshold: float = 0.30


@dataclass(frozen=True)
class DispersionSettings:
    mode: str = "plain"
    n_terms: int = 5


@dataclass(frozen=True)
class ClusteringSettings:
    k: int | None = None  # None: use the elbow suggestion
    k_min: int = 2
    k_max: int = 15
    seeds: tuple[int, ...] = tuple(range(9))


@dataclass(frozen=True)
class GraphSettings:
    granularity: str = "theme"


@dataclass(frozen=True)
class PipelineConfig:
    input_path: str
    networks: tuple[str, ...]
    boundaries: tuple[datetime, ...]
    preprocess: PreprocessConfig = PreprocessConfig()
    lda: LdaConfig = LdaConfig(k=13)
    sweep: SweepSettings = SweepSettings()
    selection: SelectionRule = SelectionRule()
    relevance: RelevanceSettings = RelevanceSettings()
    coherence: CoherenceConfig = CoherenceConfig()
    matching: MatchingSettings = MatchingSettings()
    theme_map_path: str | None = None
    dispersion: DispersionSettings = DispersionSettings()
    clustering: ClusteringSettings = ClusteringSettings()
    graphs: GraphSettings = GraphSettings()
    raw: dict = field(default_factory=dict, compare=False)

    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def section_hash(self, *sections: str) -> str:
        payload = {name: self.raw.get(name) for name in sections}
        canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


_TOP_LEVEL_KEYS = {
    "version",
    "input",
    "networks",
    "weeks",
    "preprocess",
    "lda",
    "sweep",
    "selection",
    "relevance",
    "coherence",
    "matching",
    "themes",
    "dispersion",
    "clustering",
    "graphs",
}


def _check_keys(payload: dict, allowed: set[str], where: str) -> None:
    unknown = set(payload) - allowed
    if unknown:
        raise ValueError(f"unknown config keys in {where}: {sorted(unknown)}")


def load_config(path) -> PipelineConfig:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return config_from_dict(payload)


def config_from_dict(payload: dict) -> PipelineConfig:
    _check_keys(payload, _TOP_LEVEL_KEYS, "top level")
    if payload.get("version", CONFIG_VERSION) != CONFIG_VERSION:
        raise ValueError(f"unsupported config version {payload.get('version')!r}")

    inp = payload.get("input") or {}
    _check_keys(inp, {"path"}, "input")
    if "path" not in inp:
        raise ValueError("config requires input.path")

    networks = tuple(payload.get("networks") or ())
    if not networks:
        raise ValueError("config requires a non-empty networks list")

    weeks = payload.get("weeks") or {}
    _check_keys(weeks, {"boundaries", "start", "count", "use_lockdown_2020_windows"}, "weeks")
    if weeks.get("use_lockdown_2020_windows"):
        boundaries = lockdown_2020_boundaries()
    elif "boundaries" in weeks:
        boundaries = [_parse_instant(b) for b in weeks["boundaries"]]
    elif "start" in weeks and "count" in weeks:
        boundaries = weekly_boundaries(_parse_instant(weeks["start"]), int(weeks["count"]))
    else:
        raise ValueError(
            "weeks needs either boundaries, start+count, or use_lockdown_2020_windows"
        )

    pp = payload.get("preprocess") or {}
    _check_keys(
        pp,
        {
            "stopwords",
            "kept_pos",
            "length_quantiles",
            "outlier_iqr_multiplier",
            "outlier_min_docs",
            "normalizer",
            "target_lang",
            "language_detector",
            "one_token_floor_networks",
        },
        "preprocess",
    )
    preprocess = PreprocessConfig(
        stopwords=frozenset(pp.get("stopwords", ())),
        kept_pos=frozenset(pp.get("kept_pos", ())),
        length_quantiles=tuple(pp.get("length_quantiles", (0.2, 0.8))),
        outlier_iqr_multiplier=float(pp.get("outlier_iqr_multiplier", 3.0)),
        outlier_min_docs=int(pp.get("outlier_min_docs", 5)),
        normalizer=pp.get("normalizer", "whitespace"),
        target_lang=pp.get("target_lang"),
        language_detector=pp.get("language_detector"),
        one_token_floor_networks=frozenset(pp.get("one_token_floor_networks", ())),
    )

    lda_payload = dict(payload.get("lda") or {})
    _check_keys(
        lda_payload,
        {"k", "alpha0", "beta", "iterations", "burn_in", "optimize_interval", "seed"},
        "lda",
    )
    lda_payload.setdefault("k", 13)
    lda = LdaConfig(**lda_payload)

    sw = payload.get("sweep") or {}
    _check_keys(sw, {"enabled", "k_min", "k_max", "intervals", "seeds", "per_week"}, "sweep")
    sweep = SweepSettings(
        enabled=bool(sw.get("enabled", False)),
        k_min=int(sw.get("k_min", 2)),
        k_max=int(sw.get("k_max", 50)),
        intervals=tuple(sw.get("intervals", (10, 50, 100, 500, 1000))),
        seeds=tuple(sw.get("seeds", (0,))),
        per_week=bool(sw.get("per_week", False)),
    )

    sel = payload.get("selection") or {}
    _check_keys(sel, {"epsilon_fraction", "min_shared", "prefer_small_k"}, "selection")
    selection = SelectionRule(
        epsilon_fraction=float(sel.get("epsilon_fraction", 0.02)),
        min_shared=int(sel.get("min_shared", 3)),
        prefer_small_k=bool(sel.get("prefer_small_k", True)),
    )

    rel = payload.get("relevance") or {}
    _check_keys(rel, {"lambda", "top_m"}, "relevance")
    relevance = RelevanceSettings(
        lam=float(rel.get("lambda", 0.6)), top_m=int(rel.get("top_m", 50))
    )

    coh = payload.get("coherence") or {}
    _check_keys(coh, {"top_n", "window", "npmi_epsilon", "reference"}, "coherence")
    coherence = CoherenceConfig(
        top_n=int(coh.get("top_n", 10)),
        window=int(coh.get("window", 110)),
        npmi_epsilon=float(coh.get("npmi_epsilon", 1e-12)),
        reference=coh.get("reference", "model_corpus"),
    )

    mt = payload.get("matching") or {}
    _check_keys(mt, {"threshold"}, "matching")
    matching = MatchingSettings(threshold=float(mt.get("threshold", 0.30)))

    th = payload.get("themes") or {}
    _check_keys(th, {"path", "use_shipped_map"}, "themes")
    theme_map_path = th.get("path")
    if th.get("use_shipped_map"):
        theme_map_path = shipped_theme_map_path()

    dp = payload.get("dispersion") or {}
    _check_keys(dp, {"mode", "n_terms"}, "dispersion")
    dispersion = DispersionSettings(
        mode=dp.get("mode", "plain"), n_terms=int(dp.get("n_terms", 5))
    )

    cl = payload.get("clustering") or {}
    _check_keys(cl, {"k", "k_min", "k_max", "seeds"}, "clustering")
    clustering = ClusteringSettings(
        k=cl.get("k"),
        k_min=int(cl.get("k_min", 2)),
        k_max=int(cl.get("k_max", 15)),
        seeds=tuple(cl.get("seeds", tuple(range(9)))),
    )

    gr = payload.get("graphs") or {}
    _check_keys(gr, {"granularity"}, "graphs")
    graphs = GraphSettings(granularity=gr.get("granularity", "theme"))

    return PipelineConfig(
        input_path=inp["path"],
        networks=networks,
        boundaries=tuple(boundaries),
        preprocess=preprocess,
        lda=lda,
        sweep=sweep,
        selection=selection,
        relevance=relevance,
        coherence=coherence,
        matching=matching,
        theme_map_path=theme_map_path,
        dispersion=dispersion,
        clustering=clustering,
        graphs=graphs,
        raw=payload,
    )


def _parse_instant(value: str) -> datetime:
    ts = datetime.fromisoformat(str(value).replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)
