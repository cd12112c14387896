"""Batch orchestration: load the corpus world, train per-method rankers,
suggest MeSH terms for every fragment, rebuild and execute queries, and
evaluate both suggestion quality and search effectiveness.

Reports are deterministic byte-for-byte given the same configuration and
fixture files: JSON is dumped with sorted keys, CSV floats use repr, and
aligned-text tables use fixed-width %.4f cells. A failing topic is skipped
with a logged, machine-readable reason and never disturbs other topics.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from meshsuggest.boolquery import parse_query, serialize_query
from meshsuggest.corpus import (
    ingest_documents,
    ingest_mesh_tree,
    ingest_qrels,
    ingest_topics,
    ingest_umls_tables,
)
from meshsuggest.fragments import defragment, fragment
from meshsuggest.ltr import TrainConfig, load_model, rank, save_model, train_ranker
from meshsuggest.metrics import (
    RESIDUAL_MODES,
    SearchMetrics,
    aggregate,
    search_eval,
    significance,
    suggestion_metrics,
)
from meshsuggest.ranking import build_description_stats, label_instances, load_descriptions
from meshsuggest.refine import KAPPA_GRID, fuse_methods, refine_cutoff, tune_kappa
from meshsuggest.retrieval import (
    METHOD_FUSION,
    METHODS,
    ReplayMapperClient,
    retrieve_atm,
    retrieve_metamap,
    retrieve_umls,
)

log = logging.getLogger("meshsuggest.pipeline")

ALL_METHODS = METHODS + (METHOD_FUSION,)
SEARCH_ROW_LABELS = {"original": "O", "stripped": "R", "atm": "A",
                     "metamap": "M", "umls": "U", "fusion": "F"}
SUGGESTION_FIELDS = ("precision", "recall", "rr", "recall_at_5", "recall_at_10",
                     "ndcg_at_5", "ndcg_at_10")


class ConfigError(ValueError):
    """Bad or incomplete run configuration: wrong flag values, missing files."""


@dataclass(frozen=True)
class RunConfig:
    documents: Path
    mesh_tree: Path
    descriptions: Path
    topics: Path
    umls_dir: Path
    atm_replay: Path
    metamap_replay: Path
    qrels: Path | None = None
    models_dir: Path | None = None
    out_dir: Path | None = None
    method: str = METHOD_FUSION
    refine: bool = False
    kappa: int | None = None
    date_max: str | None = None
    seed: int = 0
    top_k: int = 10

    def umls_paths(self) -> tuple:
        return tuple(self.umls_dir / name for name in
                     ("conso.psv", "def.psv", "sty.psv", "rel.psv"))

    def validate(self, need_models: bool = False, need_qrels: bool = False) -> None:
        if self.method not in ALL_METHODS:
            raise ConfigError(f"method must be one of {ALL_METHODS}, got {self.method!r}")
        if self.refine and self.kappa is None:
            raise ConfigError("refine requires a kappa value (set one or tune first)")
        if self.kappa is not None and self.kappa not in KAPPA_GRID:
            raise ConfigError(f"kappa must be one of {KAPPA_GRID}, got {self.kappa}")
        if need_qrels and self.qrels is None:
            raise ConfigError("this command requires --qrels")
        required = [self.documents, self.mesh_tree, self.descriptions, self.topics,
                    self.atm_replay, self.metamap_replay, *self.umls_paths()]
        if self.qrels is not None:
            required.append(self.qrels)
        if need_models:
            if self.models_dir is None:
                raise ConfigError("this command requires --models")
            required.extend(self.model_path(m) for m in self.base_methods())
        missing = [str(p) for p in required if not Path(p).is_file()]
        if missing:
            raise ConfigError("missing input files: " + ", ".join(sorted(missing)))

    def base_methods(self) -> tuple:
        return METHODS if self.method == METHOD_FUSION else (self.method,)

    def report_methods(self) -> tuple:
        return self.base_methods() if self.method != METHOD_FUSION else ALL_METHODS

    def model_path(self, method: str) -> Path:
        return Path(self.models_dir) / f"model_{method}.json"


@dataclass
class World:
    """Immutable-after-load bundle of every index and client a run needs."""

    cfg: RunConfig
    mesh_tree: object
    doc_index: object
    concept_index: object
    descriptions: dict
    desc_stats: object
    atm_client: object
    metamap_client: object
    topics: list
    qrels: dict | None
    models: dict = dc_field(default_factory=dict)


def load_world(cfg: RunConfig, need_models: bool = False, need_qrels: bool = False) -> World:
    cfg.validate(need_models=need_models, need_qrels=need_qrels)
    tree = ingest_mesh_tree(cfg.mesh_tree)
    descriptions = load_descriptions(cfg.descriptions)
    world = World(
        cfg=cfg,
        mesh_tree=tree,
        doc_index=ingest_documents(cfg.documents, tree),
        concept_index=ingest_umls_tables(*cfg.umls_paths()),
        descriptions=descriptions,
        desc_stats=build_description_stats(descriptions),
        atm_client=ReplayMapperClient(cfg.atm_replay),
        metamap_client=ReplayMapperClient(cfg.metamap_replay),
        topics=ingest_topics(cfg.topics),
        qrels=ingest_qrels(cfg.qrels) if cfg.qrels is not None else None,
    )
    if need_models:
        world.models = {m: load_model(cfg.model_path(m)) for m in cfg.base_methods()}
    return world


def retrieve_candidates(world: World, frag, method: str) -> list:
    """Deduplicated, unranked candidates from one base retrieval method."""
    if method == "atm":
        return retrieve_atm(frag, world.atm_client)
    if method == "metamap":
        return retrieve_metamap(frag, world.metamap_client)
    if method == "umls":
        return retrieve_umls(frag, world.concept_index, top_k=world.cfg.top_k)
    raise ConfigError(f"unknown base retrieval method {method!r}")


def suggest_candidates(world: World, frag, method: str, ranked: bool = True,
                       refine: bool = False, kappa: int | None = None) -> list:
    """Full suggestion list for one fragment under one method.

    With ``ranked`` the per-method candidates are reordered by the trained
    model; fusion always ranks its inputs first. ``refine`` truncates at the
    cumulative-gain cutoff.
    """
    if method == METHOD_FUSION:
        per_method = {
            m: suggest_candidates(world, frag, m, ranked=ranked) for m in METHODS
        }
        out = fuse_methods(per_method)
    else:
        out = retrieve_candidates(world, frag, method)
        if ranked and out:
            out = rank(world.models[method], frag, out, world.desc_stats,
                       world.descriptions)
    if refine and out:
        out = refine_cutoff(out, kappa)
    return out


def training_groups(world: World, method: str) -> list:
    """Per-fragment (features, labels) arrays over the loaded topics."""
    groups = []
    for topic_id, query_text in world.topics:
        for frag in fragment(parse_query(query_text), topic_id):
            if frag.passthrough:
                continue
            candidates = retrieve_candidates(world, frag, method)
            if not candidates:
                continue
            pairs = label_instances(frag, candidates, world.desc_stats,
                                    world.descriptions)
            X = np.vstack([vec for vec, _ in pairs])
            y = np.array([label for _, label in pairs], dtype=np.int64)
            groups.append((X, y))
    return groups


def train_models(cfg: RunConfig) -> dict:
    """Train one ranker per base retrieval method; returns method -> path."""
    if cfg.models_dir is None:
        raise ConfigError("training requires --models for the output directory")
    world = load_world(cfg)
    Path(cfg.models_dir).mkdir(parents=True, exist_ok=True)
    out = {}
    for method in METHODS:
        groups = training_groups(world, method)
        model = train_ranker(groups, TrainConfig(seed=cfg.seed), method=method)
        path = cfg.model_path(method)
        save_model(model, path)
        log.info("trained %s on %d groups (%d instances)", path, len(groups),
                 sum(len(y) for _, y in groups))
        out[method] = path
    return out


def tune_method_kappa(cfg: RunConfig) -> tuple:
    """Grid-search kappa for cfg.method over the configured topics; writes
    the curve CSV. Returns (best kappa, curve, csv path or None).
    """
    method = cfg.method
    world = load_world(cfg, need_models=True)
    rankings = {}
    gold = {}
    for topic_id, query_text in world.topics:
        for frag in fragment(parse_query(query_text), topic_id):
            if frag.passthrough:
                continue
            rankings[frag.fragment_id] = suggest_candidates(world, frag, method)
            gold[frag.fragment_id] = set(frag.gold_mesh)
    best, curve = tune_kappa(rankings, gold)
    path = None
    if cfg.out_dir is not None:
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        path = Path(cfg.out_dir) / f"kappa_curve_{method}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(("kappa", "mean_f1"))
            for kappa, mean_f1 in curve:
                writer.writerow((kappa, repr(float(mean_f1))))
    return best, curve, path


def search_metrics_dict(m: SearchMetrics) -> dict:
    out = {
        "retrieved": m.retrieved,
        "judged_relevant_retrieved": m.judged_relevant_retrieved,
        "judged_irrelevant_retrieved": m.judged_irrelevant_retrieved,
        "unjudged_retrieved": m.unjudged_retrieved,
        "mle_fallback": m.mle_fallback,
    }
    for mode in RESIDUAL_MODES:
        out[mode] = m.mode(mode).as_dict()
    return out


@dataclass
class TopicOutcome:
    topic_id: str
    suggestion: dict
    search: dict


def evaluate_topic(world: World, topic_id: str, query_text: str) -> TopicOutcome:
    """Run the full chain for one topic; raises on any stage failure."""
    cfg = world.cfg
    query = parse_query(query_text)
    frags = fragment(query, topic_id)
    gold_frags = [f for f in frags if not f.passthrough]
    if not gold_frags:
        raise ValueError("topic has no fragments with gold MeSH terms")

    suggestion_rows = {}
    suggested_headings = {}
    for method in cfg.report_methods():
        per_fragment = []
        headings = {}
        for frag in gold_frags:
            ranked = suggest_candidates(world, frag, method,
                                        refine=cfg.refine, kappa=cfg.kappa)
            headings[frag.fragment_id] = [c.heading for c in ranked]
            metrics = suggestion_metrics([c.heading.lower() for c in ranked],
                                         frag.gold_set())
            per_fragment.append(metrics.as_dict())
        suggestion_rows[method] = aggregate(per_fragment)
        suggested_headings[method] = headings

    search_rows = {}
    if world.qrels is not None:
        empty = {f.fragment_id: [] for f in gold_frags}
        variants = {
            "original": query,
            "stripped": defragment(query, empty, topic_id),
        }
        for method in cfg.report_methods():
            variants[method] = defragment(query, suggested_headings[method], topic_id)
        for row, node in variants.items():
            retrieved = world.doc_index.execute(node, date_max=cfg.date_max)
            search_rows[row] = search_metrics_dict(
                search_eval(retrieved, topic_id, world.qrels)
            )
    return TopicOutcome(topic_id=topic_id, suggestion=suggestion_rows,
                        search=search_rows)


SEARCH_COLUMNS = tuple(
    (mode, metric)
    for metric in ("precision", "f1", "recall")
    for mode in RESIDUAL_MODES
)


def _significance_block(outcomes: list, methods: tuple) -> dict:
    """Paired tests of every non-ATM method against ATM, per search column."""
    if "atm" not in methods or len(methods) < 2 or len(outcomes) < 2:
        return {}
    others = [m for m in methods if m != "atm"]
    block = {}
    for method in others:
        per_column = {}
        for mode, metric in SEARCH_COLUMNS:
            a = [o.search[method][mode][metric] for o in outcomes]
            b = [o.search["atm"][mode][metric] for o in outcomes]
            res = significance(a, b, comparisons=len(others))
            per_column[f"{mode}.{metric}"] = {
                "t": None if res.degenerate else res.t,
                "p_raw": res.p_raw,
                "p_corrected": res.p_corrected,
                "significant": res.significant,
                "degenerate": res.degenerate,
            }
        block[method] = per_column
    return block


def run_pipeline(cfg: RunConfig, emit_suggestion: bool = True,
                 emit_search: bool = True) -> dict:
    """Evaluate every topic and write the report files; returns the report."""
    world = load_world(cfg, need_models=True, need_qrels=emit_search)
    outcomes = []
    skips = []
    for topic_id, query_text in world.topics:
        try:
            outcomes.append(evaluate_topic(world, topic_id, query_text))
        except Exception as exc:
            reason = f"{type(exc).__name__}: {exc}"
            log.warning("skipping topic %s: %s", topic_id, reason)
            skips.append({"topic_id": topic_id, "reason": reason})

    report = {
        "schema_version": 1,
        "config": {
            "method": cfg.method,
            "refine": cfg.refine,
            "kappa": cfg.kappa,
            "date_max": cfg.date_max,
            "seed": cfg.seed,
            "top_k": cfg.top_k,
        },
        "topics": [tid for tid, _ in world.topics],
        "evaluated_topics": [o.topic_id for o in outcomes],
        "skips": skips,
    }
    methods = cfg.report_methods()
    if emit_suggestion:
        report["suggestion"] = {
            "per_topic": {
                m: {o.topic_id: o.suggestion[m] for o in outcomes} for m in methods
            },
            "mean": {
                m: aggregate([o.suggestion[m] for o in outcomes]) if outcomes else {}
                for m in methods
            },
        }
    if emit_search:
        rows = ("original", "stripped") + methods
        report["search"] = {
            "per_topic": {
                row: {o.topic_id: o.search[row] for o in outcomes} for row in rows
            },
            "mean": {
                row: {
                    mode: aggregate([o.search[row][mode] for o in outcomes])
                    for mode in RESIDUAL_MODES
                } if outcomes else {}
                for row in rows
            },
        }
        report["significance"] = _significance_block(outcomes, methods)

    if cfg.out_dir is not None:
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_report_json(report, out_dir / "report.json")
        write_report_txt(report, out_dir / "report.txt")
        if emit_suggestion:
            write_suggestion_csv(report, outcomes, out_dir / "suggestion_report.csv")
    return report


def write_report_json(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_suggestion_csv(report: dict, outcomes: list, path) -> None:
    """Per-topic suggestion metric rows plus a mean row per method."""
    methods = [m for m in ("atm", "metamap", "umls", "fusion")
               if m in report["suggestion"]["per_topic"]]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("topic_id", "method") + SUGGESTION_FIELDS)
        for method in methods:
            for outcome in outcomes:
                row = outcome.suggestion[method]
                writer.writerow([outcome.topic_id, method]
                                + [repr(float(row[k])) for k in SUGGESTION_FIELDS])
            mean = report["suggestion"]["mean"][method]
            if mean:
                writer.writerow(["mean", method]
                                + [repr(float(mean[k])) for k in SUGGESTION_FIELDS])


def _marker(report: dict, row: str, mode: str, metric: str) -> str:
    sig = report.get("significance", {}).get(row, {})
    cell = sig.get(f"{mode}.{metric}", {})
    return "*" if cell.get("significant") else ""


def render_report_txt(report: dict) -> str:
    """Aligned-text tables: suggestion means per method, then the search
    triples (plain, MLE, optimistic) per query variant with significance
    markers against the ATM row."""
    lines = []
    if "suggestion" in report:
        lines.append("MeSH suggestion quality (mean over topics)")
        header = ["method"] + [name for name in SUGGESTION_FIELDS]
        lines.append("  ".join(f"{h:>12}" for h in header))
        for method, mean in report["suggestion"]["mean"].items():
            if not mean:
                continue
            cells = [f"{method:>12}"] + [f"{mean[k]:>12.4f}" for k in SUGGESTION_FIELDS]
            lines.append("  ".join(cells))
        lines.append("")
    if "search" in report:
        lines.append("Search effectiveness (mean over topics; * = significant vs atm)")
        headers = ["variant"]
        for metric in ("P", "F1", "R"):
            headers += [metric, f"{metric}(MLE)", f"{metric}(Opt)"]
        lines.append("  ".join(f"{h:>10}" for h in headers))
        for row, means in report["search"]["mean"].items():
            if not means:
                continue
            cells = [f"{row:>10}"]
            for metric in ("precision", "f1", "recall"):
                for mode in RESIDUAL_MODES:
                    value = f"{means[mode][metric]:.4f}{_marker(report, row, mode, metric)}"
                    cells.append(f"{value:>10}")
            lines.append("  ".join(cells))
        lines.append("")
    if report.get("skips"):
        lines.append("Skipped topics")
        for skip in report["skips"]:
            lines.append(f"  {skip['topic_id']}: {skip['reason']}")
        lines.append("")
    return "\n".join(lines)


def write_report_txt(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_report_txt(report))
