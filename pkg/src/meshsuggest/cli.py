"""Command-line entry points for the MeSH suggestion toolkit.

Exit codes: 0 success, 1 configuration error (bad flags, missing files),
2 data error (malformed queries or fixture files, degenerate training).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from meshsuggest.boolquery import ParseError, node_to_json, parse_query, serialize_query
from meshsuggest.corpus import CorpusError
from meshsuggest.fragments import EmptyFragment, UnknownFragmentId, fragment
from meshsuggest.ltr import DegenerateTraining, FeatureOrderMismatch
from meshsuggest.pipeline import (
    ALL_METHODS,
    ConfigError,
    RunConfig,
    load_world,
    render_report_txt,
    run_pipeline,
    suggest_candidates,
    train_models,
    tune_method_kappa,
)
from meshsuggest.retrieval import ClientUnavailable, IndexNotBuilt, METHOD_FUSION

DATA_ERRORS = (
    ParseError,
    CorpusError,
    ClientUnavailable,
    IndexNotBuilt,
    DegenerateTraining,
    FeatureOrderMismatch,
    EmptyFragment,
    UnknownFragmentId,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; this toolkit reserves 2 for data
    errors, so usage problems exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_world_args(p: argparse.ArgumentParser, topics_default: bool = True) -> None:
    g = p.add_argument_group("inputs")
    g.add_argument("--fixtures", type=Path, metavar="DIR",
                   help="directory with corpus/, umls/, replay/ sub-layouts; "
                        "individual path flags override pieces of it")
    g.add_argument("--documents", type=Path)
    g.add_argument("--mesh-tree", type=Path)
    g.add_argument("--descriptions", type=Path)
    if topics_default:
        g.add_argument("--topics", type=Path)
    g.add_argument("--qrels", type=Path)
    g.add_argument("--umls-dir", type=Path)
    g.add_argument("--atm-replay", type=Path)
    g.add_argument("--metamap-replay", type=Path)
    g.add_argument("--models", type=Path, metavar="DIR",
                   help="directory holding model_<method>.json files")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--top-k", type=int, default=10)


def _add_run_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run")
    g.add_argument("--method", choices=ALL_METHODS, default=METHOD_FUSION)
    g.add_argument("--refine", action="store_true")
    g.add_argument("--kappa", type=int)
    g.add_argument("--date-max", metavar="YYYY-MM-DD")
    g.add_argument("--out", type=Path, metavar="DIR")


def build_config(args, train_split: bool = False) -> RunConfig:
    """Resolve the fixtures-directory shorthand plus per-path overrides."""
    fx = args.fixtures

    def pick(value, *relative):
        if value is not None:
            return value
        if fx is not None:
            return fx.joinpath(*relative)
        return None

    topics_name = "train_topics.jsonl" if train_split else "topics.jsonl"
    paths = {
        "documents": pick(args.documents, "corpus", "documents.jsonl"),
        "mesh_tree": pick(args.mesh_tree, "corpus", "mesh_tree.tsv"),
        "descriptions": pick(args.descriptions, "corpus", "descriptions.jsonl"),
        "topics": pick(getattr(args, "topics", None), "corpus", topics_name),
        "umls_dir": pick(args.umls_dir, "umls"),
        "atm_replay": pick(args.atm_replay, "replay", "atm.jsonl"),
        "metamap_replay": pick(args.metamap_replay, "replay", "metamap.jsonl"),
    }
    missing = sorted(flag for flag, value in paths.items() if value is None)
    if missing:
        flags = ", ".join("--" + m.replace("_", "-") for m in missing)
        raise ConfigError(f"missing input paths: set --fixtures or {flags}")
    return RunConfig(
        qrels=args.qrels,
        models_dir=args.models,
        out_dir=getattr(args, "out", None),
        method=getattr(args, "method", METHOD_FUSION),
        refine=getattr(args, "refine", False),
        kappa=getattr(args, "kappa", None),
        date_max=getattr(args, "date_max", None),
        seed=args.seed,
        top_k=args.top_k,
        **paths,
    )


def cmd_parse(args) -> int:
    node = parse_query(args.query)
    if args.json:
        print(json.dumps(node_to_json(node), sort_keys=True, indent=2))
    else:
        print(serialize_query(node))
    return 0


def cmd_fragment(args) -> int:
    if args.topics is not None:
        topics = [json.loads(line) for line in
                  Path(args.topics).read_text(encoding="utf-8").splitlines() if line]
        total = 0
        gold_total = 0
        for row in topics:
            frags = fragment(parse_query(row["query"]), row["topic_id"])
            gold = sum(1 for f in frags if not f.passthrough)
            total += len(frags)
            gold_total += gold
            print(f"{row['topic_id']}\tfragments={len(frags)}\tgold_fragments={gold}")
        mean = total / len(topics) if topics else 0.0
        print(f"topics={len(topics)}\tfragments={total}\tgold_fragments={gold_total}"
              f"\tmean_fragments={mean:.2f}")
        return 0
    if args.query is None:
        raise ConfigError("fragment needs a query argument or --topics FILE")
    for frag in fragment(parse_query(args.query), args.topic_id):
        gold = ";".join(frag.gold_mesh) if frag.gold_mesh else "-"
        print(f"{frag.fragment_id}\tgold={gold}\t{serialize_query(frag.node)}")
    return 0


def _single_fragment(world, text: str, topic_id: str):
    """Treat the whole text as one fragment, merging top-level AND operands."""
    node = parse_query(text)
    n = len(fragment(node, topic_id))
    frags = fragment(node, topic_id, boundaries=[list(range(n))])
    return frags[0]


def _print_candidates(candidates) -> None:
    for i, c in enumerate(candidates, start=1):
        sources = ",".join(f"{clause}:{raw:.2f}" for clause, raw in c.sources)
        print(f"{i}\t{c.heading}\t{c.method}\t{c.norm_score:.4f}\t{sources or '-'}")


def cmd_suggest(args) -> int:
    cfg = build_config(args)
    world = load_world(cfg)
    frag = _single_fragment(world, args.query, "cli")
    _print_candidates(suggest_candidates(world, frag, args.method, ranked=False))
    return 0


def cmd_rank(args) -> int:
    cfg = build_config(args)
    world = load_world(cfg, need_models=True)
    frag = _single_fragment(world, args.query, "cli")
    candidates = suggest_candidates(world, frag, cfg.method,
                                    refine=cfg.refine, kappa=cfg.kappa)
    _print_candidates(candidates)
    return 0


def cmd_train(args) -> int:
    cfg = build_config(args, train_split=True)
    for method, path in train_models(cfg).items():
        print(f"{method}\t{path}")
    return 0


def cmd_tune_kappa(args) -> int:
    cfg = build_config(args, train_split=True)
    best, curve, path = tune_method_kappa(cfg)
    for kappa, mean_f1 in curve:
        print(f"{kappa}\t{mean_f1:.4f}")
    print(f"best_kappa={best}")
    if path is not None:
        print(f"curve={path}")
    return 0


def _run(args, emit_suggestion: bool, emit_search: bool) -> int:
    cfg = build_config(args)
    report = run_pipeline(cfg, emit_suggestion=emit_suggestion,
                          emit_search=emit_search)
    print(render_report_txt(report), end="")
    if cfg.out_dir is not None:
        print(f"report={Path(cfg.out_dir) / 'report.json'}")
    return 0


def cmd_eval_suggest(args) -> int:
    return _run(args, emit_suggestion=True, emit_search=False)


def cmd_eval_search(args) -> int:
    return _run(args, emit_suggestion=False, emit_search=True)


def cmd_run(args) -> int:
    return _run(args, emit_suggestion=True, emit_search=True)


def cmd_serve(args) -> int:
    import uvicorn

    from meshsuggest.service import create_app

    cfg = build_config(args)
    app = create_app(load_world(cfg, need_models=True))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="meshsuggest",
                     description="Suggest, rank, and evaluate MeSH terms for "
                                 "systematic-review Boolean queries.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a query and print its serialization")
    p.add_argument("query")
    p.add_argument("--json", action="store_true", help="print the AST as JSON")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("fragment", help="split a query into fragments")
    p.add_argument("query", nargs="?", default=None)
    p.add_argument("--topic-id", default="cli")
    p.add_argument("--topics", type=Path, help="summarize a topics.jsonl file instead")
    p.set_defaults(func=cmd_fragment)

    p = sub.add_parser("suggest",
                       help="retrieval-order MeSH candidates for one fragment")
    p.add_argument("query", help="fragment text, treated as a single fragment")
    p.add_argument("--method", choices=ALL_METHODS, default=METHOD_FUSION)
    _add_world_args(p, topics_default=False)
    p.set_defaults(func=cmd_suggest)

    p = sub.add_parser("rank", help="model-ranked MeSH candidates for one fragment")
    p.add_argument("query", help="fragment text, treated as a single fragment")
    _add_world_args(p, topics_default=False)
    _add_run_args(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("train", help="train one ranking model per retrieval method")
    _add_world_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tune-kappa",
                       help="grid-search the refinement cutoff on the training topics")
    _add_world_args(p)
    _add_run_args(p)
    p.set_defaults(func=cmd_tune_kappa)

    p = sub.add_parser("eval-suggest",
                       help="suggestion-quality metrics against gold MeSH terms")
    _add_world_args(p)
    _add_run_args(p)
    p.set_defaults(func=cmd_eval_suggest)

    p = sub.add_parser("eval-search",
                       help="search-effectiveness metrics for rebuilt queries")
    _add_world_args(p)
    _add_run_args(p)
    p.set_defaults(func=cmd_eval_search)

    p = sub.add_parser("run", help="full pipeline: suggest, rebuild, search, report")
    _add_world_args(p)
    _add_run_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="HTTP API for the review workflow")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    _add_world_args(p)
    _add_run_args(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"meshsuggest: config error: {exc}", file=sys.stderr)
        return 1
    except DATA_ERRORS as exc:
        print(f"meshsuggest: data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"meshsuggest: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
