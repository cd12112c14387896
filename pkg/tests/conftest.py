import json
from pathlib import Path

import pytest

from meshsuggest.boolquery import parse_query
from meshsuggest.corpus import (
    ingest_documents,
    ingest_mesh_tree,
    ingest_qrels,
    ingest_topics,
    ingest_umls_tables,
)
from meshsuggest.fragments import fragment
from meshsuggest.pipeline import RunConfig, load_world, train_models
from meshsuggest.ranking import build_description_stats, load_descriptions
from meshsuggest.retrieval import ReplayMapperClient

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def make_run_config(models_dir=None, **overrides) -> RunConfig:
    """RunConfig over the bundled fixtures; overrides replace any field."""
    kwargs = dict(
        documents=FIXTURES / "corpus" / "documents.jsonl",
        mesh_tree=FIXTURES / "corpus" / "mesh_tree.tsv",
        descriptions=FIXTURES / "corpus" / "descriptions.jsonl",
        topics=FIXTURES / "corpus" / "topics.jsonl",
        qrels=FIXTURES / "corpus" / "qrels.txt",
        umls_dir=FIXTURES / "umls",
        atm_replay=FIXTURES / "replay" / "atm.jsonl",
        metamap_replay=FIXTURES / "replay" / "metamap.jsonl",
        models_dir=models_dir,
    )
    kwargs.update(overrides)
    return RunConfig(**kwargs)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def golden_queries():
    """(name, query text, expected AST dict) triples from the bundled corpus."""
    out = []
    for txt in sorted((FIXTURES / "golden_queries").glob("q*.txt")):
        ast_path = txt.with_suffix(".ast.json")
        out.append((txt.stem, txt.read_text().strip(), json.loads(ast_path.read_text())))
    return out


@pytest.fixture(scope="session")
def corpus_docs():
    docs = []
    with open(FIXTURES / "corpus" / "documents.jsonl") as fh:
        for line in fh:
            docs.append(json.loads(line))
    return docs


@pytest.fixture(scope="session")
def mesh_tree_raw():
    """heading -> list of tree numbers, straight from the fixture file."""
    tree = {}
    with open(FIXTURES / "corpus" / "mesh_tree.tsv") as fh:
        for line in fh:
            heading, number = line.rstrip("\n").split("\t")
            tree.setdefault(heading, []).append(number)
    return tree


@pytest.fixture(scope="session")
def mesh_tree():
    return ingest_mesh_tree(FIXTURES / "corpus" / "mesh_tree.tsv")


@pytest.fixture(scope="session")
def doc_index(mesh_tree):
    return ingest_documents(FIXTURES / "corpus" / "documents.jsonl", mesh_tree)


@pytest.fixture(scope="session")
def concept_index():
    return ingest_umls_tables(*[FIXTURES / "umls" / name for name in
                                ("conso.psv", "def.psv", "sty.psv", "rel.psv")])


@pytest.fixture(scope="session")
def eval_topics():
    return ingest_topics(FIXTURES / "corpus" / "topics.jsonl")


@pytest.fixture(scope="session")
def train_topics():
    return ingest_topics(FIXTURES / "corpus" / "train_topics.jsonl")


@pytest.fixture(scope="session")
def judgments():
    return ingest_qrels(FIXTURES / "corpus" / "qrels.txt")


@pytest.fixture(scope="session")
def descriptions():
    return load_descriptions(FIXTURES / "corpus" / "descriptions.jsonl")


@pytest.fixture(scope="session")
def desc_stats(descriptions):
    return build_description_stats(descriptions)


@pytest.fixture(scope="session")
def atm_client():
    return ReplayMapperClient(FIXTURES / "replay" / "atm.jsonl")


@pytest.fixture(scope="session")
def metamap_client():
    return ReplayMapperClient(FIXTURES / "replay" / "metamap.jsonl")


@pytest.fixture(scope="session")
def eval_fragments(eval_topics):
    """fragment_id -> Fragment over the evaluation topics."""
    out = {}
    for topic_id, query in eval_topics:
        for frag in fragment(parse_query(query), topic_id):
            out[frag.fragment_id] = frag
    return out


@pytest.fixture(scope="session")
def train_fragments(train_topics):
    out = {}
    for topic_id, query in train_topics:
        for frag in fragment(parse_query(query), topic_id):
            out[frag.fragment_id] = frag
    return out


@pytest.fixture(scope="session")
def models_dir(tmp_path_factory) -> Path:
    """Rankers trained once on the bundled training split."""
    out = tmp_path_factory.mktemp("models")
    cfg = make_run_config(models_dir=out,
                          topics=FIXTURES / "corpus" / "train_topics.jsonl")
    train_models(cfg)
    return out


@pytest.fixture(scope="session")
def pipeline_world(models_dir):
    """Fully loaded world (indexes, clients, models) over the eval topics."""
    return load_world(make_run_config(models_dir=models_dir), need_models=True)
