"""Record review-service HTTP exchanges for the UI test suite.

Talks to the real service in-process, mirroring the exact request pattern
the browser store issues, and dumps every exchange so the tests can replay
them through a mocked fetch. Re-run after any wire-format change:

    python3 scripts/record_fixtures.py
"""

import json
import random
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from meshsuggest.pipeline import RunConfig, load_world, train_models
from meshsuggest.retrieval import METHODS
from meshsuggest.service import create_app

FRONTEND = Path(__file__).resolve().parent.parent
FIXTURES = FRONTEND.parent / "fixtures"
OUT_DIR = FRONTEND / "tests" / "fixtures"

ACTIONS = ("accept", "reject", "reset")
PROJECTION_SEED = 20260814
PROJECTION_STEPS = 20


class Recorder:
    """TestClient wrapper that logs every request/response pair."""

    def __init__(self, client: TestClient):
        self.client = client
        self.exchanges = []

    def call(self, method: str, path: str, json_body=None, params=None):
        resp = self.client.request(method, path, json=json_body, params=params)
        url = str(resp.request.url)
        body = resp.json()
        self.exchanges.append({
            "method": method,
            "url": url,
            "body": json_body,
            "status": resp.status_code,
            "response": body,
        })
        return resp.status_code, body

    # The store's composite operations, request for request.

    def load_session(self, create_body):
        status, session = self.call("POST", "/api/sessions", json_body=create_body)
        if status != 201:
            return status, session
        if session["method"] == "fusion":
            for frag in session["fragments"]:
                for m in METHODS:
                    self.call("GET", "/api/suggest",
                              params={"fragment": frag["fragment_query"], "method": m})
        return status, session

    def decide(self, session_id, fragment_id, heading, action):
        status, doc = self.call(
            "POST", f"/api/sessions/{session_id}/fragments/{fragment_id}/decision",
            json_body={"heading": heading, "action": action})
        if status == 200:
            self.call("GET", f"/api/sessions/{session_id}/query")
        else:
            self.call("GET", f"/api/sessions/{session_id}")
        return status, doc


def build_world():
    corpus = FIXTURES / "corpus"
    base = dict(
        documents=corpus / "documents.jsonl",
        mesh_tree=corpus / "mesh_tree.tsv",
        descriptions=corpus / "descriptions.jsonl",
        umls_dir=FIXTURES / "umls",
        atm_replay=FIXTURES / "replay" / "atm.jsonl",
        metamap_replay=FIXTURES / "replay" / "metamap.jsonl",
    )
    models_dir = Path(tempfile.mkdtemp(prefix="ui-models-"))
    train_models(RunConfig(topics=corpus / "train_topics.jsonl",
                           models_dir=models_dir, **base))
    cfg = RunConfig(topics=corpus / "topics.jsonl", qrels=corpus / "qrels.txt",
                    models_dir=models_dir, kappa=20, **base)
    return load_world(cfg, need_models=True, need_qrels=True)


def record_decision_loop(client) -> dict:
    rec = Recorder(client)
    _, session = rec.load_session({"topic_id": "T1"})
    sid = session["session_id"]
    rec.decide(sid, "T1:3", "liver", "accept")
    rec.decide(sid, "T1:3", "biopsy", "accept")
    rec.call("POST", f"/api/sessions/{sid}/retrieve")
    rec.call("GET", f"/api/sessions/{sid}/export")
    return {"session_id": sid, "exchanges": rec.exchanges}


def record_projection(client) -> dict:
    rec = Recorder(client)
    _, session = rec.load_session({"topic_id": "T1"})
    sid = session["session_id"]
    decidable = [f for f in session["fragments"] if not f["passthrough"]]
    rng = random.Random(PROJECTION_SEED)
    actions = []
    for _ in range(PROJECTION_STEPS):
        frag = rng.choice(decidable)
        heading = rng.choice([s["heading"] for s in frag["suggestions"]])
        action = rng.choice(ACTIONS)
        actions.append({"fragment_id": frag["fragment_id"],
                        "heading": heading, "action": action})
        status, _ = rec.decide(sid, frag["fragment_id"], heading, action)
        assert status == 200, f"scripted decision failed: {actions[-1]}"
    rec.call("GET", f"/api/sessions/{sid}")
    return {"session_id": sid, "actions": actions, "exchanges": rec.exchanges}


def record_errors(client) -> dict:
    rec = Recorder(client)
    rec.load_session({"query": "liver AND ("})
    # MeSH-free but fully replayed: suggestions show on a read-only panel.
    _, session = rec.load_session({"query": '(aspirin OR "acetylsalicylic acid")'})
    sid = session["session_id"]
    rec.call("POST", f"/api/sessions/{sid}/retrieve")
    # No replay entry for the whole fragment: the panel degrades with a note.
    rec.load_session({"query": '(aspirin OR "portal hypertension")'})
    return {"session_id": sid, "exchanges": rec.exchanges}


def record_import(client, export_doc) -> dict:
    rec = Recorder(client)
    imported = dict(export_doc, session_id=export_doc["session_id"] + "-copy")
    status, session = rec.call("POST", "/api/sessions/import", json_body=imported)
    assert status == 201, session
    if session["method"] == "fusion":
        for frag in session["fragments"]:
            for m in METHODS:
                rec.call("GET", "/api/suggest",
                         params={"fragment": frag["fragment_query"], "method": m})
    return {"session_id": session["session_id"], "import_body": imported,
            "exchanges": rec.exchanges}


def main() -> int:
    world = build_world()
    client = TestClient(create_app(world))
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    loop = record_decision_loop(client)
    export_doc = loop["exchanges"][-1]["response"]
    recordings = {
        "decision_loop.json": loop,
        "projection.json": record_projection(client),
        "errors.json": record_errors(client),
        "import.json": record_import(client, export_doc),
    }
    for name, data in recordings.items():
        path = OUT_DIR / name
        path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n",
                        encoding="utf-8")
        print(f"wrote {path} ({len(data['exchanges'])} exchanges)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
