"""HTTP API for the interactive review workflow.

A session tracks one query under review: its fragments, the ranked MeSH
suggestions per fragment, and the reviewer's accept/reject decisions. The
preview query is rebuilt from the decisions after every change, so the
client never needs to compose queries itself. Pass-through fragments
(those with no MeSH terms to replace) are read-only: their suggestions are
informational and the decision endpoint refuses them.

All responses carry ``schema_version``. Errors are
``{"schema_version": 1, "error": {"message": ...}}``; parse errors add the
offset and a snippet of the offending text.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field as dc_field

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from meshsuggest.boolquery import ParseError, parse_query, serialize_query
from meshsuggest.fragments import EmptyFragment, defragment, strip_mesh
from meshsuggest.fragments import fragment as split_query
from meshsuggest.metrics import RESIDUAL_MODES, search_eval
from meshsuggest.pipeline import ALL_METHODS, World, suggest_candidates
from meshsuggest.refine import refine_cutoff
from meshsuggest.retrieval import ClientUnavailable, IndexNotBuilt

SCHEMA_VERSION = 1
DECISION_ACTIONS = ("accept", "reject", "reset")


@dataclass
class FragmentPanel:
    """Server-side state behind one fragment panel in the review UI."""

    fragment: object
    suggestions: list
    cutoff: int
    suggestion_error: str | None = None
    accepted: list = dc_field(default_factory=list)
    rejected: list = dc_field(default_factory=list)

    def decide(self, heading: str, action: str) -> None:
        key = heading.lower()
        self.accepted = [h for h in self.accepted if h.lower() != key]
        self.rejected = [h for h in self.rejected if h.lower() != key]
        if action == "accept":
            self.accepted.append(heading)
        elif action == "reject":
            self.rejected.append(heading)


@dataclass
class Session:
    session_id: str
    topic_id: str | None
    query_text: str
    query: object
    method: str
    panels: dict
    last_retrieval: dict | None = None
    lock: threading.Lock = dc_field(default_factory=threading.Lock)


def _error(status: int, message: str, **extra):
    return JSONResponse(
        status_code=status,
        content={"schema_version": SCHEMA_VERSION,
                 "error": {"message": message, **extra}},
    )


def _parse_error(exc: ParseError):
    return _error(400, exc.message, position=exc.position, snippet=exc.snippet)


class SessionCreate(BaseModel):
    topic_id: str | None = None
    query: str | None = None
    method: str | None = None


class Decision(BaseModel):
    heading: str
    action: str


class SessionImport(BaseModel):
    session_id: str
    topic_id: str | None = None
    query: str
    method: str
    decisions: dict


def create_app(world: World) -> FastAPI:
    app = FastAPI(title="meshsuggest review service")
    cfg = world.cfg
    topics = dict(world.topics)
    sessions: dict = {}
    registry_lock = threading.Lock()

    def candidate_json(c, index: int, cutoff: int) -> dict:
        return {
            "heading": c.heading,
            "method": c.method,
            "raw_score": c.raw_score,
            "norm_score": c.norm_score,
            "sources": [[clause, raw] for clause, raw in c.sources],
            "below_cutoff": index >= cutoff,
        }

    def build_panels(query, topic_id: str, method: str) -> dict:
        """One panel per fragment. A retrieval backend that cannot map a
        fragment (text outside the replay files, index missing) leaves that
        panel without suggestions instead of failing the whole session:
        manual decisions must stay possible."""
        panels = {}
        for frag in split_query(query, topic_id):
            error = None
            try:
                suggestions = suggest_candidates(world, frag, method)
            except (ClientUnavailable, IndexNotBuilt) as exc:
                suggestions, error = [], str(exc)
            cutoff = len(suggestions)
            if cfg.kappa is not None and suggestions:
                cutoff = len(refine_cutoff(suggestions, cfg.kappa))
            panels[frag.fragment_id] = FragmentPanel(
                fragment=frag, suggestions=suggestions, cutoff=cutoff,
                suggestion_error=error,
            )
        return panels

    def preview(session: Session):
        """(query node or None, error payload or None)."""
        accepted = {
            fid: list(panel.accepted)
            for fid, panel in session.panels.items()
            if not panel.fragment.passthrough
        }
        try:
            node = defragment(session.query, accepted,
                              session.topic_id or session.session_id)
        except EmptyFragment as exc:
            return None, {"message": str(exc)}
        return node, None

    def session_json(session: Session) -> dict:
        node, preview_error = preview(session)
        panels = []
        for fid, panel in session.panels.items():
            frag = panel.fragment
            try:
                stripped = serialize_query(strip_mesh(frag))
            except EmptyFragment:
                stripped = None
            panels.append({
                "fragment_id": fid,
                "passthrough": frag.passthrough,
                "gold_mesh": list(frag.gold_mesh),
                "fragment_query": serialize_query(frag.node),
                "stripped_query": stripped,
                "suggestions": [
                    candidate_json(c, i, panel.cutoff)
                    for i, c in enumerate(panel.suggestions)
                ],
                "cutoff": panel.cutoff,
                "suggestion_error": panel.suggestion_error,
                "accepted": list(panel.accepted),
                "rejected": list(panel.rejected),
            })
        return {
            "schema_version": SCHEMA_VERSION,
            "session_id": session.session_id,
            "topic_id": session.topic_id,
            "query": session.query_text,
            "method": session.method,
            "fragments": panels,
            "preview_query": serialize_query(node) if node is not None else None,
            "preview_error": preview_error,
            "last_retrieval": session.last_retrieval,
        }

    def make_session(session_id: str, topic_id: str | None, query_text: str,
                     method: str) -> Session:
        query = parse_query(query_text)
        return Session(
            session_id=session_id,
            topic_id=topic_id,
            query_text=query_text,
            query=query,
            method=method,
            panels=build_panels(query, topic_id or session_id, method),
        )

    def get_session(session_id: str) -> Session | None:
        with registry_lock:
            return sessions.get(session_id)

    @app.post("/api/sessions", status_code=201)
    def create_session(body: SessionCreate):
        if (body.topic_id is None) == (body.query is None):
            return _error(400, "provide exactly one of topic_id or query")
        method = body.method or cfg.method
        if method not in ALL_METHODS:
            return _error(400, f"method must be one of {ALL_METHODS}")
        if body.topic_id is not None:
            if body.topic_id not in topics:
                return _error(404, f"unknown topic {body.topic_id!r}")
            topic_id, query_text = body.topic_id, topics[body.topic_id]
        else:
            topic_id, query_text = None, body.query
        session_id = uuid.uuid4().hex
        try:
            session = make_session(session_id, topic_id, query_text, method)
        except ParseError as exc:
            return _parse_error(exc)
        with registry_lock:
            sessions[session_id] = session
        return session_json(session)

    @app.get("/api/sessions/{session_id}")
    def read_session(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id!r}")
        with session.lock:
            return session_json(session)

    @app.post("/api/sessions/{session_id}/fragments/{fragment_id}/decision")
    def decide(session_id: str, fragment_id: str, body: Decision):
        session = get_session(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id!r}")
        if body.action not in DECISION_ACTIONS:
            return _error(400, f"action must be one of {DECISION_ACTIONS}")
        with session.lock:
            panel = session.panels.get(fragment_id)
            if panel is None:
                return _error(404, f"unknown fragment {fragment_id!r}")
            if panel.fragment.passthrough:
                return _error(
                    409, f"fragment {fragment_id} is pass-through and read-only"
                )
            panel.decide(body.heading, body.action)
            return session_json(session)

    @app.get("/api/sessions/{session_id}/query")
    def read_query(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id!r}")
        with session.lock:
            node, preview_error = preview(session)
            if node is None:
                return _error(409, preview_error["message"])
            return {"schema_version": SCHEMA_VERSION,
                    "query": serialize_query(node)}

    @app.post("/api/sessions/{session_id}/retrieve")
    def retrieve(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id!r}")
        with session.lock:
            node, preview_error = preview(session)
            if node is None:
                return _error(409, preview_error["message"])
            retrieved = world.doc_index.execute(node, date_max=cfg.date_max)
            result = {
                "schema_version": SCHEMA_VERSION,
                "query": serialize_query(node),
                "retrieved": len(retrieved),
            }
            evaluable = (world.qrels is not None and session.topic_id is not None
                         and session.topic_id in world.qrels)
            if not evaluable:
                session.last_retrieval = {k: v for k, v in result.items()
                                          if k != "schema_version"}
                result["error"] = {
                    "message": "no relevance judgments for this session; counts only"
                }
                return JSONResponse(status_code=409, content=result)
            m = search_eval(retrieved, session.topic_id, world.qrels)
            result["counts"] = {
                "judged_relevant_retrieved": m.judged_relevant_retrieved,
                "judged_irrelevant_retrieved": m.judged_irrelevant_retrieved,
                "unjudged_retrieved": m.unjudged_retrieved,
            }
            result["mle_fallback"] = m.mle_fallback
            result["metrics"] = {mode: m.mode(mode).as_dict()
                                 for mode in RESIDUAL_MODES}
            session.last_retrieval = {k: v for k, v in result.items()
                                      if k != "schema_version"}
            return result

    @app.get("/api/suggest")
    def suggest(fragment: str, method: str | None = None):
        method = method or cfg.method
        if method not in ALL_METHODS:
            return _error(400, f"method must be one of {ALL_METHODS}")
        try:
            node = parse_query(fragment)
        except ParseError as exc:
            return _parse_error(exc)
        parts = split_query(node, "adhoc")
        merged = split_query(node, "adhoc", boundaries=[list(range(len(parts)))])[0]
        try:
            candidates = suggest_candidates(world, merged, method)
        except (ClientUnavailable, IndexNotBuilt) as exc:
            return _error(502, str(exc))
        cutoff = len(candidates)
        if cfg.kappa is not None and candidates:
            cutoff = len(refine_cutoff(candidates, cfg.kappa))
        return {
            "schema_version": SCHEMA_VERSION,
            "fragment": serialize_query(merged.node),
            "method": method,
            "candidates": [candidate_json(c, i, cutoff)
                           for i, c in enumerate(candidates)],
        }

    @app.get("/api/sessions/{session_id}/export")
    def export_session(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id!r}")
        with session.lock:
            return {
                "schema_version": SCHEMA_VERSION,
                "session_id": session.session_id,
                "topic_id": session.topic_id,
                "query": session.query_text,
                "method": session.method,
                "decisions": {
                    fid: {"accepted": list(p.accepted), "rejected": list(p.rejected)}
                    for fid, p in session.panels.items()
                    if p.accepted or p.rejected
                },
            }

    @app.post("/api/sessions/import", status_code=201)
    def import_session(body: SessionImport):
        if body.method not in ALL_METHODS:
            return _error(400, f"method must be one of {ALL_METHODS}")
        with registry_lock:
            if body.session_id in sessions:
                return _error(409, f"session {body.session_id!r} already exists")
        try:
            session = make_session(body.session_id, body.topic_id, body.query,
                                   body.method)
        except ParseError as exc:
            return _parse_error(exc)
        for fid, decision in body.decisions.items():
            panel = session.panels.get(fid)
            if panel is None:
                return _error(404, f"unknown fragment {fid!r}")
            if panel.fragment.passthrough:
                return _error(409, f"fragment {fid} is pass-through and read-only")
            for heading in decision.get("accepted", ()):
                panel.decide(heading, "accept")
            for heading in decision.get("rejected", ()):
                panel.decide(heading, "reject")
        with registry_lock:
            if session.session_id in sessions:
                return _error(409, f"session {body.session_id!r} already exists")
            sessions[session.session_id] = session
        return session_json(session)

    return app
