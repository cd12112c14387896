"""MeSH candidate retrieval for a query fragment.

Three methods produce scored candidates: an ATM-style mapper (PubMed
automatic term mapping), a MetaMap-style mapper, and BM25 search over the
local UMLS-style concept index. Each method's occurrences are then
deduplicated with CombSUM over min-max normalized scores.

Submission forms, pinned for replay reproducibility:
  - ATM whole-fragment: the serialized MeSH-stripped fragment.
  - ATM per-clause: the serialized clause atom (quotes and wildcard kept).
  - ATM per-term: whitespace-split clause words; a truncated clause keeps
    its wildcard on the final word.
  - MetaMap and UMLS: the raw clause text, one clause at a time.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field as dc_field

from meshsuggest.boolquery import serialize_query
from meshsuggest.fragments import EmptyFragment, Fragment, strip_mesh
from meshsuggest.refine import minmax_normalize

METHOD_ATM = "atm"
METHOD_METAMAP = "metamap"
METHOD_UMLS = "umls"
METHOD_FUSION = "fusion"
METHODS = (METHOD_ATM, METHOD_METAMAP, METHOD_UMLS)


class ClientUnavailable(RuntimeError):
    """The mapper client could not answer; carries the fragment when known."""


class IndexNotBuilt(RuntimeError):
    pass


@dataclass(frozen=True)
class Mapping:
    heading: str
    score: float | None = None
    category: str | None = None
    source: str | None = None


@dataclass(frozen=True)
class MeshCandidate:
    heading: str
    method: str
    raw_score: float
    norm_score: float
    sources: tuple = dc_field(default_factory=tuple)


class ReplayMapperClient:
    """Deterministic client replaying recorded (input -> mappings) files.

    Replay files are line-delimited JSON: {"input": text, "mappings":
    [{"heading", "score", "category", "source"}]}. A missing input is a
    hard error: silent empties would mask fixture drift.
    """

    concurrent = True

    def __init__(self, path):
        self.path = path
        self._responses = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                self._responses[rec["input"]] = [
                    Mapping(
                        heading=m["heading"],
                        score=m.get("score"),
                        category=m.get("category"),
                        source=m.get("source"),
                    )
                    for m in rec["mappings"]
                ]

    def map(self, text: str) -> list:
        if text not in self._responses:
            raise ClientUnavailable(f"no replay entry for input {text!r} in {self.path}")
        return self._responses[text]


class EntrezMapperClient:
    """Live ATM adapter over the eutils esearch endpoint.

    Calls are serialized with a minimum interval; excluded from the test
    suite by design (network).
    """

    concurrent = False

    def __init__(self, endpoint: str, api_key: str | None = None, min_interval: float = 0.34):
        import requests

        self._requests = requests
        self.endpoint = endpoint
        self.api_key = api_key
        self.min_interval = min_interval
        self._lock = threading.Lock()
        self._last_call = 0.0

    def map(self, text: str) -> list:
        with self._lock:
            wait = self.min_interval - (time.monotonic() - self._last_call)
            if wait > 0:
                time.sleep(wait)
            params = {"db": "pubmed", "term": text, "retmode": "json"}
            if self.api_key:
                params["api_key"] = self.api_key
            try:
                resp = self._requests.get(self.endpoint, params=params, timeout=30)
                resp.raise_for_status()
            except Exception as exc:
                raise ClientUnavailable(str(exc)) from exc
            self._last_call = time.monotonic()
        return self._parse(resp.json())

    @staticmethod
    def _parse(payload: dict) -> list:
        out = []
        result = payload.get("esearchresult", {})
        for trans in result.get("translationset", []):
            for piece in trans.get("to", "").split(" OR "):
                piece = piece.strip().strip("()")
                if piece.lower().endswith("[mesh terms]"):
                    heading = piece[: -len("[mesh terms]")].strip().strip('"')
                    out.append(Mapping(heading=heading, category="MeSH"))
        return out


# ---------------------------------------------------------------------------
# Retrieval methods. Occurrences are (heading, submitted text, raw score).


def _mesh_mappings(mappings: list) -> list:
    """ATM category filter with rank-derived scores over the full response."""
    out = []
    for rank, m in enumerate(mappings, 1):
        if m.category == "MeSH":
            out.append((m.heading, 1.0 / rank))
    return out


def _atm_terms(atom) -> list:
    words = atom.text.split()
    if atom.truncated and words:
        words[-1] += "*"
    return words


def retrieve_atm(f: Fragment, client) -> list:
    """Cascaded ATM submission: whole fragment, then unmapped clauses, then
    the individual terms of clauses that still map to nothing."""
    try:
        stripped = strip_mesh(f)
    except EmptyFragment:
        return []
    occurrences = []
    whole_text = serialize_query(stripped)
    try:
        whole = _mesh_mappings(client.map(whole_text))
    except ClientUnavailable as exc:
        raise ClientUnavailable(f"fragment {f.fragment_id}: {exc}") from exc
    if whole:
        occurrences.extend((h, whole_text, s) for h, s in whole)
        return dedup_combsum(occurrences, METHOD_ATM)
    for atom in f.free_text_clauses:
        clause_text = serialize_query(atom)
        try:
            clause_maps = _mesh_mappings(client.map(clause_text))
            if clause_maps:
                occurrences.extend((h, clause_text, s) for h, s in clause_maps)
                continue
            for term in _atm_terms(atom):
                occurrences.extend(
                    (h, term, s) for h, s in _mesh_mappings(client.map(term))
                )
        except ClientUnavailable as exc:
            raise ClientUnavailable(f"fragment {f.fragment_id}: {exc}") from exc
    return dedup_combsum(occurrences, METHOD_ATM)


def retrieve_metamap(f: Fragment, client) -> list:
    """One submission per free-text clause, filtered to MeSH-source entities."""
    occurrences = []
    for atom in f.free_text_clauses:
        try:
            mappings = client.map(atom.text)
        except ClientUnavailable as exc:
            raise ClientUnavailable(f"fragment {f.fragment_id}: {exc}") from exc
        for m in mappings:
            if m.source == "MSH":
                occurrences.append((m.heading, atom.text, float(m.score)))
    return dedup_combsum(occurrences, METHOD_METAMAP)


def retrieve_umls(f: Fragment, concept_index, top_k: int = 10) -> list:
    """BM25 clause search; hits map to their concept's MeSH-source synonyms."""
    if concept_index is None or concept_index.size == 0:
        raise IndexNotBuilt("concept index is empty or missing")
    occurrences = []
    for atom in f.free_text_clauses:
        for row, score in concept_index.search_bm25(atom.text, top_k=top_k):
            for heading in concept_index.mesh_synonyms(row.cui):
                occurrences.append((heading, atom.text, score))
    return dedup_combsum(occurrences, METHOD_UMLS)


def dedup_combsum(occurrences: list, method: str) -> list:
    """Collapse repeated headings: CombSUM over min-max normalized scores.

    Grouping is case-insensitive on the heading (first spelling wins);
    ties in the summed score break lexicographically; the output's
    norm_score is a min-max over the summed scores.
    """
    if not occurrences:
        return []
    normalized = minmax_normalize([raw for _, _, raw in occurrences])
    groups: dict = {}
    for (heading, clause, raw), norm in zip(occurrences, normalized):
        key = heading.lower()
        if key not in groups:
            groups[key] = {"heading": heading, "sum": 0.0, "sources": []}
        groups[key]["sum"] += norm
        groups[key]["sources"].append((clause, raw))
    ordered = sorted(groups.values(), key=lambda g: (-g["sum"], g["heading"].lower()))
    norm_scores = minmax_normalize([g["sum"] for g in ordered])
    return [
        MeshCandidate(
            heading=g["heading"],
            method=method,
            raw_score=g["sum"],
            norm_score=ns,
            sources=tuple(g["sources"]),
        )
        for g, ns in zip(ordered, norm_scores)
    ]
