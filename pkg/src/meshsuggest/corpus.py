"""Local corpus substrate: document index, MeSH tree, UMLS-style concept
tables, topics, and qrels, plus Boolean query execution with MeSH explosion
and date restriction.

Indexes are built once and never mutated afterwards, so they are safe to
share across threads.
"""

from __future__ import annotations

import bisect
import json
import logging
import math
import re
from dataclasses import dataclass, field as dc_field
from datetime import date

from meshsuggest.boolquery import Atom, BoolOp, Field, Op, QueryNode

log = logging.getLogger(__name__)

_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs; no stemming."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


class CorpusError(ValueError):
    """Malformed corpus input; carries the offending line when known."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = f"{path}:{line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class UnsupportedFieldError(ValueError):
    """A query atom reached execution with a field the engine cannot run."""


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    abstract: str
    mesh_headings: tuple
    pub_date: date


# ---------------------------------------------------------------------------
# MeSH tree


class MeshTree:
    """Heading <-> tree-number table with prefix-extension explosion."""

    def __init__(self, heading_numbers: dict):
        self.heading_numbers = {h: frozenset(ns) for h, ns in heading_numbers.items()}
        self.number_heading = {}
        for heading, numbers in heading_numbers.items():
            for n in numbers:
                if n in self.number_heading and self.number_heading[n] != heading:
                    raise CorpusError(f"tree number {n} assigned to two headings")
                self.number_heading[n] = heading
        self._sorted_numbers = sorted(self.number_heading)
        self._by_lower = {h.lower(): h for h in self.heading_numbers}
        self._validate_forest()

    @classmethod
    def from_tsv(cls, path) -> "MeshTree":
        heading_numbers: dict = {}
        seen_numbers = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not parts[0] or not parts[1]:
                    raise CorpusError("expected heading<TAB>tree_number", path, lineno)
                heading, number = parts
                if number in seen_numbers and seen_numbers[number] != heading:
                    raise CorpusError(
                        f"tree number {number} assigned to two headings", path, lineno
                    )
                seen_numbers[number] = heading
                heading_numbers.setdefault(heading, set()).add(number)
        return cls(heading_numbers)

    def _validate_forest(self):
        for number in self.number_heading:
            parent = number.rpartition(".")[0]
            if parent and parent not in self.number_heading:
                raise CorpusError(f"orphan tree number {number}: missing parent {parent}")

    def canonical(self, heading: str) -> str | None:
        return self._by_lower.get(heading.lower())

    def explode(self, heading: str) -> set:
        """The heading plus all headings on descendant tree numbers."""
        base = self.canonical(heading)
        if base is None:
            log.warning("explode: heading %r not in tree; returning it alone", heading)
            return {heading}
        out = {base}
        for base_number in self.heading_numbers[base]:
            prefix = base_number + "."
            lo = bisect.bisect_left(self._sorted_numbers, base_number)
            for number in self._sorted_numbers[lo:]:
                if number != base_number and not number.startswith(prefix):
                    if not number.startswith(base_number):
                        break
                    continue
                out.add(self.number_heading[number])
        return out

    def __len__(self):
        return len(self.heading_numbers)

    def __contains__(self, heading: str) -> bool:
        return heading.lower() in self._by_lower


def ingest_mesh_tree(path) -> MeshTree:
    return MeshTree.from_tsv(path)


# ---------------------------------------------------------------------------
# Document index


class DocumentIndex:
    """Inverted index over title/abstract tokens and MeSH headings."""

    def __init__(self, docs: list, tree: MeshTree):
        self.tree = tree
        self.docs = {}
        self._tokens = {"title": {}, "abstract": {}}
        self._postings = {"title": {}, "abstract": {}}
        self._vocab = {}
        self._mesh_postings = {}
        for doc in docs:
            if doc.doc_id in self.docs:
                raise CorpusError(f"duplicate doc_id {doc.doc_id}")
            self.docs[doc.doc_id] = doc
            for fname, text in (("title", doc.title), ("abstract", doc.abstract)):
                tokens = tokenize(text)
                self._tokens[fname][doc.doc_id] = tokens
                for t in set(tokens):
                    self._postings[fname].setdefault(t, set()).add(doc.doc_id)
            for heading in doc.mesh_headings:
                self._mesh_postings.setdefault(heading.lower(), set()).add(doc.doc_id)
        for fname in ("title", "abstract"):
            self._vocab[fname] = sorted(self._postings[fname])

    def __len__(self):
        return len(self.docs)

    def all_ids(self) -> set:
        return set(self.docs)

    # -- atom matching ------------------------------------------------------

    def _prefix_tokens(self, fname: str, prefix: str) -> list:
        vocab = self._vocab[fname]
        lo = bisect.bisect_left(vocab, prefix)
        out = []
        for i in range(lo, len(vocab)):
            if not vocab[i].startswith(prefix):
                break
            out.append(vocab[i])
        return out

    def _match_text_field(self, fname: str, q_tokens: list, truncated: bool) -> set:
        if not q_tokens:
            return set()
        candidates = None
        for t in q_tokens[:-1]:
            posting = self._postings[fname].get(t, set())
            candidates = posting if candidates is None else candidates & posting
            if not candidates:
                return set()
        if truncated:
            last_docs = set()
            for t in self._prefix_tokens(fname, q_tokens[-1]):
                last_docs |= self._postings[fname].get(t, set())
        else:
            last_docs = self._postings[fname].get(q_tokens[-1], set())
        candidates = last_docs if candidates is None else candidates & last_docs
        m = len(q_tokens)
        out = set()
        for doc_id in candidates:
            tokens = self._tokens[fname][doc_id]
            for i in range(len(tokens) - m + 1):
                if tokens[i : i + m - 1] == q_tokens[:-1]:
                    last = tokens[i + m - 1]
                    if last == q_tokens[-1] or (truncated and last.startswith(q_tokens[-1])):
                        out.add(doc_id)
                        break
        return out

    def _match_atom(self, atom: Atom) -> set:
        if atom.field == Field.MESH:
            out = set()
            for heading in self.tree.explode(atom.text):
                out |= self._mesh_postings.get(heading.lower(), set())
            return out
        if atom.field == Field.MESH_NOEXP:
            return set(self._mesh_postings.get(atom.text.lower(), set()))
        if atom.field == Field.PUBLICATION_TYPE:
            raise UnsupportedFieldError(
                "publication-type atoms cannot be executed against the local index"
            )
        q_tokens = tokenize(atom.text)
        if atom.field == Field.TITLE:
            return self._match_text_field("title", q_tokens, atom.truncated)
        if atom.field == Field.ABSTRACT:
            return self._match_text_field("abstract", q_tokens, atom.truncated)
        return self._match_text_field("title", q_tokens, atom.truncated) | self._match_text_field(
            "abstract", q_tokens, atom.truncated
        )

    # -- execution ----------------------------------------------------------

    def execute(self, node: QueryNode, date_max: date | str | None = None) -> set:
        """Set-semantics Boolean evaluation, then the date restriction."""
        result = self._execute(node)
        if date_max is not None:
            if isinstance(date_max, str):
                date_max = date.fromisoformat(date_max)
            result = {d for d in result if self.docs[d].pub_date <= date_max}
        return result

    def _execute(self, node: QueryNode) -> set:
        if isinstance(node, Atom):
            return self._match_atom(node)
        child_sets = [self._execute(c) for c in node.children]
        if node.op == Op.AND:
            out = child_sets[0]
            for s in child_sets[1:]:
                out = out & s
            return out
        if node.op == Op.OR:
            out = set()
            for s in child_sets:
                out |= s
            return out
        return child_sets[0] - child_sets[1]


def executable_violations(node: QueryNode) -> list:
    """Atoms the local engine refuses to run (publication types)."""
    out = []
    if isinstance(node, Atom):
        if node.field == Field.PUBLICATION_TYPE:
            out.append(f"[pt] atom not executable against the local index: {node.text!r}")
    else:
        for c in node.children:
            out.extend(executable_violations(c))
    return out


def ingest_documents(path, tree: MeshTree) -> DocumentIndex:
    docs = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                doc = Document(
                    doc_id=str(rec["doc_id"]),
                    title=rec["title"],
                    abstract=rec["abstract"],
                    mesh_headings=tuple(rec["mesh_headings"]),
                    pub_date=date.fromisoformat(rec["pub_date"]),
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise CorpusError(f"malformed document record: {exc}", path, lineno) from exc
            if doc.doc_id in seen:
                raise CorpusError(f"duplicate doc_id {doc.doc_id}", path, lineno)
            seen.add(doc.doc_id)
            docs.append(doc)
    return DocumentIndex(docs, tree)


# ---------------------------------------------------------------------------
# UMLS-style concept tables


@dataclass(frozen=True)
class ConceptRecord:
    cui: str
    synonym: str
    source: str
    definition: str | None = None
    semantic_type: str | None = None


@dataclass
class _SynonymRow:
    cui: str
    synonym: str
    source: str
    tokens: list = dc_field(default_factory=list)


class ConceptIndex:
    """BM25-searchable index over concept synonym strings.

    One conso row is one retrieval unit. Duplicate query terms count once.
    """

    K1 = 1.2
    B = 0.75

    def __init__(self, rows: list, definitions: dict, semantic_types: dict, relations: list):
        self.rows = rows
        self.definitions = definitions
        self.semantic_types = semantic_types
        self.relations = relations
        self.by_cui = {}
        for row in rows:
            self.by_cui.setdefault(row.cui, []).append(row)
        self._df = {}
        for row in rows:
            row.tokens = tokenize(row.synonym)
            for t in set(row.tokens):
                self._df[t] = self._df.get(t, 0) + 1
        self._n = len(rows)
        total_len = sum(len(r.tokens) for r in rows)
        self._avg_len = total_len / self._n if self._n else 0.0

    @property
    def size(self) -> int:
        return self._n

    def records(self) -> list:
        return [
            ConceptRecord(
                cui=r.cui,
                synonym=r.synonym,
                source=r.source,
                definition=self.definitions.get(r.cui),
                semantic_type=self.semantic_types.get(r.cui),
            )
            for r in self.rows
        ]

    def idf(self, term: str) -> float:
        df = self._df.get(term, 0)
        return math.log(1 + (self._n - df + 0.5) / (df + 0.5))

    def search_bm25(self, text: str, top_k: int = 10) -> list:
        """Top-k (row, score) by BM25; deterministic tie-break by row order."""
        if self._n == 0:
            raise CorpusError("concept index is empty")
        q_terms = list(dict.fromkeys(tokenize(text)))
        scored = []
        for i, row in enumerate(self.rows):
            score = 0.0
            for t in q_terms:
                tf = row.tokens.count(t)
                if tf == 0:
                    continue
                norm = tf + self.K1 * (1 - self.B + self.B * len(row.tokens) / self._avg_len)
                score += self.idf(t) * tf * (self.K1 + 1) / norm
            if score > 0.0:
                scored.append((score, i))
        scored.sort(key=lambda pair: (-pair[0], pair[1]))
        return [(self.rows[i], s) for s, i in scored[:top_k]]

    def mesh_synonyms(self, cui: str) -> list:
        """MeSH-source synonym strings of a concept, in table order."""
        return [r.synonym for r in self.by_cui.get(cui, []) if r.source == "MSH"]


def _read_pipe_table(path, n_cols: int) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("|")
            if len(parts) != n_cols:
                raise CorpusError(
                    f"expected {n_cols} pipe-delimited columns, got {len(parts)}", path, lineno
                )
            out.append(parts)
    return out


def ingest_umls_tables(conso_path, def_path, sty_path, rel_path) -> ConceptIndex:
    """Load the reduced-layout tables: CUI|SAB|STR, CUI|DEF, CUI|STY, CUI1|REL|CUI2."""
    rows = [_SynonymRow(cui=c, synonym=s, source=sab) for c, sab, s in _read_pipe_table(conso_path, 3)]
    definitions = {c: d for c, d in _read_pipe_table(def_path, 2)}
    semantic_types = {c: s for c, s in _read_pipe_table(sty_path, 2)}
    relations = [tuple(p) for p in _read_pipe_table(rel_path, 3)]
    return ConceptIndex(rows, definitions, semantic_types, relations)


# ---------------------------------------------------------------------------
# Topics and qrels


def ingest_topics(path) -> list:
    """Line-delimited JSON {topic_id, query} -> ordered (topic_id, query) pairs."""
    topics = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                topic_id, query = str(rec["topic_id"]), rec["query"]
            except (KeyError, ValueError, TypeError) as exc:
                raise CorpusError(f"malformed topic record: {exc}", path, lineno) from exc
            if topic_id in seen:
                raise CorpusError(f"duplicate topic_id {topic_id}", path, lineno)
            seen.add(topic_id)
            topics.append((topic_id, query))
    return topics


def ingest_qrels(path) -> dict:
    """TREC-style "topic_id 0 doc_id rel" lines with binary rel."""
    judgments: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise CorpusError(f"expected 4 columns, got {len(parts)}", path, lineno)
            topic_id, _, doc_id, rel = parts
            if rel not in ("0", "1"):
                raise CorpusError(f"non-binary relevance {rel!r}", path, lineno)
            judgments.setdefault(topic_id, {})[doc_id] = int(rel)
    return judgments
