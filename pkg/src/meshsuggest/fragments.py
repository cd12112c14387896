"""Query fragmenting and rebuilding.

A fragment is one immediate operand of a query's outermost AND. Fragments
carry the gold MeSH headings found in their subtree; fragments without any
MeSH atom are pass-through: they skip the suggestion task and are kept
verbatim when the query is rebuilt.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from meshsuggest.boolquery import (
    Atom,
    BoolOp,
    Field,
    Op,
    QueryNode,
    iter_atoms,
    normalize,
    parse_query,
    serialize_query,
)
from meshsuggest.corpus import tokenize

MESH_FIELDS = (Field.MESH, Field.MESH_NOEXP)


class EmptyFragment(ValueError):
    """Stripping MeSH atoms left nothing to execute."""


class UnknownFragmentId(KeyError):
    pass


@dataclass(frozen=True)
class Fragment:
    fragment_id: str
    topic_id: str
    node: QueryNode
    free_text_clauses: tuple
    gold_mesh: tuple
    q: tuple

    @property
    def passthrough(self) -> bool:
        return not self.gold_mesh

    def gold_set(self) -> set:
        """Lowercased gold headings for case-insensitive comparison."""
        return {h.lower() for h in self.gold_mesh}

    def clause_texts(self) -> tuple:
        return tuple(c.text for c in self.free_text_clauses)


def extract_gold_mesh(node: QueryNode) -> tuple:
    """MeSH-field atom headings, deduplicated case-insensitively in order."""
    if isinstance(node, Fragment):
        node = node.node
    seen = {}
    for atom in iter_atoms(node):
        if atom.field in MESH_FIELDS and atom.text.lower() not in seen:
            seen[atom.text.lower()] = atom.text
    return tuple(seen.values())


def _free_text_clauses(node: QueryNode) -> tuple:
    seen = []
    for atom in iter_atoms(node):
        if atom.field not in MESH_FIELDS and atom not in seen:
            seen.append(atom)
    return tuple(seen)


def _make_fragment(node: QueryNode, topic_id: str, ordinal: int) -> Fragment:
    clauses = _free_text_clauses(node)
    terms = dict.fromkeys(t for c in clauses for t in tokenize(c.text))
    return Fragment(
        fragment_id=f"{topic_id}:{ordinal}",
        topic_id=topic_id,
        node=node,
        free_text_clauses=clauses,
        gold_mesh=extract_gold_mesh(node),
        q=tuple(terms),
    )


def _split_root(query: QueryNode, boundaries=None) -> list:
    query = normalize(query)
    if isinstance(query, BoolOp) and query.op == Op.AND:
        parts = list(query.children)
    else:
        parts = [query]
    if boundaries is None:
        return parts
    flat = sorted(i for group in boundaries for i in group)
    if flat != list(range(len(parts))):
        raise ValueError(
            f"boundary groups must partition the {len(parts)} top-level operands, got {boundaries}"
        )
    merged = []
    for group in boundaries:
        members = [parts[i] for i in group]
        merged.append(members[0] if len(members) == 1 else normalize(BoolOp(Op.AND, tuple(members))))
    return merged


def fragment(query: QueryNode, topic_id: str, boundaries=None) -> list:
    """Split a query into fragments: the operands of the outermost AND.

    A root that is not an AND yields a single fragment. ``boundaries``
    optionally overrides the default rule with an explicit partition of the
    top-level operand indexes; grouped operands merge into one AND fragment.
    """
    parts = _split_root(query, boundaries)
    return [_make_fragment(node, topic_id, i + 1) for i, node in enumerate(parts)]


def _strip(node: QueryNode):
    """Remove MeSH atoms; None marks a subtree that vanished entirely."""
    if isinstance(node, Atom):
        return None if node.field in MESH_FIELDS else node
    kept = [(_strip(c), c) for c in node.children]
    if node.op == Op.NOT:
        left, right = kept[0][0], kept[1][0]
        if left is None:
            return None
        if right is None:
            return left
        return BoolOp(Op.NOT, (left, right))
    children = tuple(s for s, _ in kept if s is not None)
    if not children:
        return None
    if len(children) == 1:
        return children[0]
    return BoolOp(node.op, children)


def strip_mesh(f) -> QueryNode:
    """The fragment subtree with MeSH atoms removed and operators renormalized.

    Inside a NOT, a vanished left side removes the whole difference; a
    vanished right side leaves the left operand alone. Raises
    :class:`EmptyFragment` when the fragment was MeSH-only.
    """
    node = f.node if isinstance(f, Fragment) else f
    stripped = _strip(node)
    if stripped is None:
        fid = f.fragment_id if isinstance(f, Fragment) else "<node>"
        raise EmptyFragment(f"fragment {fid} contains only MeSH atoms")
    return normalize(stripped)


def defragment(query: QueryNode, suggestions: dict, topic_id: str, boundaries=None) -> QueryNode:
    """Rebuild the query with suggested headings in place of the original MeSH.

    Each non-pass-through fragment becomes OR(suggested headings as exploded
    MeSH atoms, MeSH-stripped fragment); fragments missing from
    ``suggestions`` get an empty list. Pass-through fragments are kept
    verbatim and may not appear in ``suggestions``. Suggested headings are
    deduplicated case-insensitively; the suggestion count need not match the
    original MeSH count.
    """
    fragments = fragment(query, topic_id, boundaries)
    known = {f.fragment_id: f for f in fragments}
    for fid in suggestions:
        if fid not in known:
            raise UnknownFragmentId(fid)
        if known[fid].passthrough:
            raise ValueError(f"fragment {fid} is pass-through; it accepts no suggestions")
    rebuilt = []
    for f in fragments:
        if f.passthrough:
            rebuilt.append(f.node)
            continue
        headings = {}
        for h in suggestions.get(f.fragment_id, []):
            headings.setdefault(h.lower(), h)
        atoms = tuple(Atom(h, Field.MESH) for h in headings.values())
        stripped = _strip(f.node)
        if stripped is None and not atoms:
            raise EmptyFragment(
                f"fragment {f.fragment_id} contains only MeSH atoms and no replacement"
            )
        parts = atoms + ((normalize(stripped),) if stripped is not None else ())
        rebuilt.append(normalize(BoolOp(Op.OR, parts)) if len(parts) > 1 else parts[0])
    if len(rebuilt) == 1:
        return normalize(rebuilt[0])
    return normalize(BoolOp(Op.AND, tuple(rebuilt)))


# ---------------------------------------------------------------------------
# Line-delimited interchange between CLI stages


def fragment_to_json(f: Fragment) -> dict:
    return {
        "fragment_id": f.fragment_id,
        "topic_id": f.topic_id,
        "query": serialize_query(f.node),
        "free_text_clauses": [serialize_query(c) for c in f.free_text_clauses],
        "gold_mesh": list(f.gold_mesh),
    }


def fragment_from_json(rec: dict) -> Fragment:
    topic_id = rec["topic_id"]
    ordinal = int(rec["fragment_id"].rsplit(":", 1)[1])
    return _make_fragment(parse_query(rec["query"]), topic_id, ordinal)


def dump_fragments(fragments: list, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for f in fragments:
            fh.write(json.dumps(fragment_to_json(f), sort_keys=True) + "\n")


def load_fragments(path) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(fragment_from_json(json.loads(line)))
    return out
