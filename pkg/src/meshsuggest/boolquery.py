"""PubMed-dialect Boolean query AST: parsing, serialization, normalization.

Queries are trees of :class:`Atom` leaves under AND/OR/NOT operator nodes.
AND and OR are n-ary; NOT is binary set difference (left minus right),
following PubMed semantics. Operator keywords must be uppercase; lowercase
``and``/``or``/``not`` are treated as ordinary phrase words.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field


class Field(enum.Enum):
    TITLE_ABSTRACT = "title_abstract"
    TITLE = "title"
    ABSTRACT = "abstract"
    MESH = "mesh"
    MESH_NOEXP = "mesh_noexp"
    PUBLICATION_TYPE = "publication_type"


class Op(enum.Enum):
    AND = "AND"
    OR = "OR"
    NOT = "NOT"


# Recognized field tags, lowercased. New tags extend the dialect here.
FIELD_TAGS = {
    "tiab": Field.TITLE_ABSTRACT,
    "ti": Field.TITLE,
    "ab": Field.ABSTRACT,
    "pt": Field.PUBLICATION_TYPE,
    "mh": Field.MESH,
    "mesh": Field.MESH,
    "mh:noexp": Field.MESH_NOEXP,
    "mesh:noexp": Field.MESH_NOEXP,
}

# Canonical tag emitted per field; TITLE_ABSTRACT is the untagged default.
FIELD_LABELS = {
    Field.TITLE: "ti",
    Field.ABSTRACT: "ab",
    Field.MESH: "Mesh",
    Field.MESH_NOEXP: "Mesh:NoExp",
    Field.PUBLICATION_TYPE: "pt",
}


@dataclass(frozen=True)
class Atom:
    """A single term or phrase, optionally truncated, restricted to a field."""

    text: str
    field: Field = Field.TITLE_ABSTRACT
    truncated: bool = False


@dataclass(frozen=True)
class BoolOp:
    op: Op
    children: tuple = dc_field(default_factory=tuple)


# A query node is either an Atom or a BoolOp.
QueryNode = Atom | BoolOp


class ParseError(ValueError):
    """Raised on malformed query text; carries the offending offset."""

    def __init__(self, message: str, position: int, text: str):
        self.message = message
        self.position = min(max(position, 0), len(text))
        lo = max(0, self.position - 20)
        self.snippet = text[lo : self.position + 20]
        super().__init__(f"{message} at offset {self.position}: ...{self.snippet}...")


_WORD_BREAK = set('()[]" \t\r\n')


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c == "(":
            tokens.append(("lparen", "", i))
            i += 1
        elif c == ")":
            tokens.append(("rparen", "", i))
            i += 1
        elif c == '"':
            end = text.find('"', i + 1)
            if end < 0:
                raise ParseError("unterminated quote", i, text)
            tokens.append(("quoted", text[i + 1 : end], i))
            i = end + 1
        elif c == "[":
            end = text.find("]", i + 1)
            if end < 0:
                raise ParseError("unterminated field tag", i, text)
            tag = text[i + 1 : end].strip().lower()
            if tag not in FIELD_TAGS:
                raise ParseError(f"unknown field tag [{text[i + 1:end]}]", i, text)
            tokens.append(("field", tag, i))
            i = end + 1
        else:
            j = i
            while j < n and text[j] not in _WORD_BREAK:
                j += 1
            word = text[i:j]
            if word in ("AND", "OR", "NOT"):
                tokens.append(("op", word, i))
            else:
                tokens.append(("word", word, i))
            i = j
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next_pos(self) -> int:
        tok = self.peek()
        return tok[2] if tok else len(self.text)

    def parse(self) -> QueryNode:
        node = self.parse_or()
        if self.peek() is not None:
            kind, value, pos = self.peek()
            raise ParseError(f"unexpected {value or kind}", pos, self.text)
        return node

    def parse_or(self) -> QueryNode:
        parts = [self.parse_and()]
        while self.peek() and self.peek()[:2] == ("op", "OR"):
            self.pos += 1
            parts.append(self.parse_and())
        return parts[0] if len(parts) == 1 else BoolOp(Op.OR, tuple(parts))

    def parse_and(self) -> QueryNode:
        parts = [self.parse_not()]
        while self.peek() and self.peek()[:2] == ("op", "AND"):
            self.pos += 1
            parts.append(self.parse_not())
        return parts[0] if len(parts) == 1 else BoolOp(Op.AND, tuple(parts))

    def parse_not(self) -> QueryNode:
        node = self.parse_primary()
        while self.peek() and self.peek()[:2] == ("op", "NOT"):
            self.pos += 1
            right = self.parse_primary()
            node = BoolOp(Op.NOT, (node, right))
        return node

    def parse_primary(self) -> QueryNode:
        tok = self.peek()
        if tok is None:
            raise ParseError("expected term or parenthesized clause", len(self.text), self.text)
        kind, value, pos = tok
        if kind == "lparen":
            self.pos += 1
            node = self.parse_or()
            closing = self.peek()
            if closing is None or closing[0] != "rparen":
                raise ParseError("unbalanced parentheses", pos, self.text)
            self.pos += 1
            return node
        if kind in ("word", "quoted"):
            return self.parse_atom()
        if kind == "op":
            raise ParseError(f"dangling operator {value}", pos, self.text)
        raise ParseError(f"unexpected {value or kind}", pos, self.text)

    def parse_atom(self) -> Atom:
        start = self.next_pos()
        pieces = []
        while self.peek() and self.peek()[0] in ("word", "quoted"):
            pieces.append(self.peek()[1])
            self.pos += 1
        field = Field.TITLE_ABSTRACT
        if self.peek() and self.peek()[0] == "field":
            field = FIELD_TAGS[self.peek()[1]]
            self.pos += 1
        text = " ".join(" ".join(pieces).split())
        truncated = False
        if text.endswith("*"):
            truncated = True
            text = text[:-1].rstrip()
        if not text:
            raise ParseError("empty term", start, self.text)
        if "*" in text:
            raise ParseError("wildcard only allowed at the end of a term", start, self.text)
        return Atom(text=text, field=field, truncated=truncated)


def parse_query(text: str, dialect: str = "pubmed") -> QueryNode:
    """Parse query text into a normalized AST.

    Untagged terms default to title/abstract; adjacent terms form one
    phrase atom; a trailing ``*`` marks truncation; operator precedence is
    NOT > AND > OR. Raises :class:`ParseError` on malformed input, unknown
    field tags, or dangling operators.
    """
    if dialect != "pubmed":
        raise ValueError(f"unsupported dialect: {dialect}")
    if not text or not text.strip():
        raise ParseError("empty query", 0, text or "")
    return normalize(_Parser(text).parse())


def normalize(node: QueryNode) -> QueryNode:
    """Flatten nested same-operator AND/OR nodes and collapse unary ones."""
    if isinstance(node, Atom):
        return node
    children = [normalize(c) for c in node.children]
    if node.op in (Op.AND, Op.OR):
        flat = []
        for c in children:
            if isinstance(c, BoolOp) and c.op == node.op:
                flat.extend(c.children)
            else:
                flat.append(c)
        if len(flat) == 1:
            return flat[0]
        return BoolOp(node.op, tuple(flat))
    return BoolOp(node.op, tuple(children))


def _needs_quotes(rendered: str) -> bool:
    return " " in rendered or "," in rendered


def _serialize(node: QueryNode) -> str:
    if isinstance(node, Atom):
        rendered = node.text + ("*" if node.truncated else "")
        if _needs_quotes(rendered):
            rendered = f'"{rendered}"'
        label = FIELD_LABELS.get(node.field)
        return rendered + (f"[{label}]" if label else "")
    sep = f" {node.op.value} "
    return "(" + sep.join(_serialize(c) for c in node.children) + ")"


def serialize_query(node: QueryNode) -> str:
    """Render a query as parseable text.

    The output is deterministic and parses back to ``normalize(node)``.
    Atoms containing spaces or commas are quoted; title/abstract atoms
    carry no field tag (the parse-time default).
    """
    return _serialize(normalize(node))


def validate(node: QueryNode) -> list[str]:
    """Return a list of invariant violations; empty means the tree is valid."""
    violations = []

    def visit(n, path):
        if isinstance(n, Atom):
            if not n.text.strip():
                violations.append(f"{path}: atom has empty text")
            elif "*" in n.text:
                violations.append(f"{path}: atom text contains reserved wildcard character")
            elif n.truncated and not n.text.split()[-1]:
                violations.append(f"{path}: truncated atom has empty final token")
            return
        if not isinstance(n, BoolOp):
            violations.append(f"{path}: unknown node type {type(n).__name__}")
            return
        if n.op == Op.NOT and len(n.children) != 2:
            violations.append(f"{path}: NOT requires exactly 2 children, got {len(n.children)}")
        elif n.op in (Op.AND, Op.OR) and len(n.children) < 2:
            violations.append(f"{path}: {n.op.value} requires >=2 children, got {len(n.children)}")
        for i, c in enumerate(n.children):
            visit(c, f"{path}.{i}")

    visit(node, "root")
    return violations


def iter_atoms(node: QueryNode):
    """Yield all atoms in document order."""
    if isinstance(node, Atom):
        yield node
    else:
        for c in node.children:
            yield from iter_atoms(c)


def node_to_json(node: QueryNode) -> dict:
    """Encode a node as the documented JSON interchange structure."""
    if isinstance(node, Atom):
        return {
            "type": "atom",
            "text": node.text,
            "field": node.field.value,
            "truncated": node.truncated,
        }
    return {
        "type": "op",
        "op": node.op.value,
        "children": [node_to_json(c) for c in node.children],
    }


def node_from_json(data: dict) -> QueryNode:
    if data["type"] == "atom":
        return Atom(
            text=data["text"],
            field=Field(data.get("field", "title_abstract")),
            truncated=bool(data.get("truncated", False)),
        )
    if data["type"] == "op":
        return BoolOp(Op(data["op"]), tuple(node_from_json(c) for c in data["children"]))
    raise ValueError(f"unknown node type: {data.get('type')!r}")
