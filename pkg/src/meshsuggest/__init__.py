"""MeSH term suggestion for systematic-review Boolean queries.

Subpackages cover the full pipeline: query parsing and fragmenting,
candidate retrieval, learning-to-rank, cutoff refinement, query
reconstruction, local Boolean search, and evaluation.
"""

from meshsuggest.boolquery import (
    Atom,
    BoolOp,
    Field,
    Op,
    ParseError,
    QueryNode,
    normalize,
    parse_query,
    serialize_query,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "BoolOp",
    "Field",
    "Op",
    "ParseError",
    "QueryNode",
    "normalize",
    "parse_query",
    "serialize_query",
    "validate",
    "__version__",
]
