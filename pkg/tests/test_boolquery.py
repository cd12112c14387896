"""Parser, serializer, normalizer, and validator tests for the query AST."""

import random

import pytest

from meshsuggest.boolquery import (
    Atom,
    BoolOp,
    Field,
    Op,
    ParseError,
    iter_atoms,
    node_from_json,
    node_to_json,
    normalize,
    parse_query,
    serialize_query,
    validate,
)
from oracles import random_query_tree, trees_equivalent


def atom(text, field="title_abstract", truncated=False):
    return {"type": "atom", "text": text, "field": field, "truncated": truncated}


def op(name, *children):
    return {"type": "op", "op": name, "children": list(children)}


class TestParse:
    def test_single_truncated_atom(self):
        node = parse_query("liver biops*[tiab]")
        assert node == Atom("liver biops", Field.TITLE_ABSTRACT, truncated=True)

    def test_nested_and_of_ors(self):
        node = parse_query("(hepatic OR liver) AND (fibrosis OR cirrhosis)")
        expected = BoolOp(
            Op.AND,
            (
                BoolOp(Op.OR, (Atom("hepatic"), Atom("liver"))),
                BoolOp(Op.OR, (Atom("fibrosis"), Atom("cirrhosis"))),
            ),
        )
        assert node == expected

    def test_and_binds_tighter_than_or(self):
        """Hand-built reference parse, checked structurally and by truth table."""
        node = parse_query("a AND b OR c")
        expected = op("OR", op("AND", atom("a"), atom("b")), atom("c"))
        assert node_to_json(node) == expected
        assert trees_equivalent(node_to_json(node), expected)

    def test_not_binds_tighter_than_and(self):
        node = parse_query("a NOT b AND c")
        expected = op("AND", op("NOT", atom("a"), atom("b")), atom("c"))
        assert node_to_json(node) == expected

    def test_chained_not_left_associative(self):
        node = parse_query("a NOT b NOT c")
        expected = op("NOT", op("NOT", atom("a"), atom("b")), atom("c"))
        assert node_to_json(node) == expected

    def test_adjacent_terms_form_phrase(self):
        assert parse_query("transient elastography") == Atom("transient elastography")

    def test_lowercase_keywords_are_phrase_words(self):
        assert parse_query("salt and pepper") == Atom("salt and pepper")

    def test_quotes_stripped_and_whitespace_collapsed(self):
        assert parse_query('"liver   biopsy"') == Atom("liver biopsy")

    def test_field_tags_case_insensitive(self):
        assert parse_query("fibrosis[MESH]").field == Field.MESH
        assert parse_query("fibrosis[Tiab]").field == Field.TITLE_ABSTRACT
        assert parse_query("fibrosis[MH:NOEXP]").field == Field.MESH_NOEXP
        assert parse_query("fibrosis[ti]").field == Field.TITLE
        assert parse_query("fibrosis[ab]").field == Field.ABSTRACT
        assert parse_query("review[pt]").field == Field.PUBLICATION_TYPE

    def test_wildcard_inside_quotes(self):
        node = parse_query('"transient elastograph*"')
        assert node == Atom("transient elastograph", truncated=True)

    def test_parse_is_normalized(self):
        node = parse_query("((a OR b) OR c)")
        assert node == BoolOp(Op.OR, (Atom("a"), Atom("b"), Atom("c")))


class TestParseErrors:
    @pytest.mark.parametrize(
        "text",
        [
            "(a OR b",
            "a OR b)",
            "foo[xyz]",
            "a AND",
            "OR a",
            "",
            "   ",
            '"unterminated',
            "li*ver",
            '""[tiab]',
            "*",
            "[tiab]",
            "foo[tiab",
        ],
    )
    def test_malformed_input_raises(self, text):
        with pytest.raises(ParseError):
            parse_query(text)

    def test_error_carries_position_within_bounds(self):
        texts = ["(a OR b", "foo[xyz] AND bar", "a AND AND b"]
        for text in texts:
            with pytest.raises(ParseError) as err:
                parse_query(text)
            assert 0 <= err.value.position <= len(text)
            assert err.value.snippet in text

    def test_unsupported_dialect(self):
        with pytest.raises(ValueError):
            parse_query("a", dialect="ovid")


class TestSerialize:
    def test_comma_phrase_quoted_with_mesh_tag(self):
        node = Atom("Biopsy, Needle", Field.MESH)
        assert serialize_query(node) == '"Biopsy, Needle"[Mesh]'

    def test_minimal_or(self):
        node = BoolOp(Op.OR, (Atom("a"), Atom("b")))
        assert serialize_query(node) == "(a OR b)"

    def test_truncation_marker_inside_quotes(self):
        node = Atom("liver biops", truncated=True)
        assert serialize_query(node) == '"liver biops*"'

    def test_noexp_tag(self):
        node = Atom("Liver Cirrhosis", Field.MESH_NOEXP)
        assert serialize_query(node) == '"Liver Cirrhosis"[Mesh:NoExp]'

    def test_roundtrip_equals_normalize_on_random_trees(self):
        """parse(serialize(t)) == normalize(t) over generated valid trees."""
        rng = random.Random(4021)
        tokens = ["liver", "biopsy", "fibrosis", "cirrhosis", "elastography", "screening"]
        phrases = ["liver biopsy", "transient elastography", "hepatic fibrosis staging"]
        headings = ["Liver Cirrhosis", "Biopsy, Needle", "Elasticity Imaging Techniques"]
        for _ in range(300):
            tree_json = random_query_tree(rng, tokens, phrases, headings, depth=3)
            node = node_from_json(tree_json)
            assert parse_query(serialize_query(node)) == normalize(node)

    def test_fixpoint_on_query_text(self):
        queries = [
            "a AND b OR c NOT d",
            '("Elasticity Imaging Techniques"[Mesh] OR "transient elastograph*" OR fibroscan)'
            ' AND ("liver biops*" OR "Biopsy, Needle"[Mesh])',
            "(hepatic OR liver) AND (fibrosis OR cirrhosis)",
        ]
        for q in queries:
            once = parse_query(q)
            assert parse_query(serialize_query(once)) == once


class TestNormalize:
    def test_flattens_same_operator(self):
        node = BoolOp(Op.OR, (BoolOp(Op.OR, (Atom("a"), Atom("b"))), Atom("c")))
        assert normalize(node) == BoolOp(Op.OR, (Atom("a"), Atom("b"), Atom("c")))

    def test_unary_collapse(self):
        assert normalize(BoolOp(Op.AND, (Atom("a"),))) == Atom("a")

    def test_preserves_child_order(self):
        node = BoolOp(Op.AND, (Atom("z"), BoolOp(Op.AND, (Atom("a"), Atom("m")))))
        assert normalize(node) == BoolOp(Op.AND, (Atom("z"), Atom("a"), Atom("m")))

    def test_does_not_flatten_through_not(self):
        inner = BoolOp(Op.NOT, (Atom("a"), Atom("b")))
        node = BoolOp(Op.AND, (inner, Atom("c")))
        assert normalize(node) == node

    def test_truth_table_semantics_preserved(self):
        rng = random.Random(77)
        tokens = ["a", "b", "c", "d"]
        for _ in range(200):
            tree_json = random_query_tree(rng, tokens, [], [], depth=3)
            node = node_from_json(tree_json)
            assert trees_equivalent(tree_json, node_to_json(normalize(node)))


class TestValidate:
    def test_valid_tree_has_no_violations(self):
        node = parse_query("(a OR b) AND c NOT d")
        assert validate(node) == []

    def test_not_arity(self):
        node = BoolOp(Op.NOT, (Atom("a"),))
        violations = validate(node)
        assert len(violations) == 1
        assert "NOT" in violations[0]

    def test_empty_atom_text(self):
        violations = validate(Atom("   "))
        assert len(violations) == 1
        assert "empty" in violations[0]

    def test_single_child_or(self):
        assert validate(BoolOp(Op.OR, (Atom("a"),)))

    def test_nested_violations_all_reported(self):
        node = BoolOp(Op.AND, (Atom(""), BoolOp(Op.NOT, (Atom("b"),))))
        assert len(validate(node)) == 2


class TestJsonInterchange:
    def test_roundtrip(self):
        node = parse_query('("liver biops*" OR "Biopsy, Needle"[Mesh]) NOT review[pt]')
        assert node_from_json(node_to_json(node)) == node

    def test_field_defaults_on_load(self):
        assert node_from_json({"type": "atom", "text": "liver"}) == Atom("liver")

    def test_unknown_type_rejected(self):
        with pytest.raises(ValueError):
            node_from_json({"type": "proximity", "text": "x"})


class TestGoldenCorpus:
    """The bundled query corpus with hand-written expected ASTs."""

    def test_parser_total_over_corpus(self, golden_queries):
        assert len(golden_queries) == 20
        for _, text, _ in golden_queries:
            parse_query(text)

    def test_parses_match_expected_asts(self, golden_queries):
        for name, text, expected in golden_queries:
            assert node_to_json(parse_query(text)) == expected, name

    def test_truth_table_equivalence(self, golden_queries):
        for name, text, expected in golden_queries:
            assert trees_equivalent(node_to_json(parse_query(text)), expected), name

    def test_serialize_roundtrip_identical_asts(self, golden_queries):
        for name, text, _ in golden_queries:
            node = parse_query(text)
            assert parse_query(serialize_query(node)) == node, name


def test_iter_atoms_document_order():
    node = parse_query("(a OR b) AND c")
    assert [a.text for a in iter_atoms(node)] == ["a", "b", "c"]
