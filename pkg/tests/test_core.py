import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from metasynth.core import (Exemplar, Guardrails, ProductPage, RequiredElement, Snippet, check_required_elements,
                            concat_snippet, cosine_similarity, normalize, sanitize, scan_hard_constraints,
                            split_snippet)
from metasynth.errors import InvalidArgumentError

from .oracles import substring_hits


def test_concat_examples():
    assert concat_snippet("Red Mug", "Ceramic 12oz mug.") == "Red Mug || Ceramic 12oz mug."
    assert concat_snippet("A", "B") == "A || B"
    assert concat_snippet("X || Y", "Z") == "X | Y || Z"


def test_split_without_separator():
    with pytest.raises(InvalidArgumentError):
        split_snippet("no separator here")


text = st.text(alphabet=st.characters(blacklist_categories=("Cc", "Cs")), min_size=1, max_size=40)


@given(text, text)
def test_concat_roundtrips_sanitized_parts(title, description):
    t, d = sanitize(title), sanitize(description)
    assert split_snippet(concat_snippet(t, d)) == (t, d)


@given(text)
def test_sanitize_is_idempotent(s):
    assert sanitize(sanitize(s)) == sanitize(s)
    assert "||" not in sanitize(s)


def test_cosine_examples():
    v = normalize([0.3, -0.2, 0.9])
    assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-12)
    assert cosine_similarity([1, 0, 0], [0, 1, 0]) == 0.0
    assert cosine_similarity(normalize([1, 1, 0]), normalize([1, 0, 0])) == pytest.approx(1 / math.sqrt(2), abs=1e-12)


def test_cosine_shape_mismatch():
    with pytest.raises(InvalidArgumentError):
        cosine_similarity([1, 0], [1, 0, 0])


vectors = st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=3).filter(
    lambda v: math.fsum(x * x for x in v) > 1e-6)


@given(vectors, vectors)
def test_cosine_symmetric_and_bounded(a, b):
    ab, ba = cosine_similarity(a, b), cosine_similarity(b, a)
    assert abs(ab - ba) <= 1e-12
    assert -1.0 <= ab <= 1.0


def test_scan_examples():
    g = Guardrails(hard_prohibitions=("guaranteed",))
    hits = scan_hard_constraints("Best price guaranteed!", g)
    assert [(v.phrase, v.span) for v in hits] == [("guaranteed", (11, 21))]
    assert scan_hard_constraints("Soft cotton tee.", g) == []
    two = scan_hard_constraints("GUARANTEED cure", Guardrails(hard_prohibitions=("guaranteed", "cure")))
    assert sorted(v.phrase for v in two) == ["cure", "guaranteed"]


def test_scan_pattern_entry():
    g = Guardrails(hard_prohibitions=("re:\\b\\d+% off\\b",))
    hits = scan_hard_constraints("Now 20% off everything", g)
    assert [v.matched for v in hits] == ["20% off"]


phrases = st.lists(st.text(alphabet="abc xyz", min_size=1, max_size=4).filter(str.strip), min_size=1, max_size=4,
                   unique=True)


@given(st.text(alphabet="abcxyz ABC", max_size=30), phrases)
def test_scan_agrees_with_substring_oracle(s, hard):
    found = {v.phrase for v in scan_hard_constraints(s, Guardrails(hard_prohibitions=tuple(hard)))}
    assert found == substring_hits(s, hard)


def test_required_examples():
    cta = RequiredElement("cta", phrases=("shop now", "buy now"))
    brand = RequiredElement("brand", phrases=("Acme",))
    assert check_required_elements(Snippet("Mug", "Shop now"), Guardrails(required_elements=(cta,))) == []
    assert check_required_elements(Snippet("Mug", "A mug."), Guardrails(required_elements=(brand,))) == ["brand"]
    both = Guardrails(required_elements=(cta, brand))
    assert check_required_elements(Snippet("Mug", "Buy Now!"), both) == ["brand"]


def test_required_element_spec_forms():
    assert RequiredElement.from_spec("cta", ["a", "b"]).phrases == ("a", "b")
    assert RequiredElement.from_spec("sku", "re:[A-Z]{3}-\\d+").pattern == "[A-Z]{3}-\\d+"
    assert RequiredElement.from_spec("brand", "Acme").phrases == ("Acme",)
    assert RequiredElement.from_spec("sku", "re:x").to_spec() == "re:x"
    with pytest.raises(InvalidArgumentError):
        RequiredElement("x")


def test_guardrails_validation():
    with pytest.raises(InvalidArgumentError):
        Guardrails(thresholds={"rel": 0.5})
    with pytest.raises(InvalidArgumentError):
        Guardrails(thresholds={"rel": 1.5, "promo": 0, "cta": 1, "brand": 1})
    with pytest.raises(InvalidArgumentError):
        Guardrails(hard_prohibitions=("",))
    g = Guardrails.from_dict({"hard": ["x"], "required": {"cta": ["shop now"]}, "thresholds": {"rel": 0.6}})
    assert Guardrails.from_dict(g.to_dict()) == g


def test_page_and_snippet_validation():
    with pytest.raises(InvalidArgumentError):
        ProductPage("p", "not a url", (("name", "x"),))
    with pytest.raises(InvalidArgumentError):
        ProductPage("p", "https://a.example/x", (("name", " "),))
    with pytest.raises(InvalidArgumentError):
        Snippet("", "x")
    with pytest.raises(InvalidArgumentError):
        Snippet("a\x00", "x")
    page = ProductPage.from_dict({"page_id": "p", "url": "https://a.example/x",
                                  "attributes": [{"name": "name", "value": "Mug"}, {"name": "brand", "value": "A"}]})
    assert page.get("brand") == "A"
    assert ProductPage.from_dict(page.to_dict()) == page


def test_exemplar_embedding_checks():
    with pytest.raises(InvalidArgumentError):
        Exemplar("q", "https://a.example", "t", "d", 1, np.array([1.0, 1.0]))
    with pytest.raises(InvalidArgumentError):
        Exemplar("q", "https://a.example", "t", "d", 0, np.array([1.0, 0.0]))
    e = Exemplar("q", "https://a.example", "t", "d", 1, np.array([0.0, 1.0]))
    assert not e.embedding.flags.writeable
