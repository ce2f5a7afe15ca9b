import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conceptbank import StopwordPolicy, normalize_name, singularize, tokenize_class_name
from conceptbank.text import (
    ATTRIBUTE,
    NOUN,
    irregular_plurals,
    parse_pairs,
    parse_wordlist,
)


@pytest.fixture(scope="module")
def policy():
    return StopwordPolicy.default()


def test_normalize_examples(policy):
    assert normalize_name("a baseball bat", policy, NOUN) == "baseball bat"
    assert normalize_name("The Dogs!", policy, NOUN) == "dog"
    assert normalize_name("is the a", policy, NOUN) == ""


def test_attribute_policy_keeps_colors(policy):
    assert normalize_name("white", policy, ATTRIBUTE) == "white"
    assert normalize_name("white", policy, NOUN) == ""
    assert "white" not in policy.attribute_stopwords


def test_singularize_examples():
    assert singularize("dogs") == "dog"
    assert singularize("boxes") == "box"
    assert singularize("building") == "building"  # verbs never lemmatized
    assert singularize("horses") == "horse"
    assert singularize("churches") == "church"
    assert singularize("dishes") == "dish"
    assert singularize("kisses") == "kiss"
    assert singularize("grass") == "grass"
    assert singularize("cities") == "city"
    assert singularize("children") == "child"
    assert singularize("people") == "person"
    assert singularize("buses") == "bus"
    assert singularize("leaves") == "leaf"


def test_singularize_never_empty():
    for word in ("s", "es", "ss", "x", "a"):
        assert singularize(word) != ""


def test_irregular_table_values_are_fixed_points():
    # Required for idempotence: whatever the table emits must map to itself.
    for plural, singular in irregular_plurals().items():
        assert singularize(singular) == singular, (plural, singular)


def test_tokenize_class_name_examples(policy):
    assert tokenize_class_name(
        "riding_a_horse", policy, {"riding": "ride"}) == ["ride", "horse"]
    assert tokenize_class_name("fishing", policy) == ["fishing"]
    assert tokenize_class_name(
        "holding_an_umbrella", policy) == ["holding", "umbrella"]


words = st.text(
    alphabet=string.ascii_lowercase + string.digits + "ß" + "é",
    min_size=1, max_size=12)
phrases = st.lists(words, min_size=0, max_size=5).map(" ".join)


@settings(max_examples=300, deadline=None)
@given(phrases)
def test_normalize_idempotent(phrase):
    policy = StopwordPolicy.default()
    once = normalize_name(phrase, policy, NOUN)
    assert normalize_name(once, policy, NOUN) == once


@settings(max_examples=300, deadline=None)
@given(words)
def test_singularize_idempotent_and_nonempty(word):
    once = singularize(word)
    assert once != ""
    assert singularize(once) == once


@settings(max_examples=200, deadline=None)
@given(st.text(min_size=0, max_size=30))
def test_key_charset(raw):
    policy = StopwordPolicy.default()
    key = normalize_name(raw, policy, NOUN)
    assert "  " not in key
    assert key == key.strip()
    for ch in key:
        assert ch == " " or ch.isalnum()
        assert not ch.isupper()


def test_wordlist_parsing():
    lines = ["# comment", "", "dog  ", "Cat # trailing", "bird"]
    assert parse_wordlist(lines) == {"dog", "cat", "bird"}


def test_pairs_parsing():
    assert parse_pairs(["riding ride", "# x", "walking walk"]) == {
        "riding": "ride", "walking": "walk"}
    with pytest.raises(ValueError):
        parse_pairs(["too many fields here"])


def test_unicode_words_kept_casefolded(policy):
    assert normalize_name("Café", policy, NOUN) == "café"
