"""Canonical text form: stability, portability, hashing."""

import json
import math

import pytest
from hypothesis import given, strategies as st

from wallspace.canonical import canonical_text, encode_number, fnv1a64, state_hash


def test_keys_sorted_and_compact():
    assert canonical_text({"b": 1, "a": [1, 2], "c": None}) == '{"a":[1,2],"b":1,"c":null}'


def test_booleans_and_null():
    assert canonical_text([True, False, None]) == "[true,false,null]"


@pytest.mark.parametrize(
    "value,expected",
    [
        (1, "1"),
        (0, "0"),
        (-3, "-3"),
        (1.0, "1"),
        (2.5, "2.5"),
        (0.30000000000000004, "0.3"),
        (0.1 + 0.2, "0.3"),
        (1e-7, "0"),  # below the 6-decimal grain
        (0.000001, "0.000001"),
        (-0.5, "-0.5"),
        (12690.0, "12690"),
    ],
)
def test_number_encoding(value, expected):
    assert encode_number(value) == expected


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        canonical_text(math.inf)
    with pytest.raises(ValueError):
        canonical_text(math.nan)


def test_string_escaping_matches_json():
    tricky = 'quote " backslash \\ newline \n tab \t control \x01 unicode é漢'
    assert canonical_text(tricky) == json.dumps(tricky, ensure_ascii=False)


def test_non_string_keys_rejected():
    with pytest.raises(TypeError):
        canonical_text({1: "x"})


_scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=-(10**12), max_value=10**12),
    st.floats(min_value=0, max_value=1e6, allow_nan=False, allow_infinity=False).map(
        lambda v: round(v, 6)
    ),
    st.text(max_size=20),
)
_documents = st.recursive(
    _scalars,
    lambda inner: st.one_of(
        st.lists(inner, max_size=4),
        st.dictionaries(st.text(max_size=8), inner, max_size=4),
    ),
    max_leaves=20,
)


@given(_documents)
def test_output_is_parseable_json_and_stable(doc):
    text = canonical_text(doc)
    parsed = json.loads(text)
    # canonical form is a fixed point: re-encoding the parse gives the same text
    assert canonical_text(parsed) == text


def test_state_hash_changes_with_content():
    assert state_hash({"a": 1}) != state_hash({"a": 2})
    assert state_hash({"a": 1, "b": 2}) == state_hash({"b": 2, "a": 1})


def test_fnv1a64_reference_vectors():
    assert fnv1a64("") == "cbf29ce484222325"
    assert fnv1a64("a") == "af63dc4c8601ec8c"
    assert fnv1a64("foobar") == "85944171f73967e8"
