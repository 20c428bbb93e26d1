"""Tests for the canonical value codec."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coutile.exceptions import CodecError
from coutile.utils.codec import decode_value, encode_value, same_value

values = st.recursive(
    st.none()
    | st.booleans()
    | st.integers(min_value=-(2**63), max_value=2**63 - 1)
    | st.floats(allow_nan=False)
    | st.text(),
    lambda children: st.lists(children, max_size=4)
    | st.tuples(children, children)
    | st.dictionaries(st.text(max_size=5), children, max_size=4),
    max_leaves=12,
)


@given(value=values)
def test_decode_inverts_encode(value):
    decoded = decode_value(encode_value(value))
    assert decoded == value
    assert encode_value(decoded) == encode_value(value)


@given(
    left=st.integers(min_value=-(2**63), max_value=2**63 - 1),
    right=st.integers(min_value=-(2**63), max_value=2**63 - 1),
)
def test_integer_encoding_preserves_order(left: int, right: int):
    assert (encode_value(left) < encode_value(right)) == (left < right)


def test_dict_encoding_ignores_insertion_order():
    assert encode_value({"b": 1, "a": 2}) == encode_value({"a": 2, "b": 1})


def test_numpy_scalars_encode_like_python_values():
    assert encode_value(np.int64(5)) == encode_value(5)
    assert encode_value(np.float64(0.5)) == encode_value(0.5)


def test_same_value_distinguishes_types():
    assert same_value((1, None), (1, None))
    assert not same_value(1, 1.0)
    assert not same_value(True, 1)
    assert not same_value((1, 2), [1, 2])


@pytest.mark.parametrize(
    "data",
    [b"", b"x", b"i\x00\x01", b"s\x00\x00\x00\x05abc", b"b\x02", b"nn"],
    ids=["empty", "unknown-tag", "short-int", "short-str", "bad-bool", "trailing"],
)
def test_malformed_bytes_are_rejected(data: bytes):
    with pytest.raises(CodecError):
        decode_value(data)


@pytest.mark.parametrize("value", [2**63, -(2**63) - 1, {1, 2}, object()])
def test_unencodable_values_are_rejected(value):
    with pytest.raises(CodecError):
        encode_value(value)
