"""
Canonical binary encoding of computation values.

Every input, output and embedded spec value travels through this codec, so
byte equality of encodings is value equality, and sorting encodings gives a
deterministic tie-break order for majority votes.

Layout, one tag byte followed by the body:

    n   nil, no body
    b   bool, 1 byte
    i   int, 8 bytes big-endian of x + 2**63 (byte order == numeric order)
    f   float, 8 bytes IEEE-754 big-endian
    s   str, u32 length + UTF-8
    t   tuple, u32 count + encoded items
    l   list, u32 count + encoded items
    d   dict, u32 count + (key, value) pairs sorted by encoded key
"""

import struct
from typing import Any

from coutile.exceptions import CodecError

Value = Any

_INT_OFFSET = 1 << 63
_U32 = struct.Struct(">I")
_F64 = struct.Struct(">d")


def encode_value(value: Value) -> bytes:
    """
    Encode a value canonically.

    Raises:
        CodecError: for unsupported types or ints outside the signed 64-bit range.
    """
    out = bytearray()
    _encode(value, out)
    return bytes(out)


def _encode(value: Value, out: bytearray) -> None:
    if value is None:
        out += b"n"
    elif isinstance(value, bool):
        out += b"b" + (b"\x01" if value else b"\x00")
    elif isinstance(value, int):
        shifted = value + _INT_OFFSET
        if not 0 <= shifted < (1 << 64):
            raise CodecError(f"Integer {value} outside the 64-bit range")
        out += b"i" + shifted.to_bytes(8, "big")
    elif isinstance(value, float):
        out += b"f" + _F64.pack(value)
    elif isinstance(value, str):
        data = value.encode("utf-8")
        out += b"s" + _U32.pack(len(data)) + data
    elif isinstance(value, (tuple, list)):
        out += (b"t" if isinstance(value, tuple) else b"l") + _U32.pack(len(value))
        for item in value:
            _encode(item, out)
    elif isinstance(value, dict):
        pairs = sorted((encode_value(k), encode_value(v)) for k, v in value.items())
        out += b"d" + _U32.pack(len(pairs))
        for key, item in pairs:
            out += key + item
    elif hasattr(value, "item"):
        # numpy scalars
        _encode(value.item(), out)
    else:
        raise CodecError(f"Cannot encode value of type {type(value).__name__}")


def decode_value(data: bytes) -> Value:
    """
    Decode bytes produced by encode_value.

    Raises:
        CodecError: on truncated input, unknown tags or trailing bytes.
    """
    value, offset = _decode(data, 0)
    if offset != len(data):
        raise CodecError(f"{len(data) - offset} trailing bytes after value")
    return value


def decode_prefix(data: bytes, offset: int = 0) -> tuple[Value, int]:
    """Decode one value starting at ``offset``; return it with the next offset."""
    return _decode(data, offset)


def _take(data: bytes, offset: int, size: int) -> bytes:
    end = offset + size
    if end > len(data):
        raise CodecError("Truncated value")
    return data[offset:end]


def _decode(data: bytes, offset: int) -> tuple[Value, int]:
    tag = _take(data, offset, 1)
    offset += 1
    match tag:
        case b"n":
            return None, offset
        case b"b":
            flag = _take(data, offset, 1)
            if flag not in (b"\x00", b"\x01"):
                raise CodecError("Invalid bool byte")
            return flag == b"\x01", offset + 1
        case b"i":
            raw = _take(data, offset, 8)
            return int.from_bytes(raw, "big") - _INT_OFFSET, offset + 8
        case b"f":
            return _F64.unpack(_take(data, offset, 8))[0], offset + 8
        case b"s":
            (size,) = _U32.unpack(_take(data, offset, 4))
            offset += 4
            raw = _take(data, offset, size)
            try:
                return raw.decode("utf-8"), offset + size
            except UnicodeDecodeError as exc:
                raise CodecError("Invalid UTF-8 string") from exc
        case b"t" | b"l":
            (count,) = _U32.unpack(_take(data, offset, 4))
            offset += 4
            items = []
            for _ in range(count):
                item, offset = _decode(data, offset)
                items.append(item)
            return (tuple(items) if tag == b"t" else items), offset
        case b"d":
            (count,) = _U32.unpack(_take(data, offset, 4))
            offset += 4
            result = {}
            for _ in range(count):
                key, offset = _decode(data, offset)
                item, offset = _decode(data, offset)
                try:
                    result[key] = item
                except TypeError as exc:
                    raise CodecError("Unhashable dict key") from exc
            return result, offset
        case _:
            raise CodecError(f"Unknown tag {tag!r}")


def same_value(left: Value, right: Value) -> bool:
    """Canonical equality: two values are the same iff their encodings are."""
    return encode_value(left) == encode_value(right)
