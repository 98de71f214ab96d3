"""Canonical serialization: one deterministic text form for every state value.

All equality contracts in the system (persistence round trips, client/server
convergence, state hashing) compare canonical text, so the encoding must be
stable across runs, platforms, and client languages:

- object keys sorted lexicographically, compact separators, no trailing space
- numbers never use exponent notation; non-integral values are rounded to six
  decimal places and written with trailing zeros trimmed (``1.0`` -> ``1``,
  ``0.30000000000000004`` -> ``0.3``), which any IEEE-754 language reproduces
- strings escaped exactly as minimal JSON (the same set JavaScript's
  ``JSON.stringify`` escapes)

The output is strict JSON, so any JSON parser can read it back.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from typing import Any

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

# strings without these need no escaping at all (the overwhelmingly common case)
_NEEDS_ESCAPE = re.compile(r'["\\\x00-\x1f]')


def _encode_str(value: str) -> str:
    if _NEEDS_ESCAPE.search(value) is None:
        return f'"{value}"'
    return json.dumps(value, ensure_ascii=False)


def encode_number(value: float) -> str:
    """Render a number without exponent notation, trimming to 6 decimals."""
    if isinstance(value, int):
        return str(value)
    if not math.isfinite(value):
        raise ValueError(f"non-finite number not allowed in canonical form: {value!r}")
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    text = f"{value:.6f}".rstrip("0").rstrip(".")
    return text if text not in ("", "-") else "0"


def _encode(value: Any, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, str):
        out.append(_encode_str(value))
    elif isinstance(value, (int, float)):
        out.append(encode_number(value))
    elif isinstance(value, dict):
        out.append("{")
        first = True
        for key in sorted(value):
            if not isinstance(key, str):
                raise TypeError(f"canonical object keys must be strings, got {key!r}")
            if not first:
                out.append(",")
            first = False
            out.append(_encode_str(key))
            out.append(":")
            _encode(value[key], out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    else:
        raise TypeError(f"value not representable in canonical form: {type(value)!r}")


def canonical_text(value: Any) -> str:
    """Serialize a plain JSON-able value to its single canonical text form."""
    out: list[str] = []
    _encode(value, out)
    return "".join(out)


def state_hash(value: Any) -> str:
    """sha256 hex digest of the canonical form; the replica-comparison key."""
    return hashlib.sha256(canonical_text(value).encode("utf-8")).hexdigest()


def fnv1a64(text: str) -> str:
    """Cheap deterministic 64-bit hash, reproducible in any client language.

    Used for geometry guards, not for integrity or security.
    """
    acc = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        acc ^= byte
        acc = (acc * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return f"{acc:016x}"
