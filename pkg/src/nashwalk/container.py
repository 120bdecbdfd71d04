"""Tiny binary container: 8-byte magic, length-prefixed JSON header, payload."""

from __future__ import annotations

import json
import struct

from .errors import IncompleteTable


def pack_container(magic: bytes, header: dict, payload: bytes) -> bytes:
    if len(magic) != 8:
        raise ValueError("magic field must be exactly 8 bytes")
    head = json.dumps(header, sort_keys=True).encode("utf-8")
    return magic + struct.pack("<I", len(head)) + head + payload


def unpack_container(data: bytes, magic: bytes) -> tuple[dict, bytes]:
    if len(data) < 12 or data[:8] != magic:
        raise IncompleteTable(f"bad container magic, expected {magic!r}")
    (hlen,) = struct.unpack("<I", data[8:12])
    if len(data) < 12 + hlen:
        raise IncompleteTable("truncated container header")
    header = json.loads(data[12 : 12 + hlen].decode("utf-8"))
    return header, data[12 + hlen :]
