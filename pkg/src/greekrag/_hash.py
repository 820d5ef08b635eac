"""64-bit FNV-1a hashing used for cache digests, index checksums and the hashing embedder."""

from __future__ import annotations

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes, state: int = FNV64_OFFSET) -> int:
    """Fold ``data`` into a running FNV-1a state; returns an unsigned 64-bit int."""
    h = state
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & _MASK64
    return h


def fnv1a64_hex(data: bytes) -> str:
    """FNV-1a of ``data`` as a fixed-width 16-char lowercase hex string."""
    return f"{fnv1a64(data):016x}"


def content_digest(embedder_id: str, text: str) -> str:
    """Cache key for one (embedder, text) pair.

    The NUL separator keeps (id, text) pairs unambiguous: UTF-8 of a model id
    never contains 0x00.
    """
    return fnv1a64_hex(embedder_id.encode("utf-8") + b"\x00" + text.encode("utf-8"))
