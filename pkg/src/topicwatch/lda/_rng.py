"""Deterministic splitmix64 streams keyed by (seed, document, sweep).

Both Gibbs backends draw from the same integer recurrence, so results are
bit-identical regardless of backend and of the order documents are
processed in. Document keys come from FNV-1a over the document id, making
streams follow documents across reorderings.
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(data: str) -> int:
    h = _FNV_OFFSET
    for byte in data.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


def mix64(z: int) -> int:
    """splitmix64 finalizer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_state(seed: int, doc_key: int, sweep: int) -> int:
    """Initial state of the (seed, document, sweep) stream."""
    s = mix64((seed + GOLDEN) & MASK64)
    s = mix64(s ^ doc_key)
    return mix64(s ^ (sweep & MASK64))


def next_state(state: int) -> int:
    return (state + GOLDEN) & MASK64


def state_to_unit(state: int) -> float:
    """Uniform double in [0, 1) from the current state."""
    return (mix64(state) >> 11) * 1.1102230246251565e-16  # 2**-53
