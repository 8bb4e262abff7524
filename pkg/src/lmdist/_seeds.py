"""Deterministic RNG derivation.

All randomness in the package flows from a single 64-bit seed.  Every
operation derives its own generator from (seed, tag, *indices), where the
tag names the operation and the indices identify the sub-task (trial
number, round, set index, ...).  The derivation is:

    SeedSequence([seed, sha256(tag)[:8], index0, index1, ...])

sha256 keeps tags stable across platforms and Python versions (unlike
hash()).  Two different tags, or the same tag with different indices,
yield independent streams; the same triple always yields the same stream.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _tag_entropy(tag: str) -> int:
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_seedseq(seed: int, tag: str, *indices: int) -> np.random.SeedSequence:
    entropy = [int(seed) & _MASK64, _tag_entropy(tag)]
    entropy.extend(int(i) & _MASK64 for i in indices)
    return np.random.SeedSequence(entropy)


def derive_rng(seed: int, tag: str, *indices: int) -> np.random.Generator:
    """Return a generator for the stream named by (seed, tag, indices)."""
    return np.random.Generator(np.random.PCG64(derive_seedseq(seed, tag, *indices)))


def derive_seed(seed: int, tag: str, *indices: int) -> int:
    """Collapse a derived stream name back to a single 64-bit seed."""
    state = derive_seedseq(seed, tag, *indices).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)
