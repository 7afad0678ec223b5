"""Counter-based random streams.

Every stream is addressed by ``(seed, *key, index)``: the key picks a Philox
key, the index goes into the high word of the 256-bit counter. Any stream can
be regenerated in isolation, so results do not depend on the order in which
workers ask for them.
"""

from __future__ import annotations

import hashlib

import numpy as np

DEFAULT_SEED = 20150601


def _key_part(part: int | str) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"stream key parts must be non-negative, got {part}")
        return int(part)
    digest = hashlib.blake2b(str(part).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def philox_key(seed: int, *key: int | str) -> np.ndarray:
    """128-bit Philox key derived from a seed and a tuple of labels."""
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key_part(k) for k in key))
    return ss.generate_state(2, np.uint64)


def substream(seed: int, *key: int | str, index: int = 0) -> np.random.Generator:
    """Independent generator for stream ``index`` under ``key``."""
    return np.random.Generator(
        np.random.Philox(key=philox_key(seed, *key), counter=[0, 0, 0, int(index)])
    )


def uniforms(seed: int, *key: int | str, n: int, index: int = 0) -> np.ndarray:
    return substream(seed, *key, index=index).random(n)


class StreamFactory:
    """Hands out generators for a fixed seed; keys are cached, generators are not."""

    def __init__(self, seed: int = DEFAULT_SEED):
        self.seed = int(seed)
        self._keys: dict[tuple, np.ndarray] = {}

    def generator(self, *key: int | str, index: int = 0) -> np.random.Generator:
        k = self._keys.get(key)
        if k is None:
            k = self._keys[key] = philox_key(self.seed, *key)
        return np.random.Generator(np.random.Philox(key=k, counter=[0, 0, 0, int(index)]))

    def __repr__(self) -> str:
        return f"StreamFactory(seed={self.seed})"
