"""Pure-Python reference for the signed n-gram hashing kernel.

Must stay bit-identical to the compiled kernel in _hash_fast.pyx: both
hash the UTF-8 bytes of each character n-gram with seeded 64-bit FNV-1a,
take the bucket as hash mod dim, and the sign from the top hash bit.
"""

from __future__ import annotations

import numpy as np

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def _seed_state(seed: int) -> int:
    h = FNV_OFFSET
    for b in range(8):
        h = ((h ^ ((seed >> (8 * b)) & 0xFF)) * FNV_PRIME) & _MASK
    return h


def hashed_ngram_counts(text: str, dim: int, n_lo: int, n_hi: int, seed: int) -> np.ndarray:
    counts = np.zeros(dim, dtype=np.float64)
    h0 = _seed_state(seed & _MASK)
    n_chars = len(text)
    for n in range(n_lo, n_hi + 1):
        for j in range(n_chars - n + 1):
            h = h0
            for byte in text[j : j + n].encode("utf-8"):
                h = ((h ^ byte) * FNV_PRIME) & _MASK
            if h >> 63:
                counts[h % dim] -= 1.0
            else:
                counts[h % dim] += 1.0
    return counts
