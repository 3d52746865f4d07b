# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled signed n-gram hashing kernel.

Bit-identical to the pure-Python reference in _hash_ref.py; see that
module for the hash layout. The text is encoded to UTF-8 once and n-grams
are hashed over byte ranges, so no per-gram substring objects are built.
"""

import numpy as np

from libc.stdint cimport int64_t, uint64_t

cdef uint64_t FNV_OFFSET = 14695981039346656037ULL
cdef uint64_t FNV_PRIME = 1099511628211ULL


cdef inline uint64_t _fnv_range(uint64_t h, const unsigned char* data,
                                Py_ssize_t start, Py_ssize_t end) nogil:
    cdef Py_ssize_t i
    for i in range(start, end):
        h = (h ^ <uint64_t>data[i]) * FNV_PRIME
    return h


def hashed_ngram_counts(str text, int dim, int n_lo, int n_hi, seed):
    cdef uint64_t h0 = FNV_OFFSET
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef int b
    for b in range(8):
        h0 = (h0 ^ ((s >> (8 * b)) & 0xFF)) * FNV_PRIME

    cdef bytes raw = text.encode("utf-8")
    cdef const unsigned char* data = raw
    cdef Py_ssize_t n_chars = len(text)

    # byte offset of each character inside the UTF-8 encoding
    offs_arr = np.empty(n_chars + 1, dtype=np.int64)
    cdef int64_t[::1] offs = offs_arr
    cdef Py_ssize_t i, pos = 0
    cdef Py_UCS4 ch
    for i in range(n_chars):
        offs[i] = pos
        ch = text[i]
        if ch < 0x80:
            pos += 1
        elif ch < 0x800:
            pos += 2
        elif ch < 0x10000:
            pos += 3
        else:
            pos += 4
    offs[n_chars] = pos

    counts_arr = np.zeros(dim, dtype=np.float64)
    cdef double[::1] counts = counts_arr
    cdef int n
    cdef Py_ssize_t j
    cdef uint64_t h
    cdef uint64_t udim = <uint64_t>dim
    with nogil:
        for n in range(n_lo, n_hi + 1):
            for j in range(n_chars - n + 1):
                h = _fnv_range(h0, data, offs[j], offs[j + n])
                if h >> 63:
                    counts[<Py_ssize_t>(h % udim)] -= 1.0
                else:
                    counts[<Py_ssize_t>(h % udim)] += 1.0
    return counts_arr
