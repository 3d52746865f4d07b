"""Kernel backend selection.

Prefers the compiled extension; falls back to the pure-Python reference
when the extension is not built. Both produce bit-identical output, so
the choice only affects speed. `HASH_BACKEND` records which one won.
"""

try:
    from ._hash_fast import hashed_ngram_counts

    HASH_BACKEND = "cython"
except ImportError:  # extension not built; reference implementation
    from ._hash_ref import hashed_ngram_counts

    HASH_BACKEND = "python"

__all__ = ["hashed_ngram_counts", "HASH_BACKEND"]
