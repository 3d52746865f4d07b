#!/usr/bin/env python3
"""Benchmark the compiled n-gram hashing kernel against the pure-Python
reference on synthetic web-like documents.

    python3 benchmarks/bench_hash_kernel.py [--docs 2000] [--dim 384]
"""

import argparse
import random
import string
import time

import numpy as np

from corpusfilter._hash_ref import hashed_ngram_counts as py_kernel

try:
    from corpusfilter._hash_fast import hashed_ngram_counts as cy_kernel
except ImportError:
    cy_kernel = None


def make_docs(n, seed=0, n_chars=1500):
    rng = random.Random(seed)
    alphabet = string.ascii_lowercase + "     éàüö漢字"
    return ["".join(rng.choice(alphabet) for _ in range(n_chars)) for _ in range(n)]


def bench(kernel, docs, dim, lo, hi, seed):
    start = time.perf_counter()
    for doc in docs:
        kernel(doc, dim, lo, hi, seed)
    return time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--docs", type=int, default=2000)
    parser.add_argument("--chars", type=int, default=1500)
    parser.add_argument("--dim", type=int, default=384)
    parser.add_argument("--ngram-lo", type=int, default=2)
    parser.add_argument("--ngram-hi", type=int, default=4)
    args = parser.parse_args()

    docs = make_docs(args.docs, n_chars=args.chars)
    total_chars = sum(len(d) for d in docs)
    print(f"{args.docs} docs, {total_chars/1e6:.1f}M chars, dim={args.dim}, "
          f"ngrams {args.ngram_lo}-{args.ngram_hi}")

    t_py = bench(py_kernel, docs, args.dim, args.ngram_lo, args.ngram_hi, 0)
    print(f"python  : {t_py:8.3f}s  ({total_chars / t_py / 1e6:6.2f} Mchar/s)")

    if cy_kernel is None:
        print("cython  : extension not built")
        return

    t_cy = bench(cy_kernel, docs, args.dim, args.ngram_lo, args.ngram_hi, 0)
    print(f"cython  : {t_cy:8.3f}s  ({total_chars / t_cy / 1e6:6.2f} Mchar/s)")
    print(f"speedup : {t_py / t_cy:.1f}x")

    # sanity: both backends must agree exactly
    for doc in docs[:20]:
        assert np.array_equal(
            py_kernel(doc, args.dim, args.ngram_lo, args.ngram_hi, 0),
            cy_kernel(doc, args.dim, args.ngram_lo, args.ngram_hi, 0),
        )
    print("backends agree bit-exactly on sampled docs")


if __name__ == "__main__":
    main()
