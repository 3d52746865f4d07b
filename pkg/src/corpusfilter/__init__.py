"""Corpus quality-filtering toolkit.

Trains a binary quality classifier on labeled English seed data over
multilingual sentence embeddings, then scores, thresholds, and filters
sharded pretraining corpora in any supported language. Includes balanced
k-means cluster diagnostics and token-budget planning for training mixes.
"""

__version__ = "0.1.0"

from .kernels import HASH_BACKEND

__all__ = ["__version__", "HASH_BACKEND"]
