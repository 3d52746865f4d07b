"""Corpus scoring, percentile threshold estimation, and filtering.

The selection rule is strict: a document survives only when its
classifier score is strictly greater than tau. Tau itself comes from a
percentile of sampled scores (nearest-rank, no interpolation), so
filtering at the p-th percentile retains on the order of (100-p)% of
the corpus.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import classifier as clf_mod
from .corpus_io import (
    CorpusManifest,
    FirstFile,
    RandomFiles,
    read_shard,
    sample_documents,
    write_shard,
)
from .embedding import EmbeddingProviderConfig, embed_texts, get_provider
from .errors import (
    DimensionMismatchError,
    EmptyScoresError,
    MissingScoreError,
    PercentileOutOfRangeError,
)

HISTOGRAM_BINS = 100
PERCENTILE_PRESETS = (30.0, 60.0, 90.0, 95.0)


@dataclass
class ThresholdEstimate:
    percentile: float
    tau: float
    sample_size: int
    strategy: str
    corpus_name: str


@dataclass
class FilterStats:
    docs_in: int
    docs_out: int
    retention: float
    score_histogram: list[int]
    tau: float


def estimate_percentile_threshold(scores, percentile: float) -> float:
    """Nearest-rank percentile: sorted ascending, 1-indexed rank ceil(p/100 * n)."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise EmptyScoresError("no scores to take a percentile of")
    if not 0.0 < percentile < 100.0:
        raise PercentileOutOfRangeError(f"percentile {percentile} outside (0, 100)")
    rank = math.ceil(percentile / 100.0 * scores.size)
    return float(np.sort(scores)[rank - 1])


def _score_shard(path: str, provider, clf) -> list[dict]:
    docs = list(read_shard(path))
    if not docs:
        return []
    X = embed_texts(provider, [d.text for d in docs])
    scores = clf_mod.score_batch(clf, X)
    shard = os.path.basename(path)
    return [
        {"doc_id": d.id, "score": float(s), "shard": shard}
        for d, s in zip(docs, scores)
    ]


def score_corpus(
    manifest: CorpusManifest,
    provider_config: EmbeddingProviderConfig,
    clf: clf_mod.LinearClassifier,
    out_path: str,
    workers: int = 1,
) -> int:
    """Score every document in the corpus and write one record per line.

    Shards are scored independently (optionally in parallel) and fragments
    merged in manifest order, so the output is deterministic for any
    worker count.
    """
    if provider_config.dim != clf.dim:
        raise DimensionMismatchError(
            f"provider dim {provider_config.dim} != classifier dim {clf.dim}"
        )
    provider = get_provider(provider_config)
    paths = manifest.shard_paths
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fragments = list(pool.map(lambda p: _score_shard(p, provider, clf), paths))
    else:
        fragments = [_score_shard(p, provider, clf) for p in paths]

    count = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for fragment in fragments:
            for rec in fragment:
                fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True))
                fh.write("\n")
                count += 1
    return count


def load_scores(path: str) -> dict[str, float]:
    scores: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                scores[rec["doc_id"]] = float(rec["score"])
    return scores


def apply_filter(
    manifest: CorpusManifest, scores_path: str, tau: float, out_dir: str
) -> FilterStats:
    """Write filtered copies of every shard, keeping docs with score > tau."""
    scores = load_scores(scores_path)
    os.makedirs(out_dir, exist_ok=True)
    hist = np.zeros(HISTOGRAM_BINS, dtype=np.int64)
    docs_in = 0
    docs_out = 0
    for path in manifest.shard_paths:
        kept = []
        for doc in read_shard(path):
            docs_in += 1
            if doc.id not in scores:
                raise MissingScoreError(f"no score for document {doc.id!r} in {path}")
            s = scores[doc.id]
            hist[min(int(s * HISTOGRAM_BINS), HISTOGRAM_BINS - 1)] += 1
            if s > tau:
                kept.append(doc)
        docs_out += write_shard(os.path.join(out_dir, os.path.basename(path)), kept)
    retention = docs_out / docs_in if docs_in else 0.0
    return FilterStats(
        docs_in=docs_in,
        docs_out=docs_out,
        retention=retention,
        score_histogram=hist.tolist(),
        tau=tau,
    )


def _sample_scores(manifest, provider, clf, strategy, max_docs) -> np.ndarray:
    docs = sample_documents(manifest, strategy, max_docs=max_docs)
    X = embed_texts(provider, [d.text for d in docs])
    return clf_mod.score_batch(clf, X)


def estimate_threshold(
    manifest: CorpusManifest,
    provider_config: EmbeddingProviderConfig,
    clf: clf_mod.LinearClassifier,
    percentile: float,
    strategy: FirstFile | RandomFiles = FirstFile(),
    max_docs: int = 100_000,
) -> ThresholdEstimate:
    provider = get_provider(provider_config)
    scores = _sample_scores(manifest, provider, clf, strategy, max_docs)
    tau = estimate_percentile_threshold(scores, percentile)
    if isinstance(strategy, FirstFile):
        strat = "first_file"
    else:
        strat = f"random_files({strategy.n},{strategy.seed})"
    return ThresholdEstimate(
        percentile=percentile,
        tau=tau,
        sample_size=int(scores.size),
        strategy=strat,
        corpus_name=manifest.corpus_name,
    )


def compare_sampling_strategies(
    manifest: CorpusManifest,
    provider_config: EmbeddingProviderConfig,
    clf: clf_mod.LinearClassifier,
    percentile: float,
    n_random: int,
    seed: int,
    max_docs: int = 100_000,
    flag_rel_diff: float = 0.1,
) -> dict:
    """Check that the cheap first-file threshold agrees with a random-shard one.

    A large relative difference means the first shard is not representative
    of the corpus and first-file thresholding should not be trusted.
    """
    provider = get_provider(provider_config)
    s_first = _sample_scores(manifest, provider, clf, FirstFile(), max_docs)
    s_random = _sample_scores(manifest, provider, clf, RandomFiles(n_random, seed), max_docs)
    tau_first = estimate_percentile_threshold(s_first, percentile)
    tau_random = estimate_percentile_threshold(s_random, percentile)
    denom = max(tau_first, tau_random)
    rel_diff = abs(tau_first - tau_random) / denom if denom > 0 else 0.0
    return {
        "tau_first": tau_first,
        "tau_random": tau_random,
        "rel_diff": rel_diff,
        "flagged": rel_diff > flag_rel_diff,
    }


def score_cache_path(
    cache_dir: str,
    manifest: CorpusManifest,
    provider_config: EmbeddingProviderConfig,
    clf: clf_mod.LinearClassifier,
) -> str:
    """Cache key covers corpus, provider settings, and classifier weights,
    so re-filtering at a new percentile reuses existing scores."""
    h = hashlib.sha256()
    h.update(manifest.corpus_name.encode())
    h.update(provider_config.fingerprint().encode())
    h.update(np.asarray(clf.w).tobytes())
    h.update(repr((clf.b, clf.normalize_inputs)).encode())
    return os.path.join(cache_dir, f"scores_{manifest.corpus_name}_{h.hexdigest()[:16]}.jsonl")
