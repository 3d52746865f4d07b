"""Document-to-vector providers.

Two interchangeable providers produce fixed-dimension vectors: an HTTP
client for a remote multilingual sentence encoder, and a deterministic
local featurizer that hashes character n-grams with signs. The hashed
featurizer doubles as the feature extractor for the fasttext-style
baseline classifier.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import requests

from .errors import (
    ConfigError,
    DimensionMismatchError,
    EmptyInputError,
    RemoteUnavailableError,
    ZeroVectorError,
)
from .kernels import hashed_ngram_counts

DEFAULT_DIM = 384
DEFAULT_TRUNCATE_CHARS = 2048


@dataclass
class EmbeddingProviderConfig:
    kind: str  # "remote" | "hashed_ngram"
    dim: int = DEFAULT_DIM
    endpoint: str | None = None
    ngram_range: tuple[int, int] = (2, 4)
    seed: int = 0
    batch_size: int = 256
    truncate_chars: int = DEFAULT_TRUNCATE_CHARS
    max_retries: int = 3
    retry_wait: float = 0.5
    headers: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("remote", "hashed_ngram"):
            raise ConfigError(f"unknown provider kind {self.kind!r}")
        if self.dim <= 0:
            raise ConfigError("dim must be positive")
        if self.kind == "remote" and not self.endpoint:
            raise ConfigError("remote provider requires an endpoint")
        lo, hi = self.ngram_range
        if not (1 <= lo <= hi):
            raise ConfigError(f"bad ngram_range {self.ngram_range}")
        if self.batch_size <= 0 or self.truncate_chars <= 0:
            raise ConfigError("batch_size and truncate_chars must be positive")

    def fingerprint(self) -> str:
        parts = [self.kind, str(self.dim)]
        if self.kind == "remote":
            parts.append(self.endpoint or "")
        else:
            parts += [f"{self.ngram_range[0]}-{self.ngram_range[1]}", str(self.seed)]
        parts.append(str(self.truncate_chars))
        return "|".join(parts)


def validate_vector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatchError(f"expected 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ZeroVectorError("vector has NaN or Inf components")
    return v


def l2_normalize(v: np.ndarray) -> np.ndarray:
    v = validate_vector(v)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ZeroVectorError("cannot normalize the zero vector")
    return v / norm


def hashed_ngram_embed(
    text: str, dim: int, ngram_range: tuple[int, int] = (2, 4), seed: int = 0
) -> np.ndarray:
    """Signed feature hashing over character n-grams of the lowercased text.

    Pure function of (text, dim, ngram_range, seed); stable across
    platforms and backends. Output is L2-normalized.
    """
    if dim < 8:
        raise ConfigError("hashed embedding dim must be at least 8")
    if not text:
        raise EmptyInputError("cannot embed empty text")
    counts = hashed_ngram_counts(text.lower(), dim, ngram_range[0], ngram_range[1], seed)
    norm = float(np.linalg.norm(counts))
    if norm == 0.0:
        # all signed counts cancelled; vanishingly rare for real text
        raise ZeroVectorError(f"signed hash counts cancelled for text {text[:40]!r}")
    return counts / norm


class HashedNgramProvider:
    def __init__(self, config: EmbeddingProviderConfig):
        self.config = config

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        cfg = self.config
        if not texts:
            raise EmptyInputError("embed_batch called with no texts")
        out = np.empty((len(texts), cfg.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            clipped = text[: cfg.truncate_chars]
            if not clipped:
                raise EmptyInputError(f"text {i} empty after truncation")
            out[i] = hashed_ngram_embed(clipped, cfg.dim, cfg.ngram_range, cfg.seed)
        return out


class RemoteProvider:
    """HTTP client for a sentence embedding service.

    POST {endpoint}/embed with {"texts": [...]}; expects {"vectors": [...],
    "dim": d} aligned with the request. Retries transient failures with
    exponential backoff; a batch is never partially accepted.
    """

    def __init__(self, config: EmbeddingProviderConfig, session: requests.Session | None = None):
        self.config = config
        self.session = session or requests.Session()

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        cfg = self.config
        if not texts:
            raise EmptyInputError("embed_batch called with no texts")
        clipped = [t[: cfg.truncate_chars] for t in texts]
        if any(not t for t in clipped):
            raise EmptyInputError("batch contains empty text after truncation")
        url = cfg.endpoint.rstrip("/") + "/embed"
        last_err: Exception | None = None
        for attempt in range(cfg.max_retries):
            if attempt:
                time.sleep(cfg.retry_wait * 2 ** (attempt - 1))
            try:
                resp = self.session.post(
                    url, json={"texts": clipped}, headers=cfg.headers, timeout=60
                )
            except requests.RequestException as exc:
                last_err = exc
                continue
            if resp.status_code != 200:
                last_err = RemoteUnavailableError(f"{url} returned {resp.status_code}")
                continue
            body = resp.json()
            vectors = np.asarray(body["vectors"], dtype=np.float64)
            if body.get("dim") != cfg.dim or vectors.shape != (len(clipped), cfg.dim):
                raise DimensionMismatchError(
                    f"service returned dim {body.get('dim')} / shape {vectors.shape}, "
                    f"expected dim {cfg.dim}"
                )
            if not np.all(np.isfinite(vectors)):
                raise RemoteUnavailableError("service returned non-finite vectors")
            return vectors
        raise RemoteUnavailableError(
            f"embedding service failed after {cfg.max_retries} attempts: {last_err}"
        )


def get_provider(config: EmbeddingProviderConfig):
    if config.kind == "remote":
        return RemoteProvider(config)
    return HashedNgramProvider(config)


def embed_batch(config: EmbeddingProviderConfig, texts: Sequence[str]) -> np.ndarray:
    return get_provider(config).embed_batch(texts)


def embed_texts(provider, texts: Sequence[str]) -> np.ndarray:
    """Embed an arbitrarily long list by slicing into provider batches."""
    cfg = provider.config
    chunks = [
        provider.embed_batch(texts[i : i + cfg.batch_size])
        for i in range(0, len(texts), cfg.batch_size)
    ]
    return np.vstack(chunks)
