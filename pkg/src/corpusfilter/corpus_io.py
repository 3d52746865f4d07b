"""Streaming I/O for sharded newline-delimited text corpora.

Shards are JSONL files, one document per line, with fields `id`, `text`,
`lang`, `source` and an optional `meta` object. A manifest lists the
shards of one corpus; shard order is always lexicographic by path so that
"first file" means the same thing on every platform.
"""

from __future__ import annotations

import gzip
import json
import os
import random
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, NamedTuple

from .errors import DataError, EmptyCorpusError

REQUIRED_FIELDS = ("id", "text", "lang", "source")


@dataclass
class Document:
    id: str
    text: str
    lang: str
    source: str
    meta: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        if not self.id:
            raise DataError("document id must be non-empty")
        if not self.text or not self.text.strip():
            raise DataError(f"document {self.id!r}: text empty after trim")
        if not self.lang:
            raise DataError(f"document {self.id!r}: lang must be non-empty")


@dataclass
class CorpusManifest:
    corpus_name: str
    lang: str
    shard_paths: list[str]
    doc_count_estimate: int | None = None

    def __post_init__(self) -> None:
        if not self.shard_paths:
            raise DataError(f"manifest {self.corpus_name!r} has no shards")
        self.shard_paths = sorted(self.shard_paths)


class MalformedRecord(NamedTuple):
    line_no: int
    reason: str


def _open_text(path: str, mode: str) -> IO[str]:
    # optional gzip pass-through, keyed on extension
    if path.endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def doc_to_line(doc: Document) -> str:
    rec: dict = {"id": doc.id, "text": doc.text, "lang": doc.lang, "source": doc.source}
    if doc.meta:
        rec["meta"] = doc.meta
    return json.dumps(rec, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def _line_to_doc(line: str) -> Document:
    rec = json.loads(line)
    if not isinstance(rec, dict):
        raise ValueError("record is not an object")
    for name in REQUIRED_FIELDS:
        if name not in rec:
            raise ValueError(f"missing field {name!r}")
        if not isinstance(rec[name], str):
            raise ValueError(f"field {name!r} is not a string")
    doc = Document(
        id=rec["id"],
        text=rec["text"],
        lang=rec["lang"],
        source=rec["source"],
        meta=dict(rec.get("meta") or {}),
    )
    doc.validate()
    return doc


class ShardStream:
    """Iterator over the valid documents of one shard file.

    Malformed lines never interrupt the stream; after exhaustion they are
    available (with line numbers and reasons) in `.malformed`.
    """

    def __init__(self, path: str):
        if not os.path.exists(path):
            raise FileNotFoundError(path)
        self.path = path
        self.malformed: list[MalformedRecord] = []

    def __iter__(self) -> Iterator[Document]:
        with _open_text(self.path, "r") as fh:
            for line_no, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip():
                    continue
                try:
                    yield _line_to_doc(line)
                except (ValueError, DataError, UnicodeDecodeError) as exc:
                    self.malformed.append(MalformedRecord(line_no, str(exc)))


def read_shard(path: str) -> ShardStream:
    return ShardStream(path)


def write_shard(path: str, docs: Iterable[Document]) -> int:
    """Write documents as one JSON record per line; returns the count.

    Round-trips with read_shard byte-for-byte: key order is fixed and
    newlines inside text are escaped by the JSON encoding.
    """
    count = 0
    with _open_text(path, "w") as fh:
        for doc in docs:
            doc.validate()
            fh.write(doc_to_line(doc))
            fh.write("\n")
            count += 1
    return count


def iter_corpus(manifest: CorpusManifest) -> Iterator[tuple[str, Document]]:
    """Yield (shard_path, doc) over all shards in manifest order."""
    for path in manifest.shard_paths:
        for doc in read_shard(path):
            yield path, doc


@dataclass(frozen=True)
class FirstFile:
    pass


@dataclass(frozen=True)
class RandomFiles:
    n: int
    seed: int


def sample_documents(
    manifest: CorpusManifest,
    strategy: FirstFile | RandomFiles,
    max_docs: int = 100_000,
) -> list[Document]:
    """Draw a deterministic document sample for threshold estimation.

    FirstFile reads only the first shard (lexicographic order). RandomFiles
    picks n shards without replacement using the given seed and reads them
    round-robin, so no single shard dominates the sample.
    """
    if max_docs <= 0:
        raise DataError("max_docs must be positive")
    if isinstance(strategy, FirstFile):
        docs: list[Document] = []
        for doc in read_shard(manifest.shard_paths[0]):
            docs.append(doc)
            if len(docs) >= max_docs:
                break
        if not docs:
            raise EmptyCorpusError(f"no documents in {manifest.shard_paths[0]}")
        return docs

    if strategy.n > len(manifest.shard_paths):
        raise DataError(
            f"random_files n={strategy.n} exceeds shard count {len(manifest.shard_paths)}"
        )
    rng = random.Random(strategy.seed)
    chosen = sorted(rng.sample(manifest.shard_paths, strategy.n))
    iters = [iter(read_shard(p)) for p in chosen]
    docs = []
    while iters and len(docs) < max_docs:
        still_open = []
        for it in iters:
            try:
                docs.append(next(it))
            except StopIteration:
                continue
            still_open.append(it)
            if len(docs) >= max_docs:
                break
        iters = still_open
    if not docs:
        raise EmptyCorpusError(f"no documents in sampled shards of {manifest.corpus_name}")
    return docs


def load_manifest(path: str) -> CorpusManifest:
    with open(path, encoding="utf-8") as fh:
        rec = json.load(fh)
    return CorpusManifest(
        corpus_name=rec["corpus_name"],
        lang=rec["lang"],
        shard_paths=list(rec["shards"]),
        doc_count_estimate=rec.get("doc_count_estimate"),
    )


def save_manifest(manifest: CorpusManifest, path: str) -> None:
    rec = {
        "corpus_name": manifest.corpus_name,
        "lang": manifest.lang,
        "shards": manifest.shard_paths,
    }
    if manifest.doc_count_estimate is not None:
        rec["doc_count_estimate"] = manifest.doc_count_estimate
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rec, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")
