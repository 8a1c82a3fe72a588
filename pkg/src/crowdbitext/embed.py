"""Deterministic sentence embeddings.

The builtin embedder hashes character n-grams into a fixed number of signed
buckets. It is no multilingual encoder, but it is deterministic, needs no
model file and gives constructed translation fixtures the geometry the
aligner expects. Precomputed vectors from a real encoder can be swapped in
through ``load_external_vectors``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .textkit import Sentence

MIN_DIMENSION = 16
DEFAULT_DIMENSION = 256
DEFAULT_NGRAM_ORDERS = (2, 3, 4)

MODE_BUILTIN = "builtin-hashed"
MODE_EXTERNAL = "external-table"


@dataclass(frozen=True)
class EmbedderConfig:
    dimension: int = DEFAULT_DIMENSION
    ngram_orders: tuple[int, ...] = DEFAULT_NGRAM_ORDERS
    seed: int = 0
    mode: str = MODE_BUILTIN

    def __post_init__(self) -> None:
        if self.dimension < MIN_DIMENSION:
            raise ValueError(f"embedding dimension must be >= {MIN_DIMENSION}")
        if not self.ngram_orders:
            raise ValueError("ngram_orders must be non-empty")
        if any(o < 1 for o in self.ngram_orders):
            raise ValueError("ngram orders must be positive")
        if self.mode not in (MODE_BUILTIN, MODE_EXTERNAL):
            raise ValueError(f"unknown embedder mode {self.mode!r}")


@dataclass
class EmbeddingVector:
    """A dense vector with its Euclidean norm (1.0, or 0.0 for the zero vector)."""

    values: np.ndarray = field(repr=False)
    norm: float

    def __len__(self) -> int:
        return len(self.values)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity; by convention 0 when either vector is zero."""
    if a.norm == 0.0 or b.norm == 0.0:
        return 0.0
    return float(np.dot(a.values, b.values) / (a.norm * b.norm))


def _seed_key(seed: int) -> bytes:
    return seed.to_bytes(8, "little", signed=True)


def _embed_text(cfg: EmbedderConfig, text: str) -> EmbeddingVector:
    # leading/trailing whitespace carries no signal; internal spaces do
    # (they mark word boundaries) and stay in the n-grams
    text = text.strip()
    if not text:
        raise ValueError("empty input")
    key = _seed_key(cfg.seed)
    raw = np.zeros(cfg.dimension, dtype=np.float64)
    for order in cfg.ngram_orders:
        for i in range(len(text) - order + 1):
            gram = text[i : i + order]
            digest = hashlib.blake2b(
                gram.encode("utf-8"), key=key, digest_size=9
            ).digest()
            bucket = int.from_bytes(digest[:8], "little") % cfg.dimension
            sign = 1.0 if digest[8] & 1 else -1.0
            raw[bucket] += sign
    norm = float(np.linalg.norm(raw))
    if norm == 0.0:
        return EmbeddingVector(values=raw, norm=0.0)
    return EmbeddingVector(values=raw / norm, norm=1.0)


def embed_sentence(cfg: EmbedderConfig, s: Sentence) -> EmbeddingVector:
    """Embed one sentence with the builtin hashed encoder.

    Deterministic for a fixed config; invariant to leading and trailing
    whitespace. A sentence shorter than every configured n-gram order has no
    features and embeds to the zero vector.
    """
    return _embed_text(cfg, s.text)


def embed_overlaps(
    cfg: EmbedderConfig, sentences: list[Sentence], max_overlap: int
) -> dict[tuple[int, int], EmbeddingVector]:
    """Embed every window of 1..max_overlap consecutive sentences.

    Keys are (start index, window length); windows join their sentences with
    a single space. The aligner reads multi-sentence bead costs from this
    table.
    """
    if not 1 <= max_overlap <= 3:
        raise ValueError("max_overlap must be in [1, 3]")
    table: dict[tuple[int, int], EmbeddingVector] = {}
    for start in range(len(sentences)):
        for length in range(1, max_overlap + 1):
            if start + length > len(sentences):
                break
            text = " ".join(s.text for s in sentences[start : start + length])
            table[(start, length)] = _embed_text(cfg, text)
    return table


def load_external_vectors(
    path: str, expected_count: int
) -> dict[tuple[int, int], EmbeddingVector]:
    """Load precomputed overlap vectors written by an external encoder.

    Format: header ``EMB v1 <dimension>``, then one line per window:
    ``start<TAB>length<TAB>f1 f2 ... fD``. Vectors are re-normalized on load,
    so files may hold unnormalized encoder output.
    """
    table: dict[tuple[int, int], EmbeddingVector] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(" ")
        if len(header) != 3 or header[0] != "EMB" or header[1] != "v1":
            raise ValueError(f"not an EMB v1 vector file: {path}")
        dim = int(header[2])
        if dim < MIN_DIMENSION:
            raise ValueError(f"vector dimension {dim} below minimum {MIN_DIMENSION}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            try:
                start, length = int(fields[0]), int(fields[1])
                values = np.array([float(x) for x in fields[2].split()], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed vector line") from exc
            if len(values) != dim:
                raise ValueError(
                    f"{path}:{lineno}: dimension mismatch: got {len(values)}, header says {dim}"
                )
            norm = float(np.linalg.norm(values))
            if norm == 0.0:
                table[(start, length)] = EmbeddingVector(values=values, norm=0.0)
            else:
                table[(start, length)] = EmbeddingVector(values=values / norm, norm=1.0)
    if len(table) != expected_count:
        raise ValueError(
            f"vector count mismatch: file has {len(table)}, expected {expected_count}"
        )
    return table
