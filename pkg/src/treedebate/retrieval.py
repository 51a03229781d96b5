"""Embedding, cosine ranking, and top-delta evidence selection."""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .corpus import Segment


class EmbeddingError(ValueError):
    """A vector is unusable: wrong shape, zero norm, or non-finite values."""


@dataclass(frozen=True)
class RankedSegment:
    segment: Segment
    score: float


class EmbeddingProvider(Protocol):
    provider_id: str

    def embed(self, texts: Sequence[str]) -> list[list[float]]: ...


def format_topic_query(title: str, description: str | None = None) -> str:
    """Build the retrieval query for a topic: "<title> : <description>"."""
    if not title.strip():
        raise ValueError("topic title must be non-empty")
    if description is None or not description.strip():
        return title
    return f"{title} : {description}"


def as_vector(values: Sequence[float]) -> np.ndarray:
    """Validate and convert raw embedding values to a float vector."""
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1 or vec.size < 1:
        raise EmbeddingError(f"expected a 1-d vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise EmbeddingError("vector contains NaN or infinite values")
    return vec


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity dot(a,b) / (|a||b|). Rejects zero vectors."""
    if a.shape != b.shape:
        raise EmbeddingError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise EmbeddingError("cosine undefined for zero-norm vector")
    return float(np.dot(a, b) / (norm_a * norm_b))


def top_delta(
    query: np.ndarray,
    pool: Sequence[tuple[Segment, np.ndarray]],
    delta: int,
) -> list[RankedSegment]:
    """Rank pool segments by cosine to the query; keep the best `delta`.

    Ties break toward the lower segment_id so rankings are reproducible.
    """
    if delta < 1:
        raise ValueError(f"delta must be >= 1, got {delta}")
    scored = [
        RankedSegment(segment=seg, score=cosine(query, vec)) for seg, vec in pool
    ]
    scored.sort(key=lambda r: (-r.score, r.segment.segment_id))
    return scored[: min(delta, len(scored))]


class EmbeddingCache:
    """In-run cache keyed by (provider id, text digest). Thread-safe."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._store: dict[tuple[str, str], np.ndarray] = {}

    @staticmethod
    def _digest(text: str) -> str:
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def get(self, provider_id: str, text: str) -> np.ndarray | None:
        with self._lock:
            return self._store.get((provider_id, self._digest(text)))

    def put(self, provider_id: str, text: str, vector: np.ndarray) -> None:
        with self._lock:
            self._store[(provider_id, self._digest(text))] = vector


def embed_texts(
    texts: Sequence[str],
    provider: EmbeddingProvider,
    cache: EmbeddingCache | None = None,
) -> list[np.ndarray]:
    """Embed texts in order, consulting the cache before calling the provider."""
    if not texts:
        raise ValueError("texts must be non-empty")
    result: list[np.ndarray | None] = [None] * len(texts)
    missing: dict[str, list[int]] = {}
    for i, text in enumerate(texts):
        hit = cache.get(provider.provider_id, text) if cache is not None else None
        if hit is not None:
            result[i] = hit
        else:
            missing.setdefault(text, []).append(i)
    if missing:
        unique = list(missing)
        vectors = provider.embed(unique)
        if len(vectors) != len(unique):
            raise EmbeddingError(
                f"provider returned {len(vectors)} vectors for {len(unique)} texts"
            )
        for text, raw in zip(unique, vectors):
            vec = as_vector(raw)
            if cache is not None:
                cache.put(provider.provider_id, text, vec)
            for i in missing[text]:
                result[i] = vec
    dims = {v.shape[0] for v in result if v is not None}
    if len(dims) > 1:
        raise EmbeddingError(f"mixed embedding dimensions in one batch: {dims}")
    return [v for v in result if v is not None]
