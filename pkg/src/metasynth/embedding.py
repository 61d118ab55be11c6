"""Embedding providers.

All providers return unit-norm float64 vectors, so cosine similarity reduces
to a dot product everywhere downstream. :class:`HashingEmbedder` is the
dependency-free reference used by default and throughout the tests.
"""
from __future__ import annotations

import os
import re
import threading
from typing import Protocol, Sequence, runtime_checkable

import httpx
import numpy as np

from . import _kernels
from .core import ProductPage, concat_snippet, normalize
from .errors import ClientParseError, InvalidArgumentError, TransportError

DEFAULT_DIMENSION = 256
DEFAULT_SEED = 0x5EED_CAFE_F00D_0001

_TOKEN = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on anything that is not a letter or digit."""
    return _TOKEN.findall(text.lower())


def serialize_page(page: ProductPage) -> str:
    return "\n".join(f"{name}: {value}" for name, value in page.attributes)


@runtime_checkable
class EmbeddingProvider(Protocol):
    name: str
    dimension: int

    def embed_text(self, text: str) -> np.ndarray: ...


class HashingEmbedder:
    """Signed feature-hashing bag of unigrams and word bigrams.

    Unit-normalized; identical input always yields a bitwise-identical vector.
    A text without any alphanumeric token falls back to hashing the raw,
    stripped string so every non-empty input still gets a unit vector.
    """

    name = "hashing"

    def __init__(self, dimension: int = DEFAULT_DIMENSION, seed: int = DEFAULT_SEED, bigrams: bool = True,
                 memoize: bool = True):
        if dimension < 1:
            raise InvalidArgumentError("dimension must be positive")
        self.dimension = dimension
        self.seed = seed
        self.bigrams = bigrams
        self._memo: dict[str, np.ndarray] | None = {} if memoize else None

    def embed_text(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise InvalidArgumentError("cannot embed empty text")
        if self._memo is not None:
            cached = self._memo.get(text)
            if cached is not None:
                return cached
        tokens = tokenize(text) or [text.strip()]
        counts = _kernels.hashed_counts(tokens, self.dimension, self.seed, self.bigrams)
        if not counts.any():
            # every feature cancelled out; keep the vector well-defined
            counts[_kernels.feature_hash(text.strip().encode("utf-8"), self.seed) % self.dimension] = 1
        vec = normalize(counts.astype(np.float64))
        if self._memo is not None:
            self._memo[text] = vec
        return vec

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([self.embed_text(t) for t in texts]) if texts else np.zeros((0, self.dimension))


class HttpEmbeddingProvider:
    """Remote provider: POST ``{"input": [texts]}``, expects a list of float arrays.

    Also accepts the common ``{"data": [{"embedding": [...]}, ...]}`` envelope.
    Vectors are unit-normalized client side.
    """

    name = "http"

    def __init__(self, endpoint: str, dimension: int, api_key: str | None = None,
                 client: httpx.Client | None = None, timeout: float = 30.0):
        self.endpoint = endpoint
        self.dimension = dimension
        self.api_key = api_key if api_key is not None else os.environ.get("EMBED_API_KEY")
        self._client = client or httpx.Client(timeout=timeout)
        self._memo: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        for t in texts:
            if not t or not t.strip():
                raise InvalidArgumentError("cannot embed empty text")
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            resp = self._client.post(self.endpoint, json={"input": list(texts)}, headers=headers)
        except httpx.HTTPError as exc:
            raise TransportError(f"embedding request failed: {exc}") from exc
        if resp.status_code // 100 != 2:
            raise TransportError(f"embedding endpoint returned {resp.status_code}")
        try:
            payload = resp.json()
            if isinstance(payload, dict):
                payload = [row["embedding"] for row in payload["data"]]
            vectors = [normalize(v) for v in payload]
        except (ValueError, KeyError, TypeError, InvalidArgumentError) as exc:
            raise ClientParseError(f"bad embedding response: {exc}") from exc
        if len(vectors) != len(texts) or any(v.shape != (self.dimension,) for v in vectors):
            raise ClientParseError("embedding response has wrong shape")
        return np.stack(vectors)

    def embed_text(self, text: str) -> np.ndarray:
        with self._lock:
            cached = self._memo.get(text)
        if cached is not None:
            return cached
        vec = self.embed_batch([text])[0]
        vec.setflags(write=False)
        with self._lock:
            self._memo[text] = vec
        return vec


def embed_page(page: ProductPage, embedder: EmbeddingProvider) -> np.ndarray:
    return embedder.embed_text(serialize_page(page))


def embed_exemplar(title: str, description: str, embedder: EmbeddingProvider) -> np.ndarray:
    return embedder.embed_text(concat_snippet(title, description))
