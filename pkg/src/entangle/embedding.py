"""Semantic vectors and pluggable text-embedding providers.

Three provider kinds share one contract:

* ``remote`` -- a client for a minimal embeddings wire format (POST the model
  name plus input texts, vector arrays come back).
* ``precomputed_store`` -- a content-hash -> vector file, for bit-exact
  offline reproduction of a previous run.
* ``deterministic_test`` -- a content-hash-seeded unit vector, so the full
  pipeline can be exercised with zero network and stable results.

Vectors are stored exactly as the provider produced them (unnormalized) with
a cached Euclidean norm; :func:`cosine` does its own normalization.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import requests
from scipy.special import ndtri

from .errors import InvariantError, MissingVectorError, ProviderError, ProviderTimeoutError

logger = logging.getLogger(__name__)

DEFAULT_DIMENSION = 384
DEFAULT_CACHE_CAPACITY = 4096

EMBED_URL_ENV = "ENTANGLE_EMBED_URL"
EMBED_KEY_ENV = "ENTANGLE_EMBED_KEY"


def content_hash(text: str) -> str:
    """Hex SHA-256 of the UTF-8 text; the cache and store key."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class SemanticVector:
    """A fixed-dimension real vector with a cached Euclidean norm.

    Values are read-only after construction; two vectors compare equal only
    if their values are bitwise identical.
    """

    __slots__ = ("_values", "_norm")

    def __init__(self, values: Sequence[float] | np.ndarray):
        arr = np.array(values, dtype=np.float64, copy=True)
        if arr.ndim != 1:
            raise InvariantError(f"semantic vector must be one-dimensional, got shape {arr.shape}")
        if arr.size == 0:
            raise InvariantError("semantic vector must not be empty")
        if not np.all(np.isfinite(arr)):
            raise InvariantError("semantic vector contains non-finite values")
        arr.setflags(write=False)
        self._values = arr
        self._norm = float(np.linalg.norm(arr))

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def norm(self) -> float:
        return self._norm

    @property
    def dimension(self) -> int:
        return int(self._values.shape[0])

    def scaled(self, factor: float) -> "SemanticVector":
        """A new vector with every coordinate multiplied by ``factor``."""
        return SemanticVector(self._values * float(factor))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SemanticVector):
            return NotImplemented
        return bool(np.array_equal(self._values, other._values))

    def __hash__(self) -> int:
        return hash(self._values.tobytes())

    def __repr__(self) -> str:
        return f"SemanticVector(dim={self.dimension}, norm={self._norm:.6f})"


def cosine(a: SemanticVector, b: SemanticVector) -> float:
    """Cosine similarity dot(a,b) / (|a||b|), clamped into [-1, 1].

    Raises on dimension mismatch or a zero-norm operand.
    """
    if a.dimension != b.dimension:
        raise InvariantError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    if a.norm == 0.0 or b.norm == 0.0:
        raise InvariantError("cosine undefined for a zero-norm vector")
    # Equal vectors short-circuit to exactly 1.0 so self-similarity carries
    # no rounding residue.
    if a == b:
        return 1.0
    value = float(np.dot(a.values, b.values)) / (a.norm * b.norm)
    return max(-1.0, min(1.0, value))


@dataclass(frozen=True)
class ProviderConfig:
    """How to construct an embedding provider.

    ``endpoint`` and the API key fall back to the ENTANGLE_EMBED_URL /
    ENTANGLE_EMBED_KEY environment variables for the remote kind.
    """

    kind: str = "deterministic_test"
    endpoint: str | None = None
    model_name: str = "deterministic-test"
    dimension: int = DEFAULT_DIMENSION
    cache_capacity: int = DEFAULT_CACHE_CAPACITY
    store_path: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("remote", "precomputed_store", "deterministic_test"):
            raise InvariantError(f"unknown provider kind: {self.kind!r}")
        if self.dimension < 1:
            raise InvariantError("dimension must be a positive integer")
        if self.cache_capacity < 0:
            raise InvariantError("cache_capacity must be >= 0")

    def to_record(self) -> dict:
        return {
            "kind": self.kind,
            "endpoint": self.endpoint,
            "model_name": self.model_name,
            "dimension": self.dimension,
            "cache_capacity": self.cache_capacity,
            "store_path": self.store_path,
        }


class EmbeddingProvider:
    """Base provider: input validation plus a content-hash LRU cache.

    Subclasses implement :meth:`_embed_uncached` for a single trimmed text.
    Cache reads and writes are guarded by a lock, so providers are safe for
    concurrent ``embed`` calls as long as ``_embed_uncached`` is.
    """

    def __init__(self, dimension: int = DEFAULT_DIMENSION,
                 cache_capacity: int = DEFAULT_CACHE_CAPACITY):
        if dimension < 1:
            raise InvariantError("dimension must be a positive integer")
        self._dimension = int(dimension)
        self._cache: OrderedDict[str, SemanticVector] = OrderedDict()
        self._cache_capacity = int(cache_capacity)
        self._lock = threading.Lock()

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def kind(self) -> str:
        raise NotImplementedError

    def ready(self) -> bool:
        """Cheap readiness probe; does not call out to the network."""
        return True

    def embed(self, text: str) -> SemanticVector:
        """Embed one text into a vector of the provider's dimension.

        The text is trimmed first and must be non-empty afterwards. Results
        are cached by content hash, so repeated calls are deterministic for
        a fixed provider.
        """
        if not isinstance(text, str):
            raise InvariantError(f"text must be a string, got {type(text).__name__}")
        trimmed = text.strip()
        if not trimmed:
            raise InvariantError("cannot embed empty text")
        key = content_hash(trimmed)
        with self._lock:
            hit = self._cache.get(key)
            if hit is not None:
                self._cache.move_to_end(key)
                return hit
        vector = self._embed_uncached(trimmed)
        if vector.dimension != self._dimension:
            raise ProviderError(
                f"provider returned dimension {vector.dimension}, expected {self._dimension}")
        self._store(key, vector)
        return vector

    def batch_embed(self, texts: Iterable[str]) -> list[SemanticVector]:
        """Embed texts in order; element-wise equal to individual calls.

        The first failing element aborts the batch with its index attached.
        """
        out: list[SemanticVector] = []
        for index, text in enumerate(texts):
            try:
                out.append(self.embed(text))
            except Exception as exc:
                raise ProviderError(f"batch_embed failed at index {index}: {exc}") from exc
        return out

    def _store(self, key: str, vector: SemanticVector) -> None:
        if self._cache_capacity <= 0:
            return
        with self._lock:
            self._cache[key] = vector
            self._cache.move_to_end(key)
            while len(self._cache) > self._cache_capacity:
                self._cache.popitem(last=False)

    def _embed_uncached(self, text: str) -> SemanticVector:
        raise NotImplementedError


class DeterministicEmbeddingProvider(EmbeddingProvider):
    """Content-hash-seeded pseudo embeddings for offline tests.

    The vector for a text is derived purely from SHA-256 expansion of the
    text bytes (no RNG object, no global state): counter-mode digests are
    mapped to uniform (0, 1) samples, passed through the inverse normal CDF,
    and normalized to unit length. The same text yields the same vector in
    every process.
    """

    def __init__(self, dimension: int = DEFAULT_DIMENSION,
                 cache_capacity: int = DEFAULT_CACHE_CAPACITY):
        super().__init__(dimension, cache_capacity)

    @property
    def kind(self) -> str:
        return "deterministic_test"

    def _embed_uncached(self, text: str) -> SemanticVector:
        raw = _expand_hash(text.encode("utf-8"), self._dimension * 8)
        ints = np.frombuffer(raw, dtype="<u8")
        uniform = (ints.astype(np.float64) + 0.5) / 2.0 ** 64
        gauss = ndtri(uniform)
        norm = float(np.linalg.norm(gauss))
        if norm == 0.0:  # unreachable in practice; keeps the unit-norm contract total
            raise ProviderError("degenerate hash expansion produced a zero vector")
        return SemanticVector(gauss / norm)


def _expand_hash(seed: bytes, n_bytes: int) -> bytes:
    """Counter-mode SHA-256 expansion of ``seed`` to exactly ``n_bytes``."""
    blocks = []
    counter = 0
    size = 0
    while size < n_bytes:
        block = hashlib.sha256(seed + b"\x00" + counter.to_bytes(4, "little")).digest()
        blocks.append(block)
        size += len(block)
        counter += 1
    return b"".join(blocks)[:n_bytes]


class PrecomputedStoreProvider(EmbeddingProvider):
    """Serves vectors from a JSON Lines store keyed by text hash.

    Store format (one record per line)::

        {"sha256": "<hex of trimmed text>", "dim": 384, "values": [ ... ]}

    Every stored dimension must match the provider dimension. A lookup miss
    raises :class:`MissingVectorError` naming the text hash.
    """

    def __init__(self, store_path: str | Path, dimension: int = DEFAULT_DIMENSION,
                 cache_capacity: int = DEFAULT_CACHE_CAPACITY):
        super().__init__(dimension, cache_capacity)
        self._store_path = Path(store_path)
        self._vectors: dict[str, SemanticVector] = {}
        self._load()

    @property
    def kind(self) -> str:
        return "precomputed_store"

    def ready(self) -> bool:
        return bool(self._vectors)

    def _load(self) -> None:
        if not self._store_path.exists():
            raise ProviderError(f"precomputed store not found: {self._store_path}")
        with open(self._store_path, "r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    key = record["sha256"]
                    dim = int(record["dim"])
                    vector = SemanticVector(record["values"])
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise ProviderError(
                        f"bad store record at {self._store_path}:{line_no}: {exc}") from exc
                if dim != self._dimension or vector.dimension != self._dimension:
                    raise ProviderError(
                        f"store record at {self._store_path}:{line_no} has dimension "
                        f"{vector.dimension}, provider expects {self._dimension}")
                self._vectors[key] = vector

    def _embed_uncached(self, text: str) -> SemanticVector:
        key = content_hash(text)
        try:
            return self._vectors[key]
        except KeyError:
            raise MissingVectorError(key) from None

    @staticmethod
    def write_store(path: str | Path, texts: Iterable[str],
                    provider: "EmbeddingProvider") -> int:
        """Materialize a store file for ``texts`` using ``provider``.

        Returns the number of records written. Texts are trimmed exactly as
        ``embed`` trims them, so a later lookup of the same text hits.
        """
        count = 0
        with open(path, "w", encoding="utf-8") as handle:
            for text in texts:
                trimmed = text.strip()
                vector = provider.embed(trimmed)
                record = {
                    "sha256": content_hash(trimmed),
                    "dim": vector.dimension,
                    "values": vector.values.tolist(),
                }
                handle.write(json.dumps(record) + "\n")
                count += 1
        return count


class RemoteEmbeddingProvider(EmbeddingProvider):
    """Client for a minimal embeddings endpoint.

    Wire contract: ``POST {endpoint}`` with body
    ``{"model": <name>, "input": [<text>, ...]}`` and an optional
    ``Authorization: Bearer <key>`` header; the response carries
    ``{"data": [{"embedding": [...]}, ...]}`` in input order.
    """

    def __init__(self, endpoint: str, model_name: str,
                 dimension: int = DEFAULT_DIMENSION,
                 api_key: str | None = None,
                 timeout: float = 30.0,
                 cache_capacity: int = DEFAULT_CACHE_CAPACITY):
        super().__init__(dimension, cache_capacity)
        if not endpoint:
            raise InvariantError("remote provider requires an endpoint URL")
        self._endpoint = endpoint
        self._model_name = model_name
        self._api_key = api_key
        self._timeout = timeout

    @property
    def kind(self) -> str:
        return "remote"

    @property
    def endpoint(self) -> str:
        return self._endpoint

    @property
    def model_name(self) -> str:
        return self._model_name

    def ready(self) -> bool:
        return bool(self._endpoint)

    def _embed_uncached(self, text: str) -> SemanticVector:
        return self._request([text])[0]

    def batch_embed(self, texts: Iterable[str]) -> list[SemanticVector]:
        """One round trip for the cache misses, preserving input order."""
        items = list(texts)
        out: list[SemanticVector | None] = [None] * len(items)
        misses: list[tuple[int, str]] = []
        for index, text in enumerate(items):
            if not isinstance(text, str) or not text.strip():
                raise ProviderError(f"batch_embed failed at index {index}: empty text")
            trimmed = text.strip()
            key = content_hash(trimmed)
            with self._lock:
                hit = self._cache.get(key)
            if hit is not None:
                out[index] = hit
            else:
                misses.append((index, trimmed))
        if misses:
            try:
                vectors = self._request([t for _, t in misses])
            except Exception as exc:
                raise ProviderError(
                    f"batch_embed failed at index {misses[0][0]}: {exc}") from exc
            for (index, trimmed), vector in zip(misses, vectors):
                self._store(content_hash(trimmed), vector)
                out[index] = vector
        return [v for v in out if v is not None]

    def _request(self, texts: list[str]) -> list[SemanticVector]:
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        body = {"model": self._model_name, "input": texts}
        try:
            response = requests.post(self._endpoint, json=body, headers=headers,
                                     timeout=self._timeout)
        except requests.Timeout as exc:
            raise ProviderTimeoutError(f"embedding endpoint timed out: {self._endpoint}") from exc
        except requests.RequestException as exc:
            raise ProviderError(f"embedding endpoint unreachable: {exc}") from exc
        if response.status_code != 200:
            raise ProviderError(
                f"embedding endpoint returned {response.status_code}: {response.text[:200]}")
        try:
            payload = response.json()
            rows = payload["data"]
            vectors = [SemanticVector(row["embedding"]) for row in rows]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderError(f"malformed embedding response: {exc}") from exc
        if len(vectors) != len(texts):
            raise ProviderError(
                f"embedding endpoint returned {len(vectors)} vectors for {len(texts)} texts")
        for vector in vectors:
            if vector.dimension != self._dimension:
                raise ProviderError(
                    f"provider returned dimension {vector.dimension}, expected {self._dimension}")
        return vectors


def make_provider(config: ProviderConfig) -> EmbeddingProvider:
    """Build a provider from configuration, resolving env var fallbacks."""
    if config.kind == "deterministic_test":
        return DeterministicEmbeddingProvider(config.dimension, config.cache_capacity)
    if config.kind == "precomputed_store":
        if not config.store_path:
            raise InvariantError("precomputed_store provider requires store_path")
        return PrecomputedStoreProvider(config.store_path, config.dimension,
                                        config.cache_capacity)
    endpoint = config.endpoint or os.environ.get(EMBED_URL_ENV)
    if not endpoint:
        raise InvariantError(
            f"remote provider requires an endpoint (config or {EMBED_URL_ENV})")
    return RemoteEmbeddingProvider(
        endpoint=endpoint,
        model_name=config.model_name,
        dimension=config.dimension,
        api_key=os.environ.get(EMBED_KEY_ENV),
        cache_capacity=config.cache_capacity,
    )
