"""Intent-embedding providers and the shared normalization wrapper.

Two interchangeable providers: a remote embedding endpoint (see gateway)
and a deterministic offline embedder that projects hashed token counts
through seeded pseudo-random directions. The offline embedder exists so
the whole pipeline is testable without network access; only relative
cosine ordering matters to the matching logic.
"""

import hashlib
import logging
from typing import Protocol

import numpy as np

from .errors import DimensionMismatchError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_DIM = 384


class Embedder(Protocol):
    """Anything that turns text into a fixed-dimension vector."""

    name: str
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


class DeterministicEmbedder:
    """Seeded random projection of token hash counts.

    The vector for a text is the count-weighted sum of per-token direction
    vectors, where each direction is drawn from a PRNG seeded by
    (seed, sha256(token)). Output depends only on the input text and the
    seed, never on the process or platform.
    """

    name = "deterministic"

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = 7, max_chars: int = 100_000):
        if dim < 1:
            raise ValidationError("embedding dimension must be >= 1")
        self.dim = dim
        self.seed = seed
        self.max_chars = max_chars
        self._token_cache: dict[str, np.ndarray] = {}

    def _token_direction(self, token: str) -> np.ndarray:
        vec = self._token_cache.get(token)
        if vec is None:
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            entropy = int.from_bytes(digest[:8], "big")
            rng = np.random.default_rng([self.seed, entropy])
            vec = rng.standard_normal(self.dim)
            self._token_cache[token] = vec
        return vec

    def embed(self, text: str) -> np.ndarray:
        if len(text) > self.max_chars:
            logger.warning(
                "embedding input truncated from %d to %d chars",
                len(text), self.max_chars,
            )
            text = text[: self.max_chars]
        tokens = _tokenize(text)
        if not tokens:
            # no alphanumeric content; hash the raw text as a single token
            tokens = {text: 1}
        acc = np.zeros(self.dim)
        for token, count in tokens.items():
            acc += count * self._token_direction(token)
        return acc


def _tokenize(text: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    current: list[str] = []
    for ch in text.lower():
        if ch.isalnum():
            current.append(ch)
        elif current:
            token = "".join(current)
            counts[token] = counts.get(token, 0) + 1
            current = []
    if current:
        token = "".join(current)
        counts[token] = counts.get(token, 0) + 1
    return counts


class RemoteEmbedder:
    """Embedding via a remote endpoint; see gateway.GatewayClient."""

    name = "remote"

    def __init__(self, client, dim: int = DEFAULT_DIM):
        self.client = client
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        [vector] = self.client.embed_texts([text])
        return np.asarray(vector, dtype=float)


def embed_intent(intent_text: str, embedder: Embedder) -> np.ndarray:
    """Embed one intent summary and re-normalize to unit Euclidean norm.

    Raises ValidationError for empty text and DimensionMismatchError when
    the provider's vector does not match its configured dimension.
    """
    if not intent_text or not intent_text.strip():
        raise ValidationError("intent text must be non-empty")
    vector = np.asarray(embedder.embed(intent_text), dtype=float)
    if vector.shape != (embedder.dim,):
        raise DimensionMismatchError(
            f"provider returned dimension {vector.shape}, expected ({embedder.dim},)"
        )
    norm = float(np.linalg.norm(vector))
    if norm == 0.0 or not np.isfinite(norm):
        raise ValidationError("provider returned a degenerate (zero/non-finite) vector")
    return vector / norm
