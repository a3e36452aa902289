"""Comparison methods: keyword bag-of-words, whole-text embedding, and an
intent-summary-only variant that skips attribute pruning entirely.

All three share the ranking tie rule (descending score, then ascending
function id) so results stay deterministic under deterministic providers.
"""

import time
from collections import Counter
from typing import Mapping

import numpy as np

from .corpus import Repository
from .embedding import Embedder, embed_intent
from .errors import IntegrityError, ValidationError
from .extraction import ExtractionProvider, SemanticRepresentation, summarize_intent
from .matching import CandidateSet, Ranking, RecommendResult, cosine_similarity
from .stemming import STOP_WORDS, stem

TokenBag = Counter


def _stem_fixpoint(token: str) -> str:
    # iterate so stems re-stem to themselves; converges in a few passes
    stemmed = stem(token)
    while stemmed != token:
        token, stemmed = stemmed, stem(stemmed)
    return stemmed


def keyword_preprocess(text: str) -> Counter:
    """Lowercase, split on non-alphanumeric boundaries, drop stop words,
    stem. Returns a multiset of stems; re-preprocessing the joined stems
    reproduces the same set."""
    bag: Counter = Counter()
    current: list[str] = []

    def flush():
        if current:
            token = "".join(current)
            if token not in STOP_WORDS:
                stemmed = _stem_fixpoint(token)
                if stemmed not in STOP_WORDS:
                    bag[stemmed] += 1
            current.clear()

    for ch in text.lower():
        if ch.isalnum():
            current.append(ch)
        else:
            flush()
    flush()
    return bag


def build_keyword_index(repo: Repository) -> dict[str, frozenset[str]]:
    """Distinct stems of each function's code+readme text."""
    return {
        fid: frozenset(keyword_preprocess(unit.keyword_text()))
        for fid, unit in repo.units.items()
    }


def rank_token_bag(
    query_stems: frozenset[str] | set[str],
    index: Mapping[str, frozenset[str]],
    k: int,
    query_id: str = "query",
) -> Ranking:
    """Score = distinct query stems present in the function's bag,
    normalized by the query stem count so scores stay in [0, 1]."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    denominator = max(1, len(query_stems))
    scored = [
        (fid, len(query_stems & stems) / denominator)
        for fid, stems in sorted(index.items())
    ]
    scored.sort(key=lambda entry: (-entry[1], entry[0]))
    return Ranking(query_id, tuple(scored[:k]), k)


def keyword_rank(
    query_text: str,
    repo: Repository | Mapping[str, frozenset[str]],
    k: int,
    query_id: str = "query",
) -> Ranking:
    """Bag-of-words baseline over code+readme text."""
    index = build_keyword_index(repo) if isinstance(repo, Repository) else repo
    query_stems = frozenset(keyword_preprocess(query_text))
    return rank_token_bag(query_stems, index, k, query_id)


def build_document_index(repo: Repository, embedder: Embedder) -> dict[str, np.ndarray]:
    """Unit-norm embedding of each function's whole textual document
    (name + readme + source)."""
    return {
        fid: embed_intent(unit.document_text(), embedder)
        for fid, unit in repo.units.items()
    }


def rank_document_embeddings(
    query_vector: np.ndarray,
    index: Mapping[str, np.ndarray],
    k: int,
    query_id: str = "query",
) -> Ranking:
    if k < 1:
        raise ValidationError("k must be >= 1")
    scored = [
        (fid, cosine_similarity(query_vector, vector))
        for fid, vector in sorted(index.items())
    ]
    scored.sort(key=lambda entry: (-entry[1], entry[0]))
    return Ranking(query_id, tuple(scored[:k]), k)


def embedding_rank(
    query_text: str,
    repo: Repository | Mapping[str, np.ndarray],
    embedder: Embedder,
    k: int,
    query_id: str = "query",
) -> Ranking:
    """Whole-text embedding baseline: raw query vs whole-document vectors."""
    index = build_document_index(repo, embedder) if isinstance(repo, Repository) else repo
    query_vector = embed_intent(query_text, embedder)
    return rank_document_embeddings(query_vector, index, k, query_id)


def rank_all_intents(
    query_vector: np.ndarray,
    reps: Mapping[str, SemanticRepresentation],
    k: int,
    query_id: str = "query",
) -> RecommendResult:
    """Similarity over every stored intent vector, no pruning."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    start = time.perf_counter()
    scored: list[tuple[str, float]] = []
    evals = 0
    for fid in sorted(reps):
        rep = reps[fid]
        if rep.intent_vector is None:
            raise IntegrityError(f"function '{fid}' has no intent vector")
        scored.append((fid, cosine_similarity(query_vector, rep.intent_vector)))
        evals += 1
    scored.sort(key=lambda entry: (-entry[1], entry[0]))
    latency_ms = (time.perf_counter() - start) * 1000.0
    ranking = Ranking(query_id, tuple(scored[:k]), k)
    return RecommendResult(ranking, CandidateSet(frozenset(reps)), evals, latency_ms)


def variant_rank(
    query_text: str,
    reps: Mapping[str, SemanticRepresentation],
    extractor: ExtractionProvider,
    embedder: Embedder,
    k: int,
    query_id: str = "query",
) -> RecommendResult:
    """Intent-summary-only method: the query intent comes from an
    intent-only prompt, then every function's intent vector is scored.
    The candidate pool is always the whole store."""
    summary = summarize_intent(query_id, query_text, extractor)
    query_vector = embed_intent(summary, embedder)
    return rank_all_intents(query_vector, reps, k, query_id)
