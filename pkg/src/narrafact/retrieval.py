"""Similarity backends and evidence retrieval for fact verification."""

from __future__ import annotations

import math
import threading
from collections import Counter
from dataclasses import dataclass

from .ckg import CharacterKG, iter_triple_renderings
from .corpus import Narrative, tokenize
from .errors import EmptyInput
from .provider import Provider, prompt_digest


@dataclass(frozen=True)
class RetrievedEvidence:
    """Top scene plus up to k supporting triples for one atomic fact."""

    scene_index: int
    scene_score: float
    triples: tuple[tuple[str, float], ...]  # (rendering, score), descending score

    def to_dict(self) -> dict:
        return {
            "scene_index": self.scene_index,
            "scene_score": self.scene_score,
            "triples": [{"rendering": r, "score": s} for r, s in self.triples],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RetrievedEvidence":
        return cls(
            scene_index=payload["scene_index"],
            scene_score=payload["scene_score"],
            triples=tuple((t["rendering"], t["score"]) for t in payload["triples"]),
        )


def _cosine(u: list[float], v: list[float]) -> float:
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


class LexicalBackend:
    """Cosine similarity over lowercased token-count vectors."""

    def similarity(self, a: str, b: str) -> float:
        ca = Counter(t.lower() for t in tokenize(a))
        cb = Counter(t.lower() for t in tokenize(b))
        if not ca or not cb:
            raise EmptyInput("similarity requires non-empty texts")
        dot = sum(count * cb[token] for token, count in ca.items())
        na = math.sqrt(sum(c * c for c in ca.values()))
        nb = math.sqrt(sum(c * c for c in cb.values()))
        return dot / (na * nb)


class EmbeddingBackend:
    """Cosine similarity over provider embeddings with a digest-keyed cache.

    The cache avoids re-embedding every scene for each fact; reads are
    lock-free on hit, inserts are serialized.
    """

    def __init__(self, provider: Provider):
        self.provider = provider
        self._cache: dict[str, list[float]] = {}
        self._lock = threading.Lock()

    def _embed(self, text: str) -> list[float]:
        if not text.strip():
            raise EmptyInput("similarity requires non-empty texts")
        key = prompt_digest(text)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        vector = self.provider.embed(text)
        with self._lock:
            self._cache.setdefault(key, vector)
        return self._cache[key]

    def similarity(self, a: str, b: str) -> float:
        return _cosine(self._embed(a), self._embed(b))


def top_scene(backend, fact: str, narrative: Narrative) -> tuple[int, float]:
    """Most similar scene to the fact; ties go to the lowest scene index."""
    if not fact.strip():
        raise EmptyInput("fact text must be non-empty")
    best_index = -1
    best_score = -math.inf
    for scene in narrative.scenes:
        score = backend.similarity(fact, scene.text)
        if score > best_score:
            best_index, best_score = scene.index, score
    return best_index, best_score


def top_triples(backend, fact: str, graph: CharacterKG, k: int = 3) -> list[tuple[str, float]]:
    """Top-k triple renderings by similarity; ties break lexicographically."""
    if not fact.strip():
        raise EmptyInput("fact text must be non-empty")
    scored = [
        (rendering, backend.similarity(fact, rendering))
        for rendering in iter_triple_renderings(graph)
    ]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:k]


def retrieve_evidence(
    backend,
    fact: str,
    narrative: Narrative,
    graph: CharacterKG | None,
    k: int = 3,
) -> RetrievedEvidence:
    scene_index, scene_score = top_scene(backend, fact, narrative)
    triples: list[tuple[str, float]] = []
    if graph is not None and graph.edges:
        triples = top_triples(backend, fact, graph, k)
    return RetrievedEvidence(
        scene_index=scene_index,
        scene_score=scene_score,
        triples=tuple(triples),
    )
