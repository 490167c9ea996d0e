"""Initial summary generation by chunk summarization and sequential merging."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .corpus import Chunk, Narrative, chunk_scenes
from .errors import InvalidInput
from .prompts import CHUNK_SUMMARY_PROMPT
from .provider import ChatRequest, Provider

# Deliberately simple splitter: terminal punctuation followed by whitespace.
# Abbreviations split imperfectly, which keeps provenance deterministic.
_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+")

UNKNOWN_CHUNK = None


def split_sentences(text: str) -> list[str]:
    """Split text into sentences on `.`, `!`, `?` followed by whitespace."""
    parts = _SENTENCE_BOUNDARY.split(text.strip())
    return [p.strip() for p in parts if p.strip()]


@dataclass(frozen=True)
class SummaryDraft:
    """One summary with per-sentence chunk provenance.

    Iteration 0 is the initial summary; refined drafts carry the parent
    draft id in `lineage`. Sentences joined by single spaces reproduce
    `text`.
    """

    id: str
    iteration: int
    text: str
    sentences: tuple[tuple[str, int | None], ...]
    lineage: str | None = None
    diagnostics: tuple[str, ...] = ()

    def sentence_texts(self) -> list[str]:
        return [s for s, _ in self.sentences]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "iteration": self.iteration,
            "text": self.text,
            "sentences": [{"text": s, "chunk": c} for s, c in self.sentences],
            "lineage": self.lineage,
            "diagnostics": list(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SummaryDraft":
        return cls(
            id=payload["id"],
            iteration=payload["iteration"],
            text=payload["text"],
            sentences=tuple((s["text"], s["chunk"]) for s in payload["sentences"]),
            lineage=payload.get("lineage"),
            diagnostics=tuple(payload.get("diagnostics", ())),
        )


def draft_from_text(
    text: str,
    iteration: int,
    chunk_index: int | None = UNKNOWN_CHUNK,
    lineage: str | None = None,
    diagnostics: tuple[str, ...] = (),
) -> SummaryDraft:
    """Build a draft from raw text, attributing every sentence to one chunk."""
    sentences = tuple((s, chunk_index) for s in split_sentences(text))
    return SummaryDraft(
        id=f"draft-{iteration}",
        iteration=iteration,
        text=" ".join(s for s, _ in sentences),
        sentences=sentences,
        lineage=lineage,
        diagnostics=diagnostics,
    )


def summarize_chunk(provider: Provider, chunk: Chunk, temperature: float = 0.0) -> str:
    """Summarize one chunk with the 2-to-5-sentence instruction; returns the
    response verbatim."""
    if not chunk.text.strip():
        raise InvalidInput(f"chunk {chunk.index} has empty text")
    prompt = CHUNK_SUMMARY_PROMPT.format(chunk=chunk.text)
    return provider.chat(
        ChatRequest(prompt=prompt, temperature=temperature, tag=f"chunk_summary {chunk.index}")
    )


def merge_summaries(chunk_summaries: list[str], diagnostics: tuple[str, ...] = ()) -> SummaryDraft:
    """Left-fold chunk summaries into the initial draft, tracking which chunk
    contributed each sentence."""
    if not chunk_summaries:
        raise InvalidInput("cannot merge an empty list of chunk summaries")
    sentences: list[tuple[str, int | None]] = []
    for chunk_index, summary in enumerate(chunk_summaries):
        for sentence in split_sentences(summary):
            sentences.append((sentence, chunk_index))
    return SummaryDraft(
        id="draft-0",
        iteration=0,
        text=" ".join(s for s, _ in sentences),
        sentences=tuple(sentences),
        lineage=None,
        diagnostics=diagnostics,
    )


def hierarchical_summary(
    provider: Provider,
    narrative: Narrative,
    budget: int = 1024,
    temperature: float = 0.0,
    merge_mode: str = "concat",
) -> SummaryDraft:
    """chunk -> summarize -> merge; one summarization call per chunk.

    merge_mode "recompress" adds one further summarization pass over the
    concatenated chunk summaries (sentence provenance is then unknown).
    """
    chunks = chunk_scenes(narrative, budget)
    summaries = [summarize_chunk(provider, chunk, temperature) for chunk in chunks]
    diagnostics: list[str] = []
    for chunk, summary in zip(chunks, summaries):
        count = len(split_sentences(summary))
        if not 2 <= count <= 5:
            diagnostics.append(
                f"chunk {chunk.index} summary has {count} sentences (instruction asks for 2-5)"
            )
    draft = merge_summaries(summaries, diagnostics=tuple(diagnostics))
    if merge_mode == "recompress" and len(summaries) > 1:
        merged_chunk = Chunk(index=0, scene_indices=(), text=draft.text, token_count=len(draft.text.split()))
        recompressed = summarize_chunk(provider, merged_chunk, temperature)
        return draft_from_text(recompressed, iteration=0, diagnostics=tuple(diagnostics))
    return draft
