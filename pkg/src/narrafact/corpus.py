"""Narrative ingestion, tokenization, and scene/overlap chunking."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .errors import InvalidParams, IoError, MalformedInput

# Tokenization is pluggable; the default counts unicode-whitespace tokens so
# budgets are deterministic without a model dependency.
Tokenizer = Callable[[str], "list[str]"]


def tokenize(text: str) -> list[str]:
    """Split text on runs of unicode whitespace. Empty input gives []."""
    return text.split()


@dataclass(frozen=True)
class Scene:
    index: int
    text: str
    token_count: int

    @classmethod
    def make(cls, index: int, text: str, tokenizer: Tokenizer = tokenize) -> "Scene":
        if not text.strip():
            raise MalformedInput(f"scene {index} has empty text")
        return cls(index=index, text=text, token_count=len(tokenizer(text)))


@dataclass(frozen=True)
class Narrative:
    id: str
    title: str
    scenes: tuple[Scene, ...]

    def __post_init__(self) -> None:
        if not self.scenes:
            raise MalformedInput("narrative has no scenes")
        for position, scene in enumerate(self.scenes):
            if scene.index != position:
                raise MalformedInput(
                    f"scene indices must be contiguous from 0; got {scene.index} at position {position}"
                )

    @property
    def scene_count(self) -> int:
        return len(self.scenes)

    def full_text(self) -> str:
        return "\n\n".join(scene.text for scene in self.scenes)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "scenes": [{"index": s.index, "text": s.text} for s in self.scenes],
        }

    @classmethod
    def from_dict(cls, payload: dict, tokenizer: Tokenizer = tokenize) -> "Narrative":
        if not isinstance(payload, dict):
            raise MalformedInput("narrative payload must be a JSON object")
        try:
            raw_scenes = payload["scenes"]
        except (KeyError, TypeError) as exc:
            raise MalformedInput("narrative payload missing 'scenes'") from exc
        if not isinstance(raw_scenes, list) or not raw_scenes:
            raise MalformedInput("'scenes' must be a non-empty array")
        scenes = []
        for position, item in enumerate(raw_scenes):
            try:
                index = int(item["index"])
                text = str(item["text"])
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedInput(f"scene entry {position} is malformed") from exc
            if index != position:
                raise MalformedInput(
                    f"scene indices must be contiguous from 0; got {index} at position {position}"
                )
            scenes.append(Scene.make(index, text, tokenizer))
        return cls(
            id=str(payload.get("id", "narrative")),
            title=str(payload.get("title", "")),
            scenes=tuple(scenes),
        )


@dataclass(frozen=True)
class Chunk:
    """A token-budgeted slice of the narrative.

    Scene chunks carry the contiguous scene indices they cover; overlap
    chunks of unsegmented text carry no scene indices and act as
    pseudo-scenes downstream.
    """

    index: int
    scene_indices: tuple[int, ...]
    text: str
    token_count: int


def load_narrative(path: str | Path, format: str = "scene_json", tokenizer: Tokenizer = tokenize) -> Narrative:
    """Load a narrative from disk as scene_json or plain_text."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if format == "scene_json":
        try:
            payload = json.loads(raw)
        except ValueError as exc:
            raise MalformedInput(f"{path} is not valid JSON: {exc}") from exc
        return Narrative.from_dict(payload, tokenizer)
    if format == "plain_text":
        if not raw.strip():
            raise MalformedInput(f"{path} is empty")
        return Narrative(
            id=path.stem,
            title=path.stem,
            scenes=(Scene.make(0, raw, tokenizer),),
        )
    raise InvalidParams(f"unknown narrative format: {format!r}")


def chunk_scenes(narrative: Narrative, budget: int = 1024) -> list[Chunk]:
    """Pack scenes left-to-right into chunks of at most `budget` tokens.

    A scene joins the open chunk only if the chunk stays within budget;
    otherwise a new chunk opens. A single scene larger than the budget is
    kept intact in its own chunk rather than split mid-scene.
    """
    if budget < 1:
        raise InvalidParams("budget must be >= 1")
    chunks: list[Chunk] = []
    open_scenes: list[Scene] = []
    open_tokens = 0

    def flush() -> None:
        nonlocal open_scenes, open_tokens
        if not open_scenes:
            return
        chunks.append(
            Chunk(
                index=len(chunks),
                scene_indices=tuple(s.index for s in open_scenes),
                text="\n\n".join(s.text for s in open_scenes),
                token_count=open_tokens,
            )
        )
        open_scenes = []
        open_tokens = 0

    for scene in narrative.scenes:
        if open_scenes and open_tokens + scene.token_count > budget:
            flush()
        open_scenes.append(scene)
        open_tokens += scene.token_count
    flush()
    return chunks


def narrative_from_plain_text(
    id: str,
    title: str,
    text: str,
    window: int = 256,
    overlap: int = 128,
    tokenizer: Tokenizer = tokenize,
) -> Narrative:
    """Treat overlap windows of unsegmented text as pseudo-scenes so the
    whole pipeline applies without explicit scene boundaries."""
    chunks = segment_plain_text(text, window, overlap, tokenizer)
    if not chunks:
        raise MalformedInput("text has no tokens")
    return Narrative(
        id=id,
        title=title,
        scenes=tuple(
            Scene(index=c.index, text=c.text, token_count=c.token_count) for c in chunks
        ),
    )


def segment_plain_text(
    text: str,
    window: int = 256,
    overlap: int = 128,
    tokenizer: Tokenizer = tokenize,
) -> list[Chunk]:
    """Cut unsegmented text into sliding token windows with fixed stride.

    Windows start every (window - overlap) tokens; the last window may be
    shorter and every token lands in at least one chunk. Empty text gives
    no chunks.
    """
    if window < 1:
        raise InvalidParams("window must be >= 1")
    if overlap < 0:
        raise InvalidParams("overlap must be >= 0")
    if overlap >= window:
        raise InvalidParams("overlap must be smaller than window")
    tokens = tokenizer(text)
    if not tokens:
        return []
    stride = window - overlap
    chunks: list[Chunk] = []
    start = 0
    while True:
        piece = tokens[start : start + window]
        chunks.append(
            Chunk(
                index=len(chunks),
                scene_indices=(),
                text=" ".join(piece),
                token_count=len(piece),
            )
        )
        if start + window >= len(tokens):
            break
        start += stride
    return chunks
