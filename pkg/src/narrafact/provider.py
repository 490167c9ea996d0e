"""Model gateway: chat completions and embeddings behind one interface.

Every other stage talks to a Provider, so the whole pipeline runs offline
against scripted queues, records live transcripts, and replays them
byte-identically.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import tokenize
from .errors import (
    EmptyInput,
    InvalidParams,
    ProviderExhausted,
    RemoteError,
    ReplayMismatch,
)

DEFAULT_EMBED_DIM = 256


@dataclass(frozen=True)
class ChatRequest:
    prompt: str
    temperature: float = 0.0
    tag: str = ""

    def __post_init__(self) -> None:
        if not self.prompt:
            raise InvalidParams("prompt must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise InvalidParams("temperature must be in [0, 2]")


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def deterministic_embedding(text: str, dim: int = DEFAULT_EMBED_DIM) -> list[float]:
    """Unit-norm vector built from hashed token counts; model-free fallback."""
    if not text:
        raise EmptyInput("cannot embed empty text")
    tokens = tokenize(text) or [text]
    vec = [0.0] * dim
    for token in tokens:
        bucket = int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest()[:8], "big")
        vec[bucket % dim] += 1.0
    norm = math.sqrt(sum(x * x for x in vec))
    return [x / norm for x in vec]


class Provider:
    """Gateway interface; concrete backends override chat/embed."""

    def chat(self, request: ChatRequest) -> str:
        raise NotImplementedError

    def embed(self, text: str) -> list[float]:
        raise NotImplementedError


@dataclass
class TranscriptEntry:
    kind: str  # "chat" or "embed"
    tag: str
    digest: str
    response: str  # chat text, or JSON-encoded vector for embeds

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "tag": self.tag, "digest": self.digest, "response": self.response},
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "TranscriptEntry":
        raw = json.loads(line)
        return cls(kind=raw["kind"], tag=raw.get("tag", ""), digest=raw["digest"], response=raw["response"])


@dataclass
class Transcript:
    entries: list[TranscriptEntry] = field(default_factory=list)
    mode: str = "scripted"  # record | replay | scripted

    def save(self, path: str | Path) -> None:
        lines = "".join(entry.to_json() + "\n" for entry in self.entries)
        Path(path).write_text(lines, encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, mode: str = "replay") -> "Transcript":
        entries = [
            TranscriptEntry.from_json(line)
            for line in Path(path).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        return cls(entries=entries, mode=mode)


class ScriptedProvider(Provider):
    """Deterministic provider fed from FIFO response queues.

    Chat responses are consumed in order; embeddings come from an optional
    scripted queue and otherwise fall back to the deterministic hashed
    embedding. Queue pops are serialized so concurrent callers each get
    exactly one entry.
    """

    def __init__(
        self,
        responses: Iterable[str] = (),
        embeddings: Iterable[Sequence[float]] = (),
        embed_dim: int = DEFAULT_EMBED_DIM,
    ) -> None:
        self._responses = list(responses)
        self._embeddings = [list(v) for v in embeddings]
        self._embed_dim = embed_dim
        self._lock = threading.Lock()
        self.calls: list[ChatRequest] = []

    def push(self, *responses: str) -> None:
        with self._lock:
            self._responses.extend(responses)

    def chat(self, request: ChatRequest) -> str:
        with self._lock:
            if not self._responses:
                raise ProviderExhausted(f"scripted queue empty (tag={request.tag!r})")
            self.calls.append(request)
            return self._responses.pop(0)

    def embed(self, text: str) -> list[float]:
        if not text:
            raise EmptyInput("cannot embed empty text")
        with self._lock:
            if self._embeddings:
                return self._embeddings.pop(0)
        return deterministic_embedding(text, self._embed_dim)


class RecordingProvider(Provider):
    """Wraps another provider and appends every exchange to a transcript."""

    def __init__(self, inner: Provider, transcript: Transcript | None = None) -> None:
        self.inner = inner
        self.transcript = transcript if transcript is not None else Transcript(mode="record")
        self.transcript.mode = "record"
        self._lock = threading.Lock()

    def chat(self, request: ChatRequest) -> str:
        response = self.inner.chat(request)
        entry = TranscriptEntry("chat", request.tag, prompt_digest(request.prompt), response)
        with self._lock:
            self.transcript.entries.append(entry)
        return response

    def embed(self, text: str) -> list[float]:
        vector = self.inner.embed(text)
        entry = TranscriptEntry("embed", "", prompt_digest(text), json.dumps(vector))
        with self._lock:
            self.transcript.entries.append(entry)
        return vector


class ReplayProvider(Provider):
    """Serves a recorded transcript back, verifying digests in order."""

    def __init__(self, transcript: Transcript) -> None:
        self.transcript = transcript
        self._cursor = 0
        self._lock = threading.Lock()

    def _next(self, kind: str, digest: str) -> TranscriptEntry:
        with self._lock:
            if self._cursor >= len(self.transcript.entries):
                raise ReplayMismatch("transcript exhausted")
            entry = self.transcript.entries[self._cursor]
            if entry.kind != kind or entry.digest != digest:
                raise ReplayMismatch(
                    f"replay entry {self._cursor} expected {entry.kind}:{entry.digest[:12]}, "
                    f"got {kind}:{digest[:12]}"
                )
            self._cursor += 1
            return entry

    def chat(self, request: ChatRequest) -> str:
        return self._next("chat", prompt_digest(request.prompt)).response

    def embed(self, text: str) -> list[float]:
        if not text:
            raise EmptyInput("cannot embed empty text")
        entry = self._next("embed", prompt_digest(text))
        return json.loads(entry.response)


class RemoteProvider(Provider):
    """OpenAI-style HTTP backend with bounded retries.

    Configuration comes from explicit arguments or the NARRAFACT_* env vars:
    NARRAFACT_MODEL_URL, NARRAFACT_API_KEY, NARRAFACT_MODEL,
    NARRAFACT_EMBED_URL, NARRAFACT_EMBED_MODEL.
    """

    def __init__(
        self,
        model_url: str | None = None,
        api_key: str | None = None,
        model: str | None = None,
        embed_url: str | None = None,
        embed_model: str | None = None,
        max_attempts: int = 3,
        backoff_base: float = 1.0,
        timeout: float = 120.0,
        sleep=time.sleep,
    ) -> None:
        self.model_url = model_url or os.environ.get("NARRAFACT_MODEL_URL", "")
        self.api_key = api_key or os.environ.get("NARRAFACT_API_KEY", "")
        self.model = model or os.environ.get("NARRAFACT_MODEL", "")
        self.embed_url = embed_url or os.environ.get("NARRAFACT_EMBED_URL", "")
        self.embed_model = embed_model or os.environ.get("NARRAFACT_EMBED_MODEL", "")
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.timeout = timeout
        self._sleep = sleep

    def _post(self, url: str, payload: dict) -> dict:
        import requests

        if not url:
            raise RemoteError("remote endpoint not configured")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            try:
                response = requests.post(url, json=payload, headers=headers, timeout=self.timeout)
                if response.status_code >= 500:
                    raise RemoteError(f"server error {response.status_code}")
                response.raise_for_status()
                return response.json()
            except Exception as exc:  # transient by assumption; retried with backoff
                last_error = exc
                if attempt + 1 < self.max_attempts:
                    self._sleep(self.backoff_base * (2**attempt))
        raise RemoteError(f"remote call failed after {self.max_attempts} attempts: {last_error}")

    def chat(self, request: ChatRequest) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
        }
        data = self._post(self.model_url, payload)
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise RemoteError(f"unexpected chat response shape: {exc}") from exc

    def embed(self, text: str) -> list[float]:
        if not text:
            raise EmptyInput("cannot embed empty text")
        data = self._post(self.embed_url, {"model": self.embed_model, "input": text})
        try:
            return [float(x) for x in data["data"][0]["embedding"]]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise RemoteError(f"unexpected embedding response shape: {exc}") from exc
