"""Chat and embedding providers: OpenAI-compatible HTTP clients and offline mocks."""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import httpx
import numpy as np
import yaml

from .gateway import ChatReply, ContentError, SamplingProfile, TransportError


class MockScriptError(RuntimeError):
    """The scripted provider ran out of entries or got an unexpected call."""


@dataclass
class ScriptEntry:
    """One scripted reply: matches a template id (or '*') `times` times."""

    matcher: str
    reply: str = ""
    times: int = 1
    error: str | None = None  # "transport" or "content" to script a failure


def load_script(path: str | Path) -> list[ScriptEntry]:
    """Read a mock script file: an ordered list of {template, reply} entries."""
    raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise MockScriptError(f"{path}: script must be a list of entries")
    entries = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict) or "template" not in item:
            raise MockScriptError(f"{path}: entry {i} must be a mapping with 'template'")
        entries.append(
            ScriptEntry(
                matcher=str(item["template"]),
                reply=str(item.get("reply", "")),
                times=int(item.get("times", 1)),
                error=item.get("error"),
            )
        )
    return entries


class ScriptedChatProvider:
    """Replays scripted replies in order; calls must match the script sequence."""

    provider_id = "scripted-chat"

    def __init__(self, entries: Sequence[ScriptEntry]) -> None:
        self._entries = list(entries)
        self._index = 0
        self._used = 0
        self._lock = threading.Lock()
        self.calls: list[tuple[str, str, float]] = []  # (tag, prompt, temperature)

    @property
    def call_count(self) -> int:
        return len(self.calls)

    def complete(self, prompt: str, profile: SamplingProfile, tag: str) -> ChatReply:
        with self._lock:
            self.calls.append((tag, prompt, profile.temperature))
            if self._index >= len(self._entries):
                raise MockScriptError(f"script exhausted; unexpected call for {tag!r}")
            entry = self._entries[self._index]
            if entry.matcher != "*" and entry.matcher != tag:
                raise MockScriptError(
                    f"script out of sync: expected {entry.matcher!r}, got {tag!r} "
                    f"at entry {self._index}"
                )
            self._used += 1
            if self._used >= entry.times:
                self._index += 1
                self._used = 0
            if entry.error == "transport":
                raise TransportError(f"scripted transport failure for {tag!r}")
            if entry.error == "content":
                raise ContentError(f"scripted refusal for {tag!r}")
            return ChatReply(
                text=entry.reply,
                prompt_tokens=len(prompt.split()),
                completion_tokens=len(entry.reply.split()),
            )

    def assert_exhausted(self) -> None:
        with self._lock:
            if self._index < len(self._entries):
                raise MockScriptError(
                    f"{len(self._entries) - self._index} scripted entries left unused"
                )


class HashEmbeddingProvider:
    """Deterministic offline embedder: text digest seeds a unit vector."""

    def __init__(self, dimension: int = 32) -> None:
        self.dimension = dimension
        self.provider_id = f"hash-embed-{dimension}"
        self.call_count = 0
        self.queries: list[str] = []

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        self.call_count += 1
        self.queries.extend(texts)
        vectors = []
        for text in texts:
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            seed = int.from_bytes(digest[:8], "big") % (2**32)
            rng = np.random.RandomState(seed)
            vec = rng.standard_normal(self.dimension)
            vec /= np.linalg.norm(vec)
            vectors.append([float(v) for v in vec])
        return vectors


class OpenAIChatProvider:
    """Client for any endpoint speaking the common chat-completions protocol."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 120.0,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.provider_id = f"chat:{self.endpoint}:{model}"
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def complete(self, prompt: str, profile: SamplingProfile, tag: str) -> ChatReply:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": profile.temperature,
            "top_p": profile.nucleus_mass,
            "max_tokens": profile.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = self._client.post(
                f"{self.endpoint}/chat/completions", json=payload, headers=headers
            )
        except httpx.HTTPError as exc:
            raise TransportError(f"chat request failed: {exc}") from exc
        if response.status_code >= 500 or response.status_code == 429:
            raise TransportError(f"chat endpoint returned {response.status_code}")
        if response.status_code >= 400:
            raise ContentError(
                f"chat endpoint rejected the request ({response.status_code}): "
                f"{response.text[:500]}"
            )
        data = response.json()
        try:
            choice = data["choices"][0]
            text = choice["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ContentError(f"malformed chat response: {exc}") from exc
        if text is None or (choice.get("finish_reason") == "content_filter"):
            raise ContentError("provider refused to answer")
        usage = data.get("usage") or {}
        return ChatReply(
            text=text,
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
        )


class OpenAIEmbeddingProvider:
    """Client for any endpoint speaking the common embeddings protocol."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 60.0,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.provider_id = f"embed:{self.endpoint}:{model}"
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = self._client.post(
                f"{self.endpoint}/embeddings",
                json={"model": self.model, "input": list(texts)},
                headers=headers,
            )
        except httpx.HTTPError as exc:
            raise TransportError(f"embedding request failed: {exc}") from exc
        if response.status_code >= 400:
            raise TransportError(
                f"embedding endpoint returned {response.status_code}: "
                f"{response.text[:500]}"
            )
        data = response.json()
        items = sorted(data["data"], key=lambda d: d["index"])
        return [item["embedding"] for item in items]
