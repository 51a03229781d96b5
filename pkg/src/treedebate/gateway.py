"""Chat-completion gateway: sampling profiles, transcript, structured replies."""

from __future__ import annotations

import random
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Protocol

from . import prompts
from .schemas import SCHEMA_REGISTRY, ReplySchema, SchemaError

# Per-task sampling temperatures (the eight-entry default table).
DEFAULT_TEMPERATURES: dict[str, float] = {
    "persona_generate_arguments": 0.3,
    "persona_relevance": 0.0,
    "persona_present": 0.1,
    "persona_respond": 0.4,
    "persona_revise": 0.4,
    "mod_generate_topics": 0.3,
    "mod_is_expand": 0.1,
    "mod_summarize": 0.4,
}

# "top 1% of the tokens" is read as nucleus mass 0.99 by default; the
# alternative reading (0.01) stays available through configuration.
DEFAULT_NUCLEUS_MASS = 0.99
DEFAULT_MAX_TOKENS = 1024


class TransportError(RuntimeError):
    """The provider was unreachable or kept failing after retries."""


class ContentError(RuntimeError):
    """The provider answered but refused or returned unusable content."""


class StructuredOutputError(RuntimeError):
    """No valid structured reply after the repair budget was spent."""

    def __init__(self, message: str, attempts: list[str]) -> None:
        super().__init__(message)
        self.attempts = attempts


@dataclass(frozen=True)
class SamplingProfile:
    task: str
    temperature: float
    nucleus_mass: float = DEFAULT_NUCLEUS_MASS
    max_tokens: int = DEFAULT_MAX_TOKENS

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 0.5:
            raise ValueError(f"temperature out of range [0, 0.5]: {self.temperature}")
        if not 0.0 < self.nucleus_mass <= 1.0:
            raise ValueError(f"nucleus_mass out of range (0, 1]: {self.nucleus_mass}")


@dataclass(frozen=True)
class ChatReply:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0


class ChatProvider(Protocol):
    provider_id: str

    def complete(self, prompt: str, profile: SamplingProfile, tag: str) -> ChatReply: ...


@dataclass(frozen=True)
class ChatRequest:
    template_id: str
    prompt: str
    profile: SamplingProfile


@dataclass(frozen=True)
class StructuredReply:
    raw_text: str
    parsed: Any
    repair_attempts: int


@dataclass
class TranscriptEntry:
    kind: str  # "chat", "embedding", or "note"
    label: str
    node_id: str | None = None
    prompt: str | None = None
    reply: str | None = None
    latency_ms: float = 0.0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    note: str | None = None


@dataclass
class Transcript:
    """Append-only log of every provider interaction in a run."""

    entries: list[TranscriptEntry] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def record_chat(
        self,
        label: str,
        prompt: str,
        reply: str,
        latency_ms: float,
        prompt_tokens: int,
        completion_tokens: int,
        node_id: str | None = None,
    ) -> None:
        with self._lock:
            self.entries.append(
                TranscriptEntry(
                    kind="chat",
                    label=label,
                    node_id=node_id,
                    prompt=prompt,
                    reply=reply,
                    latency_ms=latency_ms,
                    prompt_tokens=prompt_tokens,
                    completion_tokens=completion_tokens,
                )
            )

    def record_embedding(self, label: str, n_texts: int) -> None:
        with self._lock:
            self.entries.append(
                TranscriptEntry(kind="embedding", label=label, note=f"{n_texts} texts")
            )

    def note(self, text: str, node_id: str | None = None) -> None:
        with self._lock:
            self.entries.append(TranscriptEntry(kind="note", label="note", node_id=node_id, note=text))

    def chat_entries(self) -> list[TranscriptEntry]:
        with self._lock:
            return [e for e in self.entries if e.kind == "chat"]

    def render_markdown(self, header: dict[str, str] | None = None) -> str:
        """Human-readable transcript; deterministic for deterministic inputs."""
        with self._lock:
            entries = list(self.entries)
        lines = ["# Run transcript", ""]
        for key, value in (header or {}).items():
            lines.append(f"- {key}: {value}")
        if header:
            lines.append("")
        call_no = 0
        for entry in entries:
            if entry.kind == "chat":
                call_no += 1
                lines.append(f"## Call {call_no} - {entry.label}")
                lines.append("")
                if entry.node_id is not None:
                    lines.append(f"- node: {entry.node_id}")
                lines.append(f"- latency_ms: {entry.latency_ms:.1f}")
                lines.append(
                    f"- tokens: prompt={entry.prompt_tokens} completion={entry.completion_tokens}"
                )
                lines.append("")
                lines.append("### Prompt")
                lines.append("")
                lines.append("```text")
                lines.append(entry.prompt or "")
                lines.append("```")
                lines.append("")
                lines.append("### Reply")
                lines.append("")
                lines.append("```text")
                lines.append(entry.reply or "")
                lines.append("```")
                lines.append("")
            elif entry.kind == "embedding":
                lines.append(f"> embedding call ({entry.label}): {entry.note}")
                lines.append("")
            else:
                where = f" [{entry.node_id}]" if entry.node_id else ""
                lines.append(f"> note{where}: {entry.note}")
                lines.append("")
        return "\n".join(lines)


_REPAIR_SUFFIX = (
    "\n\nYour previous reply could not be used:\n{error}\n"
    "Previous reply:\n{reply}\n\n"
    "Answer again. Return only a single fenced JSON value that follows the "
    "requested format exactly."
)


class Gateway:
    """Renders prompts, routes sampling settings, and talks to the provider."""

    def __init__(
        self,
        provider: ChatProvider,
        transcript: Transcript,
        temperatures: dict[str, float] | None = None,
        nucleus_mass: float = DEFAULT_NUCLEUS_MASS,
        max_tokens: int = DEFAULT_MAX_TOKENS,
        retries: int = 3,
        repair_budget: int = 2,
        max_in_flight: int = 4,
        clock: Callable[[], float] = time.perf_counter,
        sleeper: Callable[[float], None] = time.sleep,
    ) -> None:
        self.provider = provider
        self.transcript = transcript
        self.temperatures = dict(DEFAULT_TEMPERATURES)
        if temperatures:
            self.temperatures.update(temperatures)
        self.nucleus_mass = nucleus_mass
        self.max_tokens = max_tokens
        self.retries = retries
        self.repair_budget = repair_budget
        self._slots = threading.Semaphore(max_in_flight)
        self._clock = clock
        self._sleep = sleeper

    def profile_for(self, task: str) -> SamplingProfile:
        if task not in self.temperatures:
            raise KeyError(f"no sampling profile registered for task {task!r}")
        return SamplingProfile(
            task=task,
            temperature=self.temperatures[task],
            nucleus_mass=self.nucleus_mass,
            max_tokens=self.max_tokens,
        )

    def build_request(self, template_id: str, bindings: dict[str, str]) -> ChatRequest:
        return ChatRequest(
            template_id=template_id,
            prompt=prompts.render_prompt(template_id, bindings),
            profile=self.profile_for(template_id),
        )

    def complete(self, request: ChatRequest, node_id: str | None = None) -> str:
        """Send one prompt; retry transient transport failures with backoff."""
        reply = self._call(request.prompt, request.profile, request.template_id, node_id)
        return reply.text

    def complete_raw(
        self,
        label: str,
        prompt: str,
        temperature: float,
        node_id: str | None = None,
    ) -> str:
        """Completion outside the eight-template registry (baseline variants)."""
        profile = SamplingProfile(
            task=label,
            temperature=temperature,
            nucleus_mass=self.nucleus_mass,
            max_tokens=self.max_tokens,
        )
        return self._call(prompt, profile, label, node_id).text

    def complete_structured(
        self,
        request: ChatRequest,
        schema: ReplySchema,
        node_id: str | None = None,
    ) -> StructuredReply:
        """Complete, parse, and validate; re-prompt on schema failures."""
        if type(schema).schema_id not in SCHEMA_REGISTRY:
            raise KeyError(f"schema {type(schema).schema_id!r} is not registered")
        attempts: list[str] = []
        prompt = request.prompt
        for round_no in range(self.repair_budget + 1):
            text = self._call(prompt, request.profile, request.template_id, node_id).text
            attempts.append(text)
            try:
                parsed = schema.parse(text)
            except SchemaError as exc:
                if round_no == self.repair_budget:
                    raise StructuredOutputError(
                        f"{request.template_id}: no valid structured reply after "
                        f"{self.repair_budget} repair rounds: {exc}",
                        attempts,
                    ) from exc
                prompt = request.prompt + _REPAIR_SUFFIX.format(error=exc, reply=text)
                continue
            return StructuredReply(raw_text=text, parsed=parsed, repair_attempts=round_no)
        raise AssertionError("unreachable")

    def _call(
        self,
        prompt: str,
        profile: SamplingProfile,
        label: str,
        node_id: str | None,
    ) -> ChatReply:
        last_error: Exception | None = None
        for attempt in range(self.retries):
            started = self._clock()
            try:
                with self._slots:
                    reply = self.provider.complete(prompt, profile, label)
            except TransportError as exc:
                last_error = exc
                if attempt + 1 < self.retries:
                    backoff = 0.5 * (2**attempt) * random.uniform(0.5, 1.5)
                    self._sleep(backoff)
                continue
            latency_ms = (self._clock() - started) * 1000.0
            self.transcript.record_chat(
                label=label,
                prompt=prompt,
                reply=reply.text,
                latency_ms=latency_ms,
                prompt_tokens=reply.prompt_tokens,
                completion_tokens=reply.completion_tokens,
                node_id=node_id,
            )
            return reply
        raise TransportError(
            f"provider {self.provider.provider_id!r} failed after {self.retries} attempts: {last_error}"
        )
