"""Paper personas: claim generation, counter-evidence preemption, debate turns."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Sequence

from .corpus import PaperRecord, Segment
from .gateway import ContentError, Gateway, StructuredOutputError, TransportError
from .retrieval import EmbeddingError
from .schemas import (
    ReplySchema,
    SchemaError,
    coerce_yes_no,
    require_int_list,
    require_str,
)


class Side(str, Enum):
    AUTHOR_0 = "author_0"
    AUTHOR_1 = "author_1"

    @property
    def label(self) -> str:
        return "Author 0" if self is Side.AUTHOR_0 else "Author 1"

    @property
    def other(self) -> "Side":
        return Side.AUTHOR_1 if self is Side.AUTHOR_0 else Side.AUTHOR_0


class Stage(str, Enum):
    PRESENT = "present"
    RESPOND = "respond"
    REVISE = "revise"


@dataclass(frozen=True)
class Persona:
    paper: PaperRecord
    side: Side


@dataclass
class Claim:
    """A claimed novel contribution with citations into the evidence pool."""

    claim_id: int
    title: str
    description: str
    evidence_ids: list[int]


@dataclass
class EvidencePool:
    """Evidence a persona prepared for one node.

    `supporting` is the retrieved pool the persona's own claims cite into;
    `counter` maps each opposing claim id to counter-evidence from this
    persona's paper; opposing claims with no surviving counter-evidence are
    flagged `unaddressed`.
    """

    supporting: list[Segment] = field(default_factory=list)
    counter: dict[int, list[Segment]] = field(default_factory=dict)
    unaddressed: set[int] = field(default_factory=set)


@dataclass(frozen=True)
class DebateTurn:
    speaker: Side
    stage: Stage
    text: str


@dataclass(frozen=True)
class RelevanceVerdict:
    supports: bool
    refutes: bool
    clarifies: bool
    irrelevant: bool


@dataclass
class ContributionView:
    """One claim as shown in debate prompts: its evidence plus the
    opponent's counter-evidence aimed at it."""

    claim: Claim
    evidence_texts: list[str]
    counter_texts: list[str] = field(default_factory=list)


class PreconditionError(RuntimeError):
    """An operation was invoked before its required debate state existed."""


class ClaimListSchema(ReplySchema):
    """1..max_claims arguments, each citing valid evidence ids."""

    schema_id = "claim_list"

    def __init__(self, max_claims: int, n_evidence: int) -> None:
        self.max_claims = max_claims
        self.n_evidence = n_evidence

    def validate(self, payload: Any) -> list[Claim]:
        if isinstance(payload, dict):
            payload = [payload]
        if not isinstance(payload, list) or not payload:
            raise SchemaError("expected a non-empty list of arguments")
        if len(payload) > self.max_claims:
            raise SchemaError(
                f"expected at most {self.max_claims} arguments, got {len(payload)}"
            )
        claims = []
        for i, item in enumerate(payload):
            where = f"argument[{i}]"
            if not isinstance(item, dict):
                raise SchemaError(f"{where}: expected an object")
            title = require_str(item, "argument_title", where)
            description = require_str(item, "description", where)
            evidence_ids = require_int_list(item, "evidence", where)
            if not evidence_ids:
                raise SchemaError(f"{where}: evidence list must be non-empty")
            bad = [e for e in evidence_ids if not 0 <= e < self.n_evidence]
            if bad:
                raise SchemaError(
                    f"{where}: evidence ids {bad} outside the input list "
                    f"(valid range 0..{self.n_evidence - 1})"
                )
            claims.append(
                Claim(claim_id=i, title=title, description=description, evidence_ids=evidence_ids)
            )
        return claims


class RelevanceSchema(ReplySchema):
    schema_id = "relevance_verdict"

    def validate(self, payload: Any) -> RelevanceVerdict:
        if not isinstance(payload, dict):
            raise SchemaError("expected an object with the four relevance fields")
        fields = {}
        for key in ("supports_claim", "refutes_claim", "clarifies_claim", "irrelevant_to_claim"):
            if key not in payload:
                raise SchemaError(f"missing field {key!r}")
            fields[key] = coerce_yes_no(payload[key], key)
        return RelevanceVerdict(
            supports=fields["supports_claim"],
            refutes=fields["refutes_claim"],
            clarifies=fields["clarifies_claim"],
            irrelevant=fields["irrelevant_to_claim"],
        )


def keep_evidence(verdict: RelevanceVerdict) -> bool:
    """Counter-evidence survives if it engages the claim and is not irrelevant."""
    return (verdict.supports or verdict.refutes or verdict.clarifies) and not verdict.irrelevant


def format_evidence_list(texts: Sequence[str]) -> str:
    """Numbered evidence block; ids match the citation range (0-based)."""
    return "\n".join(f"Evidence #{i}: {text}" for i, text in enumerate(texts))


def format_contributions(
    side: Side, contributions: Sequence[ContributionView]
) -> str:
    """Contribution block for the present/respond/revise prompts."""
    lines = []
    for view in contributions:
        n = view.claim.claim_id
        evidence = " ".join(view.evidence_texts) if view.evidence_texts else "None provided."
        counter = " ".join(view.counter_texts) if view.counter_texts else "None provided."
        lines.append(
            f"{side.label} Paper's Contributions #{n}: {view.claim.title}: {view.claim.description}"
        )
        lines.append(f"{side.label} Paper's Contribution Evidence #{n}: {evidence}")
        lines.append(
            f"{side.other.label}'s relevant evidence to potentially counter the quality "
            f"of this contribution: {counter}"
        )
    return "\n".join(lines)


def format_history(turns: Sequence[DebateTurn]) -> str:
    return "\n".join(f"{t.speaker.label} ({t.stage.value}): {t.text}" for t in turns)


def generate_claims(
    persona: Persona,
    topic: str,
    segments: Sequence[Segment],
    k: int,
    gateway: Gateway,
    node_id: str | None = None,
) -> list[Claim]:
    """Ask the persona for up to k claims grounded in the retrieved segments.

    An empty segment pool or an unrecoverable structured-output failure
    degrades to zero claims; the persona still participates in the debate.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not segments:
        gateway.transcript.note(
            f"{persona.side.value}: no retrieved segments, entering node claimless",
            node_id=node_id,
        )
        return []
    request = gateway.build_request(
        "persona_generate_arguments",
        {
            "paper_title": persona.paper.title,
            "paper_abstract": persona.paper.abstract,
            "topic": topic,
            "evidence": format_evidence_list([s.text for s in segments]),
            "k": str(k),
        },
    )
    schema = ClaimListSchema(max_claims=k, n_evidence=len(segments))
    try:
        reply = gateway.complete_structured(request, schema, node_id=node_id)
    except StructuredOutputError as exc:
        gateway.transcript.note(
            f"{persona.side.value}: claim generation failed ({exc}); entering node claimless",
            node_id=node_id,
        )
        return []
    return reply.parsed


def classify_relevance(
    segment: Segment,
    claim: Claim,
    gateway: Gateway,
    node_id: str | None = None,
) -> RelevanceVerdict:
    """Judge one segment against one claim (supports/refutes/clarifies/irrelevant)."""
    request = gateway.build_request(
        "persona_relevance",
        {
            "claim_title": claim.title,
            "claim_description": claim.description,
            "evidence": segment.text,
        },
    )
    try:
        reply = gateway.complete_structured(request, RelevanceSchema(), node_id=node_id)
    except StructuredOutputError:
        gateway.transcript.note(
            f"relevance check failed for segment {segment.segment_id}; treated as irrelevant",
            node_id=node_id,
        )
        return RelevanceVerdict(supports=False, refutes=False, clarifies=False, irrelevant=True)
    return reply.parsed


def preempt(
    persona: Persona,
    opposing_claims: Sequence[Claim],
    retrieve: Callable[[str], list[Segment]],
    gateway: Gateway,
    node_id: str | None = None,
) -> tuple[dict[int, list[Segment]], set[int]]:
    """Collect counter-evidence from the persona's own paper per opposing claim.

    The retrieval query is built from the opposing claim's title and
    description only. Returns the counter map and the set of opposing claim
    ids left unaddressed.
    """
    counter: dict[int, list[Segment]] = {}
    unaddressed: set[int] = set()
    for claim in opposing_claims:
        query = f"{claim.title} : {claim.description}"
        try:
            candidates = retrieve(query)
            kept = [
                segment
                for segment in candidates
                if keep_evidence(classify_relevance(segment, claim, gateway, node_id=node_id))
            ]
        except (TransportError, ContentError, EmbeddingError) as exc:
            # One claim's failure must not abort preemption for the rest.
            gateway.transcript.note(
                f"{persona.side.value}: preemption failed for opposing claim "
                f"{claim.claim_id} ({exc}); marked unaddressed",
                node_id=node_id,
            )
            kept = []
        counter[claim.claim_id] = kept
        if not kept:
            unaddressed.add(claim.claim_id)
    return counter, unaddressed


def _debate_bindings(
    persona: Persona,
    opponent: PaperRecord,
    topic: str,
    topic_description: str,
    contributions: Sequence[ContributionView],
) -> dict[str, str]:
    return {
        "paper_title": persona.paper.title,
        "paper_abstract": persona.paper.abstract,
        "opposition_title": opponent.title,
        "opposition_abstract": opponent.abstract,
        "topic": topic,
        "topic_description": topic_description,
        "contributions": format_contributions(persona.side, contributions),
    }


def present_argument(
    persona: Persona,
    opponent: PaperRecord,
    topic: str,
    topic_description: str,
    contributions: Sequence[ContributionView],
    gateway: Gateway,
    node_id: str | None = None,
) -> DebateTurn:
    request = gateway.build_request(
        "persona_present",
        _debate_bindings(persona, opponent, topic, topic_description, contributions),
    )
    text = gateway.complete(request, node_id=node_id)
    return DebateTurn(speaker=persona.side, stage=Stage.PRESENT, text=text)


def respond_to(
    persona: Persona,
    opponent: PaperRecord,
    topic: str,
    topic_description: str,
    contributions: Sequence[ContributionView],
    history: Sequence[DebateTurn],
    gateway: Gateway,
    node_id: str | None = None,
) -> DebateTurn:
    opponent_presented = any(
        t.speaker is persona.side.other and t.stage is Stage.PRESENT for t in history
    )
    if not opponent_presented:
        raise PreconditionError(
            f"{persona.side.value} cannot respond: opposition has not presented yet"
        )
    bindings = _debate_bindings(persona, opponent, topic, topic_description, contributions)
    bindings["conversation_history"] = format_history(history)
    request = gateway.build_request("persona_respond", bindings)
    text = gateway.complete(request, node_id=node_id)
    return DebateTurn(speaker=persona.side, stage=Stage.RESPOND, text=text)


def revise_argument(
    persona: Persona,
    opponent: PaperRecord,
    topic: str,
    topic_description: str,
    contributions: Sequence[ContributionView],
    history: Sequence[DebateTurn],
    gateway: Gateway,
    node_id: str | None = None,
) -> DebateTurn:
    responded = {t.speaker for t in history if t.stage is Stage.RESPOND}
    if responded != {Side.AUTHOR_0, Side.AUTHOR_1}:
        raise PreconditionError(
            f"{persona.side.value} cannot revise: both responses must exist first"
        )
    bindings = _debate_bindings(persona, opponent, topic, topic_description, contributions)
    bindings["conversation_history"] = format_history(history)
    request = gateway.build_request("persona_revise", bindings)
    text = gateway.complete(request, node_id=node_id)
    return DebateTurn(speaker=persona.side, stage=Stage.REVISE, text=text)
