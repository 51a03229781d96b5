"""Moderator duties: subtopic proposal, expansion judgment, final synthesis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Sequence

from .corpus import PaperRecord
from .gateway import Gateway, StructuredOutputError
from .persona import ContributionView, DebateTurn, Side, format_history
from .schemas import (
    ReplySchema,
    SchemaError,
    require_bool,
    require_int_list,
    require_str,
)

if TYPE_CHECKING:
    from .tree import DebateTree


@dataclass
class SubtopicProposal:
    title: str
    description: str
    relevant_claims_a: list[int]
    relevant_claims_b: list[int]


@dataclass
class ExpansionVerdict:
    explanation: str
    progression_of_arguments: bool
    meaningful_questions: bool
    clear_winner: bool
    degraded: bool = False


@dataclass(frozen=True)
class SynthesisResult:
    summary: str
    node_count: int
    max_depth_reached: int


class SubtopicListSchema(ReplySchema):
    """Structural validation only; claim-id existence is checked by the caller
    so malformed proposals are dropped rather than re-prompted."""

    schema_id = "subtopic_list"

    def __init__(self, max_items: int) -> None:
        self.max_items = max_items

    def validate(self, payload: Any) -> list[SubtopicProposal]:
        if isinstance(payload, dict):
            payload = [payload]
        if not isinstance(payload, list) or not payload:
            raise SchemaError("expected a non-empty list of subtopics")
        if len(payload) > self.max_items:
            raise SchemaError(
                f"expected at most {self.max_items} subtopics, got {len(payload)}"
            )
        proposals = []
        for i, item in enumerate(payload):
            where = f"subtopic[{i}]"
            if not isinstance(item, dict):
                raise SchemaError(f"{where}: expected an object")
            proposals.append(
                SubtopicProposal(
                    title=require_str(item, "topic_title", where),
                    description=require_str(item, "topic_description", where),
                    relevant_claims_a=require_int_list(
                        item, "author_0_relevant_contributions", where
                    ),
                    relevant_claims_b=require_int_list(
                        item, "author_1_relevant_contributions", where
                    ),
                )
            )
        return proposals


class ExpansionVerdictSchema(ReplySchema):
    schema_id = "expansion_verdict"

    def validate(self, payload: Any) -> ExpansionVerdict:
        if not isinstance(payload, dict):
            raise SchemaError("expected an object with the verdict fields")
        explanation = require_str(payload, "explanation", "verdict")
        if not explanation.strip():
            raise SchemaError("verdict: explanation must be non-empty")
        return ExpansionVerdict(
            explanation=explanation,
            progression_of_arguments=require_bool(
                payload, "progression_of_arguments", "verdict"
            ),
            meaningful_questions=require_bool(payload, "meaningful_questions", "verdict"),
            clear_winner=require_bool(payload, "clear_winner", "verdict"),
        )


def format_moderator_contributions(
    side: Side, contributions: Sequence[ContributionView]
) -> str:
    """Contribution block for the subtopic prompt (no counter-evidence lines)."""
    lines = []
    for view in contributions:
        n = view.claim.claim_id
        evidence = " ".join(view.evidence_texts) if view.evidence_texts else "None provided."
        lines.append(
            f"{side.label} Paper's Contribution #{n}: {view.claim.title}: {view.claim.description}"
        )
        lines.append(f"{side.label} Paper's Contribution #{n} Evidence: {evidence}")
    return "\n".join(lines)


def generate_subtopics(
    topic: str,
    topic_description: str,
    paper_a: PaperRecord,
    paper_b: PaperRecord,
    contributions_a: Sequence[ContributionView],
    contributions_b: Sequence[ContributionView],
    k: int,
    gateway: Gateway,
    node_id: str | None = None,
) -> list[SubtopicProposal]:
    """Propose up to k subtopics mapped onto existing claims.

    Proposals citing unknown claim ids, or citing no claims at all, are
    dropped with a transcript note. An empty result means the node becomes
    a leaf.
    """
    if not contributions_a and not contributions_b:
        raise ValueError("at least one persona must hold a claim before subtopics")
    request = gateway.build_request(
        "mod_generate_topics",
        {
            "topic": topic,
            "topic_description": topic_description,
            "author_0_title": paper_a.title,
            "author_0_abstract": paper_a.abstract,
            "author_0_contributions": format_moderator_contributions(
                Side.AUTHOR_0, contributions_a
            ),
            "author_1_title": paper_b.title,
            "author_1_abstract": paper_b.abstract,
            "author_1_contributions": format_moderator_contributions(
                Side.AUTHOR_1, contributions_b
            ),
            "k": str(k),
        },
    )
    try:
        reply = gateway.complete_structured(
            request, SubtopicListSchema(max_items=k), node_id=node_id
        )
    except StructuredOutputError as exc:
        gateway.transcript.note(f"subtopic generation failed: {exc}", node_id=node_id)
        return []
    valid_a = {v.claim.claim_id for v in contributions_a}
    valid_b = {v.claim.claim_id for v in contributions_b}
    accepted = []
    for proposal in reply.parsed:
        unknown_a = set(proposal.relevant_claims_a) - valid_a
        unknown_b = set(proposal.relevant_claims_b) - valid_b
        if unknown_a or unknown_b:
            gateway.transcript.note(
                f"dropped subtopic {proposal.title!r}: cites unknown claim ids "
                f"(author_0: {sorted(unknown_a)}, author_1: {sorted(unknown_b)})",
                node_id=node_id,
            )
            continue
        if not proposal.relevant_claims_a and not proposal.relevant_claims_b:
            gateway.transcript.note(
                f"dropped subtopic {proposal.title!r}: cites no claims",
                node_id=node_id,
            )
            continue
        accepted.append(proposal)
    return accepted


def format_argument_sets(
    contributions_a: Sequence[ContributionView],
    contributions_b: Sequence[ContributionView],
) -> str:
    """The "previous arguments" block: the claims that entered the node."""
    lines = []
    for side, contributions in (
        (Side.AUTHOR_0, contributions_a),
        (Side.AUTHOR_1, contributions_b),
    ):
        lines.append(f"{side.label}'s arguments:")
        if contributions:
            lines.extend(
                f"- {v.claim.title}: {v.claim.description}" for v in contributions
            )
        else:
            lines.append("- (none)")
    return "\n".join(lines)


def format_revised_arguments(revised_a: str, revised_b: str) -> str:
    return f"Author 0: {revised_a}\nAuthor 1: {revised_b}"


def judge_expansion(
    topic: str,
    topic_description: str,
    turns: Sequence[DebateTurn],
    previous_arguments: str,
    current_arguments: str,
    gateway: Gateway,
    node_id: str | None = None,
) -> ExpansionVerdict:
    """Ask the moderator whether the debated node warrants growth.

    An unrecoverable structured-output failure yields the conservative stop
    verdict (no progression, no questions, clear winner), flagged degraded.
    """
    request = gateway.build_request(
        "mod_is_expand",
        {
            "topic": topic,
            "topic_description": topic_description,
            "conversation_history": format_history(turns),
            "previous_arguments": previous_arguments,
            "current_arguments": current_arguments,
        },
    )
    try:
        reply = gateway.complete_structured(
            request, ExpansionVerdictSchema(), node_id=node_id
        )
    except StructuredOutputError as exc:
        gateway.transcript.note(
            f"expansion judgment failed ({exc}); defaulting to stop verdict",
            node_id=node_id,
        )
        return ExpansionVerdict(
            explanation="Judgment unavailable: structured output failed; stopping this path.",
            progression_of_arguments=False,
            meaningful_questions=False,
            clear_winner=True,
            degraded=True,
        )
    return reply.parsed


def should_expand(verdict: ExpansionVerdict, depth: int, max_depth: int) -> bool:
    """Expansion gate: growth needs headroom below max depth plus either
    progression, open questions, or the absence of a clear winner."""
    if depth < 1:
        raise ValueError("only debated nodes (depth >= 1) are judged for expansion")
    return depth < max_depth and (
        verdict.progression_of_arguments
        or verdict.meaningful_questions
        or not verdict.clear_winner
    )


def format_tree_block(tree: "DebateTree") -> str:
    """Debated nodes in depth-first preorder, one block per node."""
    blocks = []
    for node in tree.preorder():
        if node.depth == 0 or not node.turns:
            continue
        blocks.append(
            f"({node.node_id}) Level {node.depth} Topic: \"{node.title}\" : \"{node.description}\"\n"
            f"Author 0's Argument: {node.revised_argument_a or ''}\n"
            f"Author 1's Argument: {node.revised_argument_b or ''}"
        )
    return "\n\n".join(blocks) if blocks else "(no debated nodes)"


def synthesize(tree: "DebateTree", gateway: Gateway) -> SynthesisResult:
    """Turn the finished tree into the comparative summary."""
    unfinished = [
        n.node_id for n in tree.nodes.values() if n.status.value not in ("expanded", "leaf")
    ]
    if unfinished:
        raise ValueError(f"tree not finished; pending nodes: {unfinished}")
    request = gateway.build_request(
        "mod_summarize",
        {
            "topic": tree.root_node.title,
            "author_0_title": tree.paper_a.title,
            "author_1_title": tree.paper_b.title,
            "tree": format_tree_block(tree),
        },
    )
    summary = gateway.complete(request, node_id=tree.root)
    return SynthesisResult(
        summary=summary,
        node_count=len(tree.nodes),
        max_depth_reached=max(n.depth for n in tree.nodes.values()),
    )
