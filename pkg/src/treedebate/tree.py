"""The debate tree: node lifecycle state machine, audit, and serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator, Sequence

from .corpus import PaperRecord, Segment
from .moderator import ExpansionVerdict, SubtopicProposal
from .persona import Claim, DebateTurn, EvidencePool, Side, Stage

FORMAT_VERSION = 1
FORMAT_KIND = "treedebate.tree"


class StateError(RuntimeError):
    """An operation was attempted from an illegal node status."""


class TreeFormatError(ValueError):
    """A serialized document violates the tree schema."""


class AuditError(AssertionError):
    """A finished tree violates a structural invariant."""


class NodeStatus(str, Enum):
    CREATED = "created"
    DELIBERATED = "deliberated"
    DEBATED = "debated"
    JUDGED = "judged"
    EXPANDED = "expanded"
    LEAF = "leaf"


class LifecycleEvent(str, Enum):
    DELIBERATION_COMPLETE = "deliberation_complete"
    DEBATE_COMPLETE = "debate_complete"
    VERDICT_RECORDED = "verdict_recorded"
    STOP = "stop"


# (status, event) -> next status. Expansion itself happens via attach_children.
_TRANSITIONS: dict[tuple[NodeStatus, LifecycleEvent], NodeStatus] = {
    (NodeStatus.CREATED, LifecycleEvent.DELIBERATION_COMPLETE): NodeStatus.DELIBERATED,
    (NodeStatus.CREATED, LifecycleEvent.DEBATE_COMPLETE): NodeStatus.DEBATED,
    (NodeStatus.DEBATED, LifecycleEvent.VERDICT_RECORDED): NodeStatus.JUDGED,
    (NodeStatus.JUDGED, LifecycleEvent.DELIBERATION_COMPLETE): NodeStatus.DELIBERATED,
    (NodeStatus.JUDGED, LifecycleEvent.STOP): NodeStatus.LEAF,
    (NodeStatus.DELIBERATED, LifecycleEvent.STOP): NodeStatus.LEAF,
    # Variants that debate without judging close the node directly.
    (NodeStatus.DEBATED, LifecycleEvent.STOP): NodeStatus.LEAF,
}

CANONICAL_TURN_ORDER = (
    (Side.AUTHOR_0, Stage.PRESENT),
    (Side.AUTHOR_1, Stage.PRESENT),
    (Side.AUTHOR_0, Stage.RESPOND),
    (Side.AUTHOR_1, Stage.RESPOND),
    (Side.AUTHOR_0, Stage.REVISE),
    (Side.AUTHOR_1, Stage.REVISE),
)


@dataclass
class TopicNode:
    node_id: str
    title: str
    description: str
    depth: int
    parent: str | None = None
    children: list[str] = field(default_factory=list)
    # Claim ids from the parent's deliberation this node's debate draws on.
    relevant_claims_a: list[int] = field(default_factory=list)
    relevant_claims_b: list[int] = field(default_factory=list)
    # Deliberation output produced at this node (root always; other nodes
    # only when they expand).
    claims_a: list[Claim] = field(default_factory=list)
    claims_b: list[Claim] = field(default_factory=list)
    evidence_a: EvidencePool = field(default_factory=EvidencePool)
    evidence_b: EvidencePool = field(default_factory=EvidencePool)
    turns: list[DebateTurn] = field(default_factory=list)
    revised_argument_a: str | None = None
    revised_argument_b: str | None = None
    verdict: ExpansionVerdict | None = None
    status: NodeStatus = NodeStatus.CREATED


@dataclass
class DebateTree:
    root: str
    nodes: dict[str, TopicNode]
    paper_a: PaperRecord
    paper_b: PaperRecord
    config_snapshot: dict[str, Any] = field(default_factory=dict)

    @property
    def root_node(self) -> TopicNode:
        return self.nodes[self.root]

    def node(self, node_id: str) -> TopicNode:
        if node_id not in self.nodes:
            raise KeyError(f"no node {node_id!r} in tree")
        return self.nodes[node_id]

    def preorder(self) -> Iterator[TopicNode]:
        stack = [self.root]
        while stack:
            node = self.nodes[stack.pop()]
            yield node
            stack.extend(reversed(node.children))


def create_root(
    topic_title: str,
    topic_description: str,
    paper_a: PaperRecord,
    paper_b: PaperRecord,
    config_snapshot: dict[str, Any],
) -> DebateTree:
    if not topic_title.strip():
        raise ValueError("topic title must be non-empty")
    root = TopicNode(
        node_id="0",
        title=topic_title,
        description=topic_description,
        depth=0,
        parent=None,
    )
    return DebateTree(
        root="0",
        nodes={"0": root},
        paper_a=paper_a,
        paper_b=paper_b,
        config_snapshot=dict(config_snapshot),
    )


def advance_status(tree: DebateTree, node_id: str, event: LifecycleEvent) -> TopicNode:
    node = tree.node(node_id)
    key = (node.status, event)
    if key not in _TRANSITIONS:
        raise StateError(
            f"node {node_id}: event {event.value!r} illegal from status {node.status.value!r}"
        )
    node.status = _TRANSITIONS[key]
    return node


def attach_children(
    tree: DebateTree,
    parent_id: str,
    proposals: Sequence[SubtopicProposal],
) -> list[str]:
    """Create one child per proposal, in order; the parent becomes expanded.

    An empty proposal list instead closes the parent as a leaf.
    """
    parent = tree.node(parent_id)
    if parent.status not in (NodeStatus.DELIBERATED, NodeStatus.JUDGED):
        raise StateError(
            f"node {parent_id}: cannot attach children from status {parent.status.value!r}"
        )
    if parent.children:
        raise StateError(f"node {parent_id}: children already attached")
    if not proposals:
        parent.status = NodeStatus.LEAF
        return []
    max_depth = int(tree.config_snapshot.get("max_depth", 0) or 0)
    if max_depth and parent.depth + 1 > max_depth:
        raise StateError(
            f"node {parent_id}: children would exceed max depth {max_depth}"
        )
    child_ids = []
    for i, proposal in enumerate(proposals, start=1):
        child_id = f"{parent_id}.{i}"
        if child_id in tree.nodes:
            raise StateError(f"node {child_id} already exists")
        tree.nodes[child_id] = TopicNode(
            node_id=child_id,
            title=proposal.title,
            description=proposal.description,
            depth=parent.depth + 1,
            parent=parent_id,
            relevant_claims_a=list(proposal.relevant_claims_a),
            relevant_claims_b=list(proposal.relevant_claims_b),
        )
        child_ids.append(child_id)
    parent.children.extend(child_ids)
    parent.status = NodeStatus.EXPANDED
    return child_ids


def record_turns(tree: DebateTree, node_id: str, turns: Sequence[DebateTurn]) -> None:
    """Store a completed six-turn debate and the revised arguments."""
    node = tree.node(node_id)
    if node.depth == 0:
        raise StateError("the root topic is never debated")
    observed = [(t.speaker, t.stage) for t in turns]
    if observed != list(CANONICAL_TURN_ORDER):
        raise StateError(f"node {node_id}: turns out of canonical order: {observed}")
    node.turns = list(turns)
    node.revised_argument_a = turns[4].text
    node.revised_argument_b = turns[5].text
    advance_status(tree, node_id, LifecycleEvent.DEBATE_COMPLETE)


def record_verdict(tree: DebateTree, node_id: str, verdict: ExpansionVerdict) -> None:
    node = tree.node(node_id)
    node.verdict = verdict
    advance_status(tree, node_id, LifecycleEvent.VERDICT_RECORDED)


def audit_tree(tree: DebateTree, k: int, max_depth: int, finished: bool = True) -> None:
    """Verify every structural invariant; raises AuditError on violation."""
    problems: list[str] = []
    root = tree.nodes.get(tree.root)
    if root is None:
        raise AuditError(f"root {tree.root!r} missing from node map")
    if root.depth != 0 or root.parent is not None:
        problems.append("root must have depth 0 and no parent")
    if root.turns:
        problems.append("root must not hold debate turns")

    seen: set[str] = set()
    stack = [tree.root]
    while stack:
        node_id = stack.pop()
        if node_id in seen:
            problems.append(f"{node_id}: reached twice (cycle or shared child)")
            continue
        seen.add(node_id)
        node = tree.nodes.get(node_id)
        if node is None:
            problems.append(f"{node_id}: referenced but missing")
            continue
        if node.depth > max_depth:
            problems.append(f"{node_id}: depth {node.depth} exceeds max {max_depth}")
        if len(node.children) > k:
            problems.append(f"{node_id}: {len(node.children)} children exceed k={k}")
        if node.children and node.status is not NodeStatus.EXPANDED:
            problems.append(
                f"{node_id}: has children but status is {node.status.value!r}"
            )
        for child_id in node.children:
            child = tree.nodes.get(child_id)
            if child is None:
                problems.append(f"{node_id}: missing child {child_id}")
                continue
            if child.parent != node_id:
                problems.append(f"{child_id}: parent link mismatch")
            if child.depth != node.depth + 1:
                problems.append(f"{child_id}: depth must be parent depth + 1")
            stack.append(child_id)
        if node.turns:
            observed = [(t.speaker, t.stage) for t in node.turns]
            if observed != list(CANONICAL_TURN_ORDER):
                problems.append(f"{node_id}: turns out of canonical order")
        if node.status is NodeStatus.DEBATED and len(node.turns) != 6:
            problems.append(f"{node_id}: status debated requires exactly 6 turns")
        if (
            node.depth >= 1
            and node.status in (NodeStatus.JUDGED, NodeStatus.EXPANDED, NodeStatus.LEAF)
            and (node.revised_argument_a is None or node.revised_argument_b is None)
        ):
            problems.append(f"{node_id}: missing revised arguments for {node.status.value}")
        if finished:
            if not node.children and node.status is not NodeStatus.LEAF:
                problems.append(
                    f"{node_id}: childless node must be a leaf, is {node.status.value!r}"
                )
            if node.children and node_id != tree.root and node.status is not NodeStatus.EXPANDED:
                problems.append(f"{node_id}: internal node must be expanded")

    unreachable = set(tree.nodes) - seen
    if unreachable:
        problems.append(f"unreachable nodes: {sorted(unreachable)}")
    if problems:
        raise AuditError("; ".join(problems))


# --- serialization ----------------------------------------------------------


def _segment_doc(segment: Segment) -> dict[str, Any]:
    return {
        "segment_id": segment.segment_id,
        "paper_id": segment.paper_id,
        "text": segment.text,
        "sentence_count": segment.sentence_count,
    }


def _claim_doc(claim: Claim) -> dict[str, Any]:
    return {
        "claim_id": claim.claim_id,
        "title": claim.title,
        "description": claim.description,
        "evidence_ids": list(claim.evidence_ids),
    }


def _pool_doc(pool: EvidencePool) -> dict[str, Any]:
    return {
        "supporting": [_segment_doc(s) for s in pool.supporting],
        "counter": {
            str(cid): [_segment_doc(s) for s in segments]
            for cid, segments in sorted(pool.counter.items())
        },
        "unaddressed": sorted(pool.unaddressed),
    }


def _paper_doc(paper: PaperRecord) -> dict[str, Any]:
    return {
        "paper_id": paper.paper_id,
        "title": paper.title,
        "abstract": paper.abstract,
        "introduction": paper.introduction,
        "body": paper.body,
        "source_link": paper.source_link,
    }


def _node_doc(node: TopicNode) -> dict[str, Any]:
    return {
        "node_id": node.node_id,
        "title": node.title,
        "description": node.description,
        "depth": node.depth,
        "parent": node.parent,
        "children": list(node.children),
        "status": node.status.value,
        "relevant_claims_a": list(node.relevant_claims_a),
        "relevant_claims_b": list(node.relevant_claims_b),
        "claims_a": [_claim_doc(c) for c in node.claims_a],
        "claims_b": [_claim_doc(c) for c in node.claims_b],
        "evidence_a": _pool_doc(node.evidence_a),
        "evidence_b": _pool_doc(node.evidence_b),
        "turns": [
            {"speaker": t.speaker.value, "stage": t.stage.value, "text": t.text}
            for t in node.turns
        ],
        "revised_argument_a": node.revised_argument_a,
        "revised_argument_b": node.revised_argument_b,
        "verdict": None
        if node.verdict is None
        else {
            "explanation": node.verdict.explanation,
            "progression_of_arguments": node.verdict.progression_of_arguments,
            "meaningful_questions": node.verdict.meaningful_questions,
            "clear_winner": node.verdict.clear_winner,
            "degraded": node.verdict.degraded,
        },
    }


def serialize(tree: DebateTree) -> str:
    """Canonical JSON document: fixed key order, nodes in preorder."""
    doc = {
        "format": FORMAT_KIND,
        "version": FORMAT_VERSION,
        "root": tree.root,
        "paper_a": _paper_doc(tree.paper_a),
        "paper_b": _paper_doc(tree.paper_b),
        "config": tree.config_snapshot,
        "nodes": [_node_doc(node) for node in tree.preorder()],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _parse_segment(doc: Any, path: str) -> Segment:
    if not isinstance(doc, dict):
        raise TreeFormatError(f"{path}: expected an object")
    try:
        return Segment(
            segment_id=int(doc["segment_id"]),
            paper_id=str(doc["paper_id"]),
            text=str(doc["text"]),
            sentence_count=int(doc["sentence_count"]),
        )
    except KeyError as exc:
        raise TreeFormatError(f"{path}: missing field {exc}") from exc


def _parse_pool(doc: Any, path: str) -> EvidencePool:
    if not isinstance(doc, dict):
        raise TreeFormatError(f"{path}: expected an object")
    counter = {}
    for cid, segments in doc.get("counter", {}).items():
        counter[int(cid)] = [
            _parse_segment(s, f"{path}.counter[{cid}][{i}]")
            for i, s in enumerate(segments)
        ]
    return EvidencePool(
        supporting=[
            _parse_segment(s, f"{path}.supporting[{i}]")
            for i, s in enumerate(doc.get("supporting", []))
        ],
        counter=counter,
        unaddressed=set(doc.get("unaddressed", [])),
    )


def _parse_node(doc: Any, path: str) -> TopicNode:
    if not isinstance(doc, dict):
        raise TreeFormatError(f"{path}: expected an object")
    try:
        status = NodeStatus(doc["status"])
    except (KeyError, ValueError) as exc:
        raise TreeFormatError(f"{path}.status: {exc}") from exc
    turns = []
    for i, turn in enumerate(doc.get("turns", [])):
        try:
            turns.append(
                DebateTurn(
                    speaker=Side(turn["speaker"]),
                    stage=Stage(turn["stage"]),
                    text=str(turn["text"]),
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise TreeFormatError(f"{path}.turns[{i}]: {exc}") from exc
    verdict_doc = doc.get("verdict")
    verdict = None
    if verdict_doc is not None:
        try:
            verdict = ExpansionVerdict(
                explanation=str(verdict_doc["explanation"]),
                progression_of_arguments=bool(verdict_doc["progression_of_arguments"]),
                meaningful_questions=bool(verdict_doc["meaningful_questions"]),
                clear_winner=bool(verdict_doc["clear_winner"]),
                degraded=bool(verdict_doc.get("degraded", False)),
            )
        except KeyError as exc:
            raise TreeFormatError(f"{path}.verdict: missing field {exc}") from exc
    try:
        return TopicNode(
            node_id=str(doc["node_id"]),
            title=str(doc["title"]),
            description=str(doc["description"]),
            depth=int(doc["depth"]),
            parent=doc["parent"],
            children=[str(c) for c in doc["children"]],
            relevant_claims_a=[int(c) for c in doc.get("relevant_claims_a", [])],
            relevant_claims_b=[int(c) for c in doc.get("relevant_claims_b", [])],
            claims_a=[
                Claim(int(c["claim_id"]), str(c["title"]), str(c["description"]),
                      [int(e) for e in c["evidence_ids"]])
                for c in doc.get("claims_a", [])
            ],
            claims_b=[
                Claim(int(c["claim_id"]), str(c["title"]), str(c["description"]),
                      [int(e) for e in c["evidence_ids"]])
                for c in doc.get("claims_b", [])
            ],
            evidence_a=_parse_pool(doc.get("evidence_a", {}), f"{path}.evidence_a"),
            evidence_b=_parse_pool(doc.get("evidence_b", {}), f"{path}.evidence_b"),
            turns=turns,
            revised_argument_a=doc.get("revised_argument_a"),
            revised_argument_b=doc.get("revised_argument_b"),
            verdict=verdict,
            status=status,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise TreeFormatError(f"{path}: {exc}") from exc


def deserialize(document: str) -> DebateTree:
    """Parse and structurally validate a serialized tree document."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise TreeFormatError(f"document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise TreeFormatError("document root must be an object")
    if doc.get("format") != FORMAT_KIND:
        raise TreeFormatError(f"format: expected {FORMAT_KIND!r}, got {doc.get('format')!r}")
    if doc.get("version") != FORMAT_VERSION:
        raise TreeFormatError(
            f"version: unsupported version {doc.get('version')!r} "
            f"(supported: {FORMAT_VERSION})"
        )
    for key in ("root", "paper_a", "paper_b", "nodes"):
        if key not in doc:
            raise TreeFormatError(f"missing field {key!r}")

    def parse_paper(pdoc: Any, path: str) -> PaperRecord:
        if not isinstance(pdoc, dict):
            raise TreeFormatError(f"{path}: expected an object")
        try:
            return PaperRecord(
                paper_id=str(pdoc["paper_id"]),
                title=str(pdoc["title"]),
                abstract=str(pdoc["abstract"]),
                introduction=str(pdoc["introduction"]),
                body=pdoc.get("body"),
                source_link=pdoc.get("source_link"),
            )
        except (KeyError, ValueError) as exc:
            raise TreeFormatError(f"{path}: {exc}") from exc

    nodes: dict[str, TopicNode] = {}
    for i, node_doc in enumerate(doc["nodes"]):
        node = _parse_node(node_doc, f"nodes[{i}]")
        if node.node_id in nodes:
            raise TreeFormatError(f"nodes[{i}]: duplicate node id {node.node_id!r}")
        nodes[node.node_id] = node

    tree = DebateTree(
        root=str(doc["root"]),
        nodes=nodes,
        paper_a=parse_paper(doc["paper_a"], "paper_a"),
        paper_b=parse_paper(doc["paper_b"], "paper_b"),
        config_snapshot=doc.get("config", {}),
    )
    _validate_structure(tree)
    return tree


def _validate_structure(tree: DebateTree) -> None:
    if tree.root not in tree.nodes:
        raise TreeFormatError(f"root: node {tree.root!r} not present")
    seen: set[str] = set()
    stack = [tree.root]
    while stack:
        node_id = stack.pop()
        if node_id in seen:
            raise TreeFormatError(f"nodes.{node_id}: cycle detected")
        seen.add(node_id)
        node = tree.nodes[node_id]
        for child_id in node.children:
            if child_id not in tree.nodes:
                raise TreeFormatError(f"nodes.{node_id}: unknown child {child_id!r}")
            child = tree.nodes[child_id]
            if child.parent != node_id:
                raise TreeFormatError(
                    f"nodes.{child_id}: parent says {child.parent!r}, "
                    f"but is a child of {node_id!r}"
                )
            if child.depth != node.depth + 1:
                raise TreeFormatError(f"nodes.{child_id}: depth inconsistent with parent")
            stack.append(child_id)
    orphans = set(tree.nodes) - seen
    if orphans:
        raise TreeFormatError(f"nodes: unreachable from root: {sorted(orphans)}")
