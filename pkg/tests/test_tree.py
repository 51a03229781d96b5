"""Tree lifecycle, audit, and serialization."""

from __future__ import annotations

import random

import pytest

from treedebate.corpus import PaperRecord
from treedebate.moderator import ExpansionVerdict, SubtopicProposal
from treedebate.persona import DebateTurn, Side, Stage
from treedebate.tree import (
    AuditError,
    LifecycleEvent,
    NodeStatus,
    StateError,
    TreeFormatError,
    advance_status,
    attach_children,
    audit_tree,
    create_root,
    deserialize,
    record_turns,
    record_verdict,
    serialize,
)

import helpers

PAPER_A = PaperRecord(paper_id="pa", title="A", abstract="a.", introduction="")
PAPER_B = PaperRecord(paper_id="pb", title="B", abstract="b.", introduction="")


def _tree(max_depth: int = 3, k: int = 3):
    return create_root(
        "inference-time LLM reasoning methods",
        "",
        PAPER_A,
        PAPER_B,
        {"max_depth": max_depth, "k": k},
    )


def _proposals(n: int) -> list[SubtopicProposal]:
    return [SubtopicProposal(f"sub {i}", f"desc {i}", [0], []) for i in range(n)]


def _turns() -> list[DebateTurn]:
    return [
        DebateTurn(Side.AUTHOR_0, Stage.PRESENT, "a1"),
        DebateTurn(Side.AUTHOR_1, Stage.PRESENT, "b1"),
        DebateTurn(Side.AUTHOR_0, Stage.RESPOND, "a2"),
        DebateTurn(Side.AUTHOR_1, Stage.RESPOND, "b2"),
        DebateTurn(Side.AUTHOR_0, Stage.REVISE, "a3"),
        DebateTurn(Side.AUTHOR_1, Stage.REVISE, "b3"),
    ]


def test_create_root_single_node():
    tree = _tree()
    assert tree.root == "0"
    assert tree.root_node.depth == 0
    assert tree.root_node.status is NodeStatus.CREATED
    assert len(tree.nodes) == 1


def test_create_root_rejects_empty_title():
    with pytest.raises(ValueError):
        create_root("  ", "", PAPER_A, PAPER_B, {})


def test_config_snapshot_carries_max_depth():
    tree = _tree(max_depth=3)
    assert tree.config_snapshot["max_depth"] == 3


def test_attach_three_children_at_root():
    tree = _tree()
    advance_status(tree, "0", LifecycleEvent.DELIBERATION_COMPLETE)
    ids = attach_children(tree, "0", _proposals(3))
    assert ids == ["0.1", "0.2", "0.3"]
    assert all(tree.node(i).depth == 1 for i in ids)
    assert tree.root_node.status is NodeStatus.EXPANDED
    assert tree.node("0.1").title == "sub 0"


def test_attach_at_max_depth_is_a_state_error():
    tree = _tree(max_depth=1)
    advance_status(tree, "0", LifecycleEvent.DELIBERATION_COMPLETE)
    attach_children(tree, "0", _proposals(1))
    record_turns(tree, "0.1", _turns())
    record_verdict(tree, "0.1", ExpansionVerdict("e", True, True, False))
    advance_status(tree, "0.1", LifecycleEvent.DELIBERATION_COMPLETE)
    with pytest.raises(StateError, match="max depth"):
        attach_children(tree, "0.1", _proposals(1))


def test_attach_empty_proposals_closes_the_parent():
    tree = _tree()
    advance_status(tree, "0", LifecycleEvent.DELIBERATION_COMPLETE)
    assert attach_children(tree, "0", []) == []
    assert tree.root_node.status is NodeStatus.LEAF


def test_double_attach_rejected():
    tree = _tree()
    advance_status(tree, "0", LifecycleEvent.DELIBERATION_COMPLETE)
    attach_children(tree, "0", _proposals(1))
    tree.root_node.status = NodeStatus.DELIBERATED  # force a second attempt
    with pytest.raises(StateError, match="already attached"):
        attach_children(tree, "0", _proposals(1))


def test_legal_transition_chain():
    tree = _tree()
    advance_status(tree, "0", LifecycleEvent.DELIBERATION_COMPLETE)
    attach_children(tree, "0", _proposals(1))
    record_turns(tree, "0.1", _turns())
    assert tree.node("0.1").status is NodeStatus.DEBATED
    record_verdict(tree, "0.1", ExpansionVerdict("e", False, False, True))
    assert tree.node("0.1").status is NodeStatus.JUDGED
    advance_status(tree, "0.1", LifecycleEvent.STOP)
    assert tree.node("0.1").status is NodeStatus.LEAF


def test_illegal_transition_names_status_and_event():
    tree = _tree()
    with pytest.raises(StateError, match="verdict_recorded.*created"):
        advance_status(tree, "0", LifecycleEvent.VERDICT_RECORDED)


def test_record_turns_rejects_wrong_order():
    tree = _tree()
    advance_status(tree, "0", LifecycleEvent.DELIBERATION_COMPLETE)
    attach_children(tree, "0", _proposals(1))
    turns = _turns()
    turns[0], turns[1] = turns[1], turns[0]
    with pytest.raises(StateError, match="canonical"):
        record_turns(tree, "0.1", turns)


def test_root_never_debated():
    tree = _tree()
    with pytest.raises(StateError, match="root"):
        record_turns(tree, "0", _turns())


def test_serialize_round_trip_identity():
    tree = helpers.build_five_node_tree()
    document = serialize(tree)
    restored = deserialize(document)
    assert restored.root == tree.root
    assert set(restored.nodes) == set(tree.nodes)
    for node_id, node in tree.nodes.items():
        other = restored.nodes[node_id]
        assert other == node
    assert restored.paper_a == tree.paper_a
    assert restored.config_snapshot == tree.config_snapshot
    # Canonical: serializing the restored tree reproduces the document.
    assert serialize(restored) == document


def test_serialization_is_canonical_across_calls():
    tree = helpers.build_five_node_tree()
    assert serialize(tree) == serialize(tree)


def test_cycle_detected_on_deserialize():
    tree = helpers.build_five_node_tree()
    document = serialize(tree)
    broken = document.replace('"children": []', '"children": ["0"]', 1)
    with pytest.raises(TreeFormatError, match="cycle|parent"):
        deserialize(broken)


def test_version_mismatch_is_an_explicit_error():
    document = serialize(helpers.build_five_node_tree())
    bumped = document.replace('"version": 1', '"version": 99', 1)
    with pytest.raises(TreeFormatError, match="unsupported version"):
        deserialize(bumped)


def test_format_mismatch_rejected():
    with pytest.raises(TreeFormatError, match="format"):
        deserialize('{"format": "something-else", "version": 1}')


def test_parse_error_carries_path():
    document = serialize(helpers.build_five_node_tree())
    broken = document.replace('"status": "leaf"', '"status": "bogus"', 1)
    with pytest.raises(TreeFormatError, match=r"nodes\[\d+\]"):
        deserialize(broken)


def test_audit_passes_on_fixture_tree():
    audit_tree(helpers.build_five_node_tree(), k=3, max_depth=3)


def test_audit_flags_depth_overflow():
    tree = helpers.build_five_node_tree()
    with pytest.raises(AuditError, match="depth"):
        audit_tree(tree, k=3, max_depth=1)


def test_audit_flags_child_overflow():
    tree = helpers.build_five_node_tree()
    with pytest.raises(AuditError, match="children"):
        audit_tree(tree, k=1, max_depth=3)


def test_audit_flags_unfinished_leaf():
    tree = helpers.build_five_node_tree()
    tree.node("0.2").status = NodeStatus.JUDGED
    with pytest.raises(AuditError, match="leaf"):
        audit_tree(tree, k=3, max_depth=3)


# --- lifecycle fuzzing --------------------------------------------------------


def build_random_tree(rng: random.Random, k: int, max_depth: int):
    """Drive the tree through a random legal event sequence."""
    tree = _tree(max_depth=max_depth, k=k)
    advance_status(tree, "0", LifecycleEvent.DELIBERATION_COMPLETE)
    frontier = attach_children(tree, "0", _proposals(rng.randint(0, k)))
    while frontier:
        node_id = frontier.pop()
        node = tree.node(node_id)
        record_turns(tree, node_id, _turns())
        if rng.random() < 0.1:
            # Some variants close a debated node without judging it.
            advance_status(tree, node_id, LifecycleEvent.STOP)
            continue
        expand_vote = rng.random() < 0.6
        record_verdict(
            tree,
            node_id,
            ExpansionVerdict("fuzz", expand_vote, False, not expand_vote),
        )
        if expand_vote and node.depth < max_depth:
            advance_status(tree, node_id, LifecycleEvent.DELIBERATION_COMPLETE)
            frontier.extend(attach_children(tree, node_id, _proposals(rng.randint(0, k))))
        else:
            advance_status(tree, node_id, LifecycleEvent.STOP)
    return tree


def test_fuzzed_lifecycles_always_pass_audit():
    rng = random.Random(20240810)
    for _ in range(100):
        k = rng.randint(1, 3)
        max_depth = rng.randint(1, 3)
        tree = build_random_tree(rng, k, max_depth)
        audit_tree(tree, k=k, max_depth=max_depth)
        assert len(tree.nodes) <= sum(k**d for d in range(max_depth + 1))
