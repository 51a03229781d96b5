"""Shared fixture builders: the sample paper pair, scripted replies, mock
scripts, and golden prompt bindings.

Run ``python3 tests/helpers.py`` to (re)write the committed fixture files
under tests/fixtures/.
"""

from __future__ import annotations

import json
from pathlib import Path

import yaml

FIXTURES = Path(__file__).parent / "fixtures"

PAPER_A_TITLE = "DriftGuard: Streaming Anomaly Detection with Adaptive Thresholds"
PAPER_A_ABSTRACT = (
    "DriftGuard monitors high-volume event streams in real time. "
    "It adapts detection thresholds continuously as input distributions shift. "
    "Operators receive ranked alerts with full provenance for every detection."
)
PAPER_A_INTRO = (
    "Modern services emit millions of events per hour. "
    "Static detection rules decay quickly when workloads change. "
    "DriftGuard estimates the drift rate of each feature online. "
    "The estimator feeds an adaptive threshold controller with bounded false-alarm rates. "
    "A lightweight sketch structure keeps memory constant regardless of stream volume. "
    "Alerts are ranked by expected operator utility rather than raw score. "
    "The ranking model is trained from historical triage decisions. "
    "We evaluate on three production workloads and two public benchmarks. "
    "DriftGuard halves the median time to detection while keeping alert volume flat."
)

PAPER_B_TITLE = "SpectraWatch: Frequency-Domain Monitoring for Sensor Streams"
PAPER_B_ABSTRACT = (
    "SpectraWatch analyzes sensor streams in the frequency domain. "
    "Sliding spectral transforms expose periodic faults that time-domain rules miss. "
    "The system runs on edge hardware with a fixed memory budget."
)
PAPER_B_INTRO = (
    "Industrial sensors produce dense periodic signals. "
    "Faults often appear as faint harmonics long before threshold breaches. "
    "SpectraWatch maintains a rolling spectrogram per channel. "
    "A change detector compares successive spectral bands with a calibrated distance. "
    "Band-level scores are fused into a single channel health index. "
    "The fusion weights are learned from labeled maintenance logs. "
    "An embedded implementation meets strict latency targets on edge devices. "
    "We deploy on a turbine farm and a water distribution network. "
    "SpectraWatch raises faults days earlier than amplitude-based baselines."
)

TOPIC = "streaming anomaly detection"


# --- scripted reply builders -------------------------------------------------


def claims_reply_a() -> str:
    return json.dumps(
        [
            {
                "argument_title": "Adaptive thresholds track distribution drift",
                "description": (
                    "DriftGuard adjusts detection thresholds online as distributions "
                    "shift, keeping false alarms bounded."
                ),
                "evidence": [0, 1],
            },
            {
                "argument_title": "Utility-ranked alerts cut triage load",
                "description": (
                    "Alerts are ordered by expected operator utility learned from "
                    "historical triage decisions."
                ),
                "evidence": [2],
            },
        ]
    )


def claims_reply_b() -> str:
    return json.dumps(
        [
            {
                "argument_title": "Frequency-domain detection exposes faint periodic faults",
                "description": (
                    "Sliding spectral transforms reveal harmonics that time-domain "
                    "rules miss."
                ),
                "evidence": [0],
            },
            {
                "argument_title": "Edge deployment under a fixed memory budget",
                "description": (
                    "An embedded implementation meets latency targets on edge "
                    "hardware with constant memory."
                ),
                "evidence": [1, 2],
            },
        ]
    )


def relevance_keep(kind: str = "supports") -> str:
    verdict = {
        "supports_claim": "No",
        "refutes_claim": "No",
        "clarifies_claim": "No",
        "irrelevant_to_claim": "No",
    }
    verdict[f"{kind}_claim"] = "Yes"
    return json.dumps(verdict)


def relevance_drop() -> str:
    return json.dumps(
        {
            "supports_claim": "No",
            "refutes_claim": "No",
            "clarifies_claim": "No",
            "irrelevant_to_claim": "Yes",
        }
    )


def subtopics_reply() -> str:
    return json.dumps(
        [
            {
                "topic_title": "Adaptivity of detection under changing stream conditions",
                "topic_description": (
                    "Debate how each system adapts its detection behavior as stream "
                    "conditions change over time."
                ),
                "author_0_relevant_contributions": [0],
                "author_1_relevant_contributions": [0, 1],
            },
            {
                "topic_title": "Operational cost of triage and deployment",
                "topic_description": (
                    "Debate which system lowers operator and deployment cost in "
                    "production settings."
                ),
                "author_0_relevant_contributions": [1],
                "author_1_relevant_contributions": [],
            },
        ]
    )


def verdict_reply(progression: bool, questions: bool, winner: bool, note: str = "") -> str:
    explanation = note or (
        "The revised arguments restate the opening positions without new depth. "
        "No open questions remain. One side clearly holds the stronger contribution here."
    )
    return json.dumps(
        {
            "explanation": explanation,
            "progression_of_arguments": str(progression),
            "meaningful_questions": str(questions),
            "clear_winner": str(winner),
        }
    )


STOP_VERDICT = verdict_reply(False, False, True)
EXPAND_VERDICT = verdict_reply(
    True,
    True,
    False,
    note=(
        "Both sides introduced new mechanisms and left calibration questions open, "
        "so the path deserves another round. Neither argument dominates yet."
    ),
)

SUMMARY_REPLY = (
    "Both papers deliver low-latency anomaly detection for continuous streams and "
    "both keep resource usage bounded while adapting to changing conditions. They "
    "diverge sharply in mechanism: DriftGuard tracks distribution drift in the time "
    "domain and retunes adaptive thresholds with bounded false alarms, while "
    "SpectraWatch moves detection into the frequency domain, where faint periodic "
    "faults surface long before amplitude rules fire. DriftGuard uniquely ranks "
    "alerts by learned operator utility, cutting triage load, whereas SpectraWatch "
    "uniquely targets edge deployment under a fixed memory budget. The clearest "
    "difference is their failure assumptions: DriftGuard presumes no periodic "
    "structure, SpectraWatch exploits it."
)


def debate_turn_entries(node_tag: str) -> list[dict]:
    """Six scripted turns in canonical order for one child node."""
    return [
        {
            "template": "persona_present",
            "reply": f"[{node_tag}] DriftGuard adapts thresholds online, so detection "
            "quality holds as streams drift.",
        },
        {
            "template": "persona_present",
            "reply": f"[{node_tag}] SpectraWatch tracks spectral change, catching faint "
            "periodic faults that threshold rules miss.",
        },
        {
            "template": "persona_respond",
            "reply": f"[{node_tag}] Does spectral monitoring hold up when faults are "
            "aperiodic? DriftGuard needs no periodicity assumption.",
        },
        {
            "template": "persona_respond",
            "reply": f"[{node_tag}] Aperiodic bursts still shift band energy and "
            "calibration absorbs them. How does DriftGuard bound false alarms "
            "during abrupt drift?",
        },
        {
            "template": "persona_revise",
            "reply": f"[{node_tag}] DriftGuard offers drift-robust detection with "
            "bounded false alarms and no periodicity assumption.",
        },
        {
            "template": "persona_revise",
            "reply": f"[{node_tag}] SpectraWatch provides earlier warnings on periodic "
            "faults and degrades gracefully on aperiodic bursts.",
        },
    ]


def deliberation_entries(candidates_per_claim: int) -> list[dict]:
    """Root deliberation: two claim calls, the preemption relevance burst,
    then subtopic generation. `candidates_per_claim` is the retrieved pool
    size each opposing claim is classified against."""
    n = candidates_per_claim
    entries: list[dict] = [
        {"template": "persona_generate_arguments", "reply": claims_reply_a()},
        {"template": "persona_generate_arguments", "reply": claims_reply_b()},
    ]
    # Author 0 preempts Author 1's claim 0: keep/drop alternating.
    for i in range(n):
        entries.append(
            {
                "template": "persona_relevance",
                "reply": relevance_keep("refutes") if i % 2 == 0 else relevance_drop(),
            }
        )
    # Author 0 preempts Author 1's claim 1: nothing survives (unaddressed).
    entries.extend({"template": "persona_relevance", "reply": relevance_drop()} for _ in range(n))
    # Author 1 preempts Author 0's claim 0: everything survives.
    entries.extend(
        {"template": "persona_relevance", "reply": relevance_keep("supports")} for _ in range(n)
    )
    # Author 1 preempts Author 0's claim 1: only the first candidate survives.
    entries.append({"template": "persona_relevance", "reply": relevance_keep("clarifies")})
    entries.extend({"template": "persona_relevance", "reply": relevance_drop()} for _ in range(n - 1))
    entries.append({"template": "mod_generate_topics", "reply": subtopics_reply()})
    return entries


def build_script_tod() -> list[dict]:
    entries = deliberation_entries(candidates_per_claim=4)
    for node_tag in ("0.1", "0.2"):
        entries.extend(debate_turn_entries(node_tag))
        entries.append({"template": "mod_is_expand", "reply": STOP_VERDICT})
    entries.append({"template": "mod_summarize", "reply": SUMMARY_REPLY})
    return entries


def build_script_no_tree() -> list[dict]:
    entries = deliberation_entries(candidates_per_claim=4)
    entries.extend(debate_turn_entries("0.1"))
    entries.append({"template": "mod_summarize", "reply": SUMMARY_REPLY})
    return entries


def build_script_no_sd() -> list[dict]:
    entries = deliberation_entries(candidates_per_claim=3)
    for node_tag in ("0.1", "0.2"):
        entries.extend(debate_turn_entries(node_tag))
        entries.append({"template": "mod_is_expand", "reply": STOP_VERDICT})
    entries.append({"template": "mod_summarize", "reply": SUMMARY_REPLY})
    return entries


def build_script_single_stage() -> list[dict]:
    return [{"template": "single_stage", "reply": SUMMARY_REPLY}]


def build_script_two_stage() -> list[dict]:
    return [
        {
            "template": "two_stage_summary",
            "reply": "DriftGuard adapts detection thresholds online and ranks alerts "
            "by learned operator utility.",
        },
        {
            "template": "two_stage_summary",
            "reply": "SpectraWatch monitors sensor streams in the frequency domain on "
            "edge hardware with fixed memory.",
        },
        {"template": "two_stage_contrast", "reply": SUMMARY_REPLY},
    ]


SCRIPT_BUILDERS = {
    "tod": build_script_tod,
    "tod_no_tree": build_script_no_tree,
    "tod_no_sd": build_script_no_sd,
    "single_stage": build_script_single_stage,
    "two_stage": build_script_two_stage,
}


# --- golden prompt bindings ---------------------------------------------------


def golden_bindings() -> dict[str, dict[str, str]]:
    contributions_a = (
        "Author 0 Paper's Contribution #0: Adaptive thresholds track distribution "
        "drift: DriftGuard adjusts detection thresholds online as distributions "
        "shift, keeping false alarms bounded.\n"
        "Author 0 Paper's Contribution #0 Evidence: DriftGuard monitors high-volume "
        "event streams in real time."
    )
    contributions_b = (
        "Author 1 Paper's Contribution #0: Frequency-domain detection exposes faint "
        "periodic faults: Sliding spectral transforms reveal harmonics that "
        "time-domain rules miss.\n"
        "Author 1 Paper's Contribution #0 Evidence: SpectraWatch analyzes sensor "
        "streams in the frequency domain."
    )
    debate_contributions = (
        "Author 0 Paper's Contributions #0: Adaptive thresholds track distribution "
        "drift: DriftGuard adjusts detection thresholds online as distributions "
        "shift, keeping false alarms bounded.\n"
        "Author 0 Paper's Contribution Evidence #0: DriftGuard monitors high-volume "
        "event streams in real time.\n"
        "Author 1's relevant evidence to potentially counter the quality of this "
        "contribution: Sliding spectral transforms expose periodic faults that "
        "time-domain rules miss."
    )
    history_two_turns = (
        "Author 0 (present): DriftGuard adapts thresholds online, so detection "
        "quality holds as streams drift.\n"
        "Author 1 (present): SpectraWatch tracks spectral change, catching faint "
        "periodic faults that threshold rules miss."
    )
    tree_block = (
        '(0.1) Level 1 Topic: "Adaptivity of detection under changing stream '
        'conditions" : "Debate how each system adapts its detection behavior as '
        'stream conditions change over time."\n'
        "Author 0's Argument: DriftGuard offers drift-robust detection with bounded "
        "false alarms and no periodicity assumption.\n"
        "Author 1's Argument: SpectraWatch provides earlier warnings on periodic "
        "faults and degrades gracefully on aperiodic bursts."
    )
    topic_description = (
        "Methods that flag unusual behavior in unbounded event streams."
    )
    return {
        "mod_generate_topics": {
            "topic": TOPIC,
            "topic_description": topic_description,
            "author_0_title": PAPER_A_TITLE,
            "author_0_abstract": PAPER_A_ABSTRACT,
            "author_0_contributions": contributions_a,
            "author_1_title": PAPER_B_TITLE,
            "author_1_abstract": PAPER_B_ABSTRACT,
            "author_1_contributions": contributions_b,
            "k": "3",
        },
        "mod_is_expand": {
            "topic": TOPIC,
            "topic_description": topic_description,
            "conversation_history": history_two_turns,
            "previous_arguments": (
                "Author 0's arguments:\n- Adaptive thresholds track distribution "
                "drift: DriftGuard adjusts detection thresholds online.\n"
                "Author 1's arguments:\n- Frequency-domain detection exposes faint "
                "periodic faults: Spectral transforms reveal faint harmonics."
            ),
            "current_arguments": (
                "Author 0: DriftGuard offers drift-robust detection with bounded "
                "false alarms.\n"
                "Author 1: SpectraWatch provides earlier warnings on periodic faults."
            ),
        },
        "mod_summarize": {
            "topic": TOPIC,
            "author_0_title": PAPER_A_TITLE,
            "author_1_title": PAPER_B_TITLE,
            "tree": tree_block,
        },
        "persona_generate_arguments": {
            "paper_title": PAPER_A_TITLE,
            "paper_abstract": PAPER_A_ABSTRACT,
            "topic": TOPIC,
            "evidence": (
                "Evidence #0: DriftGuard monitors high-volume event streams in real "
                "time. It adapts detection thresholds continuously as input "
                "distributions shift. Operators receive ranked alerts with full "
                "provenance for every detection.\n"
                "Evidence #1: Modern services emit millions of events per hour. "
                "Static detection rules decay quickly when workloads change. "
                "DriftGuard estimates the drift rate of each feature online."
            ),
            "k": "3",
        },
        "persona_relevance": {
            "claim_title": "Frequency-domain detection exposes faint periodic faults",
            "claim_description": (
                "Sliding spectral transforms reveal harmonics that time-domain "
                "rules miss."
            ),
            "evidence": (
                "DriftGuard estimates the drift rate of each feature online. The "
                "estimator feeds an adaptive threshold controller with bounded "
                "false-alarm rates."
            ),
        },
        "persona_present": {
            "paper_title": PAPER_A_TITLE,
            "paper_abstract": PAPER_A_ABSTRACT,
            "opposition_title": PAPER_B_TITLE,
            "opposition_abstract": PAPER_B_ABSTRACT,
            "topic": "Adaptivity of detection under changing stream conditions",
            "topic_description": (
                "Debate how each system adapts its detection behavior as stream "
                "conditions change over time."
            ),
            "contributions": debate_contributions,
        },
        "persona_respond": {
            "paper_title": PAPER_A_TITLE,
            "paper_abstract": PAPER_A_ABSTRACT,
            "opposition_title": PAPER_B_TITLE,
            "opposition_abstract": PAPER_B_ABSTRACT,
            "topic": "Adaptivity of detection under changing stream conditions",
            "topic_description": (
                "Debate how each system adapts its detection behavior as stream "
                "conditions change over time."
            ),
            "contributions": debate_contributions,
            "conversation_history": history_two_turns,
        },
        "persona_revise": {
            "paper_title": PAPER_A_TITLE,
            "paper_abstract": PAPER_A_ABSTRACT,
            "opposition_title": PAPER_B_TITLE,
            "opposition_abstract": PAPER_B_ABSTRACT,
            "topic": "Adaptivity of detection under changing stream conditions",
            "topic_description": (
                "Debate how each system adapts its detection behavior as stream "
                "conditions change over time."
            ),
            "contributions": debate_contributions,
            "conversation_history": history_two_turns
            + "\nAuthor 0 (respond): Does spectral monitoring hold up when faults "
            "are aperiodic?\nAuthor 1 (respond): Aperiodic bursts still shift band "
            "energy and calibration absorbs them.",
        },
    }


# --- shared tree fixture --------------------------------------------------------


def build_five_node_tree():
    """Finished five-node tree: root, two children, two grandchildren under 0.1."""
    from treedebate.corpus import PaperRecord, Segment
    from treedebate.moderator import ExpansionVerdict, SubtopicProposal
    from treedebate.persona import Claim, DebateTurn, EvidencePool, Side, Stage
    from treedebate.tree import (
        LifecycleEvent,
        advance_status,
        attach_children,
        create_root,
        record_turns,
        record_verdict,
    )

    paper_a = PaperRecord(
        paper_id="pa", title=PAPER_A_TITLE, abstract=PAPER_A_ABSTRACT, introduction=PAPER_A_INTRO
    )
    paper_b = PaperRecord(
        paper_id="pb", title=PAPER_B_TITLE, abstract=PAPER_B_ABSTRACT, introduction=PAPER_B_INTRO
    )
    tree = create_root(TOPIC, "", paper_a, paper_b, {"max_depth": 3, "k": 3})
    root = tree.root_node
    root.claims_a = [Claim(0, "Adaptive thresholds", "Thresholds adapt online.", [0])]
    root.claims_b = [Claim(0, "Spectral detection", "Faults surface as harmonics.", [0])]
    seg_a = Segment(segment_id=0, paper_id="pa", text="DriftGuard adapts thresholds.", sentence_count=1)
    seg_b = Segment(segment_id=0, paper_id="pb", text="SpectraWatch tracks spectra.", sentence_count=1)
    root.evidence_a = EvidencePool(supporting=[seg_a], counter={0: [seg_a]}, unaddressed=set())
    root.evidence_b = EvidencePool(supporting=[seg_b], counter={}, unaddressed={0})
    advance_status(tree, "0", LifecycleEvent.DELIBERATION_COMPLETE)
    attach_children(
        tree,
        "0",
        [
            SubtopicProposal("Adaptivity under drift", "How detection adapts.", [0], [0]),
            SubtopicProposal("Deployment cost", "Cost of running each system.", [0], []),
        ],
    )

    def debate(node_id: str, expand: bool) -> None:
        record_turns(
            tree,
            node_id,
            [
                DebateTurn(Side.AUTHOR_0, Stage.PRESENT, f"A presents at {node_id}"),
                DebateTurn(Side.AUTHOR_1, Stage.PRESENT, f"B presents at {node_id}"),
                DebateTurn(Side.AUTHOR_0, Stage.RESPOND, f"A responds at {node_id}"),
                DebateTurn(Side.AUTHOR_1, Stage.RESPOND, f"B responds at {node_id}"),
                DebateTurn(Side.AUTHOR_0, Stage.REVISE, f"A revised argument at {node_id}"),
                DebateTurn(Side.AUTHOR_1, Stage.REVISE, f"B revised argument at {node_id}"),
            ],
        )
        record_verdict(
            tree,
            node_id,
            ExpansionVerdict(
                explanation=f"verdict for {node_id}",
                progression_of_arguments=expand,
                meaningful_questions=False,
                clear_winner=not expand,
            ),
        )

    debate("0.1", expand=True)
    node = tree.node("0.1")
    node.claims_a = [Claim(0, "Finer thresholds", "Per-feature thresholds.", [0])]
    node.claims_b = [Claim(0, "Band fusion", "Fused band scores.", [0])]
    node.evidence_a = EvidencePool(supporting=[seg_a])
    node.evidence_b = EvidencePool(supporting=[seg_b])
    advance_status(tree, "0.1", LifecycleEvent.DELIBERATION_COMPLETE)
    attach_children(
        tree,
        "0.1",
        [
            SubtopicProposal("Threshold granularity", "Per-feature adaptation.", [0], [0]),
            SubtopicProposal("Score fusion", "Combining band scores.", [0], [0]),
        ],
    )
    debate("0.2", expand=False)
    advance_status(tree, "0.2", LifecycleEvent.STOP)
    for node_id in ("0.1.1", "0.1.2"):
        debate(node_id, expand=False)
        advance_status(tree, node_id, LifecycleEvent.STOP)
    return tree


# --- fixture files ------------------------------------------------------------


def dataset_rows_small() -> list[list[str]]:
    return [
        [
            TOPIC,
            "https://example.org/driftguard",
            PAPER_A_TITLE,
            PAPER_A_ABSTRACT,
            PAPER_A_INTRO,
            "https://example.org/spectrawatch",
            PAPER_B_TITLE,
            PAPER_B_ABSTRACT,
            PAPER_B_INTRO,
            "0",
            "0",
        ],
        [
            "semantic code search",
            "https://example.org/codelens",
            "CodeLens: Structure-Aware Retrieval over Source Repositories",
            "CodeLens retrieves code by combining lexical and structural signals. "
            "It parses repositories into typed symbol graphs. Queries match both "
            "identifiers and graph neighborhoods.",
            "Developers search code dozens of times per day. Keyword search misses "
            "renamed or refactored logic. CodeLens indexes symbol graphs alongside "
            "tokens. Ranking fuses both signal families with a learned weighting.",
            "https://example.org/queryforge",
            "QueryForge: Natural-Language Interfaces for Issue Trackers",
            "QueryForge translates natural-language questions into issue-tracker "
            "queries. A grammar-constrained decoder guarantees executable output. "
            "Users refine results through short clarification dialogs.",
            "Issue trackers accumulate years of project memory. Most users never "
            "learn the query language. QueryForge maps plain questions onto that "
            "language. Constrained decoding keeps every emitted query executable.",
            "1",
            "1",
        ],
    ]


def dataset_rows_100() -> list[list[str]]:
    # Table layout: cited 15 method + 15 task, not-cited 30 method + 40 task.
    quota = (
        [("1", "0")] * 15  # cited, method
        + [("1", "1")] * 15  # cited, task
        + [("0", "0")] * 30  # not cited, method
        + [("0", "1")] * 40  # not cited, task
    )
    rows = []
    for i, (cite, method_task) in enumerate(quota, start=1):
        rows.append(
            [
                f"synthetic topic {i}",
                f"https://example.org/{i}a",
                f"Synthetic Paper {i}A",
                f"Abstract for paper {i}A. It states the first claim. It states the second claim.",
                f"Introduction for paper {i}A. Context sentence one. Context sentence two.",
                f"https://example.org/{i}b",
                f"Synthetic Paper {i}B",
                f"Abstract for paper {i}B. It states the first claim. It states the second claim.",
                f"Introduction for paper {i}B. Context sentence one. Context sentence two.",
                method_task,
                cite,
            ]
        )
    return rows


def write_tsv(path: Path, rows: list[list[str]]) -> None:
    from treedebate.corpus import DATASET_COLUMNS

    lines = ["\t".join(DATASET_COLUMNS)]
    lines.extend("\t".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_all_fixtures(root: Path = FIXTURES) -> None:
    root.mkdir(parents=True, exist_ok=True)
    write_tsv(root / "dataset_small.tsv", dataset_rows_small())
    write_tsv(root / "dataset_100.tsv", dataset_rows_100())
    scripts_dir = root / "mock_scripts"
    scripts_dir.mkdir(exist_ok=True)
    for variant, builder in SCRIPT_BUILDERS.items():
        (scripts_dir / f"{variant}.yaml").write_text(
            yaml.safe_dump(builder(), sort_keys=False, allow_unicode=True),
            encoding="utf-8",
        )
    (root / "golden_bindings.yaml").write_text(
        yaml.safe_dump(golden_bindings(), sort_keys=True, allow_unicode=True),
        encoding="utf-8",
    )


if __name__ == "__main__":
    write_all_fixtures()
    print(f"fixtures written under {FIXTURES}")
