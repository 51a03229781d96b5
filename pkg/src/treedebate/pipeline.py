"""Run orchestration for the five pipeline variants."""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .config import RunConfig
from .corpus import PairSample, PaperRecord, Segment, segment_paper, split_sentences
from .gateway import ChatProvider, Gateway, Transcript
from .moderator import (
    ExpansionVerdict,
    SubtopicProposal,
    format_argument_sets,
    format_revised_arguments,
    generate_subtopics,
    judge_expansion,
    should_expand,
    synthesize,
)
from .persona import (
    ContributionView,
    DebateTurn,
    EvidencePool,
    Persona,
    Side,
    generate_claims,
    preempt,
    present_argument,
    respond_to,
    revise_argument,
)
from .retrieval import (
    EmbeddingCache,
    EmbeddingProvider,
    embed_texts,
    format_topic_query,
    top_delta,
)
from .tree import (
    DebateTree,
    LifecycleEvent,
    TopicNode,
    advance_status,
    attach_children,
    create_root,
    record_turns,
    record_verdict,
)

BASELINE_TEMPERATURE = 0.4

SINGLE_STAGE_PROMPT = """\
You are given the title, abstract and introduction sections of two scientific papers.

Paper 0 Title: {title_0}
Paper 0 Abstract: {abstract_0}
Paper 0 Introduction: {introduction_0}

Paper 1 Title: {title_1}
Paper 1 Abstract: {abstract_1}
Paper 1 Introduction: {introduction_1}

Output a paragraph-long comparative summary of the two papers. Structure your summary with initially their similarities (which ideas/aspects overlap between the two papers?) to their differences (what makes the papers unique) in novelties. Focus more on the differences than the similarities.
"""

TWO_STAGE_SUMMARY_PROMPT = """\
Summarize the following paper based on its title, abstract, and introduction. Output a concise paragraph covering the paper's goals, methods, and claimed contributions.

Paper Title: {title}
Paper Abstract: {abstract}
Paper Introduction: {introduction}
"""

TWO_STAGE_CONTRAST_PROMPT = """\
You are given summaries of two scientific papers.

Paper 0 Summary: {summary_0}

Paper 1 Summary: {summary_1}

Based on the summaries, output a paragraph-long comparative summary of the two papers. Structure your summary with initially their similarities (which ideas/aspects overlap between the two papers?) to their differences (what makes the papers unique) in novelties. Focus more on the differences than the similarities.
"""


@dataclass
class RunArtifacts:
    pair_id: str
    variant: str
    summary: str
    transcript: Transcript
    config_snapshot: dict
    tree: DebateTree | None = None


def default_pair_id(pair: PairSample) -> str:
    if pair.row_number > 0:
        return f"row-{pair.row_number}"
    return f"{pair.paper_a.paper_id}__{pair.paper_b.paper_id}"


class _TranscriptEmbedder:
    """Logs every real embedding-provider call into the run transcript."""

    def __init__(self, inner: EmbeddingProvider, transcript: Transcript) -> None:
        self._inner = inner
        self._transcript = transcript
        self.provider_id = inner.provider_id

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        self._transcript.record_embedding(self.provider_id, len(texts))
        return self._inner.embed(texts)


class RetrievalEvidence:
    """Evidence source backed by cosine ranking over the paper's segments."""

    def __init__(
        self,
        paper: PaperRecord,
        provider: EmbeddingProvider,
        cache: EmbeddingCache,
        delta: int,
        segment_target: int,
    ) -> None:
        self.paper = paper
        self._provider = provider
        self._cache = cache
        self._delta = delta
        self.segments = segment_paper(paper, target=segment_target)
        self._pool: list[tuple[Segment, np.ndarray]] | None = None

    def _ensure_pool(self) -> list[tuple[Segment, np.ndarray]]:
        if self._pool is None:
            if self.segments:
                vectors = embed_texts(
                    [s.text for s in self.segments], self._provider, self._cache
                )
                self._pool = list(zip(self.segments, vectors))
            else:
                self._pool = []
        return self._pool

    def _rank(self, query: str) -> list[Segment]:
        pool = self._ensure_pool()
        if not pool:
            return []
        query_vec = embed_texts([query], self._provider, self._cache)[0]
        return [r.segment for r in top_delta(query_vec, pool, self._delta)]

    def topic_pool(self, query: str) -> list[Segment]:
        return self._rank(query)

    def counter_candidates(self, query: str) -> list[Segment]:
        return self._rank(query)


class FixedContextEvidence:
    """Evidence source for the variant with retrieval removed: the title,
    abstract, and introduction stand in for retrieved segments."""

    def __init__(self, paper: PaperRecord) -> None:
        self.paper = paper
        blocks = [
            f"Title: {paper.title}",
            f"Abstract: {paper.abstract}",
            f"Introduction: {paper.introduction}",
        ]
        self.segments = [
            Segment(
                segment_id=i,
                paper_id=paper.paper_id,
                text=text,
                sentence_count=max(1, len(split_sentences(text))),
            )
            for i, text in enumerate(blocks)
        ]

    def topic_pool(self, query: str) -> list[Segment]:
        return list(self.segments)

    def counter_candidates(self, query: str) -> list[Segment]:
        return list(self.segments)


@dataclass
class _Deliberation:
    claims_a: list
    claims_b: list
    evidence_a: EvidencePool
    evidence_b: EvidencePool

    @property
    def any_claims(self) -> bool:
        return bool(self.claims_a or self.claims_b)


@dataclass
class _NodeOutcome:
    node_id: str
    turns: list[DebateTurn]
    verdict: ExpansionVerdict | None
    expand: bool
    deliberation: _Deliberation | None
    proposals: list[SubtopicProposal]


class _Engine:
    """Single-writer orchestrator; node-level work may run in worker threads."""

    def __init__(
        self,
        pair: PairSample,
        config: RunConfig,
        gateway: Gateway,
        sources: dict[Side, RetrievalEvidence | FixedContextEvidence],
    ) -> None:
        self.pair = pair
        self.config = config
        self.gateway = gateway
        self.sources = sources
        self.persona = {
            Side.AUTHOR_0: Persona(paper=pair.paper_a, side=Side.AUTHOR_0),
            Side.AUTHOR_1: Persona(paper=pair.paper_b, side=Side.AUTHOR_1),
        }

    # -- deliberation ---------------------------------------------------

    def _deliberate_data(self, node: TopicNode) -> _Deliberation:
        query = format_topic_query(node.title, node.description or None)
        supporting: dict[Side, list[Segment]] = {}
        claims: dict[Side, list] = {}
        for side in (Side.AUTHOR_0, Side.AUTHOR_1):
            supporting[side] = self.sources[side].topic_pool(query)
            claims[side] = generate_claims(
                self.persona[side],
                query,
                supporting[side],
                self.config.k,
                self.gateway,
                node_id=node.node_id,
            )
        counters: dict[Side, tuple[dict, set]] = {}
        for side in (Side.AUTHOR_0, Side.AUTHOR_1):
            counters[side] = preempt(
                self.persona[side],
                claims[side.other],
                self.sources[side].counter_candidates,
                self.gateway,
                node_id=node.node_id,
            )
        return _Deliberation(
            claims_a=claims[Side.AUTHOR_0],
            claims_b=claims[Side.AUTHOR_1],
            evidence_a=EvidencePool(
                supporting=supporting[Side.AUTHOR_0],
                counter=counters[Side.AUTHOR_0][0],
                unaddressed=counters[Side.AUTHOR_0][1],
            ),
            evidence_b=EvidencePool(
                supporting=supporting[Side.AUTHOR_1],
                counter=counters[Side.AUTHOR_1][0],
                unaddressed=counters[Side.AUTHOR_1][1],
            ),
        )

    @staticmethod
    def _store_deliberation(tree: DebateTree, node: TopicNode, delib: _Deliberation) -> None:
        node.claims_a = delib.claims_a
        node.claims_b = delib.claims_b
        node.evidence_a = delib.evidence_a
        node.evidence_b = delib.evidence_b
        advance_status(tree, node.node_id, LifecycleEvent.DELIBERATION_COMPLETE)

    @staticmethod
    def _views(
        claims: list,
        pool: EvidencePool,
        opponent_pool: EvidencePool,
        selected: list[int] | None = None,
    ) -> list[ContributionView]:
        views = []
        for claim in claims:
            if selected is not None and claim.claim_id not in selected:
                continue
            views.append(
                ContributionView(
                    claim=claim,
                    evidence_texts=[
                        pool.supporting[i].text for i in claim.evidence_ids
                    ],
                    counter_texts=[
                        s.text for s in opponent_pool.counter.get(claim.claim_id, [])
                    ],
                )
            )
        return views

    def _node_views(
        self, node: TopicNode, side: Side, selected: list[int] | None = None
    ) -> list[ContributionView]:
        if side is Side.AUTHOR_0:
            return self._views(node.claims_a, node.evidence_a, node.evidence_b, selected)
        return self._views(node.claims_b, node.evidence_b, node.evidence_a, selected)

    def _debate_views(
        self, tree: DebateTree, node: TopicNode
    ) -> tuple[list[ContributionView], list[ContributionView]]:
        """A child debates the parent claims its creating proposal selected."""
        parent = tree.node(node.parent)
        return (
            self._node_views(parent, Side.AUTHOR_0, node.relevant_claims_a),
            self._node_views(parent, Side.AUTHOR_1, node.relevant_claims_b),
        )

    def _propose_subtopics(self, node: TopicNode) -> list[SubtopicProposal]:
        views_a = self._node_views(node, Side.AUTHOR_0)
        views_b = self._node_views(node, Side.AUTHOR_1)
        if not views_a and not views_b:
            self.gateway.transcript.note(
                "no claims from either persona; no viable subtopics",
                node_id=node.node_id,
            )
            return []
        return generate_subtopics(
            node.title,
            node.description,
            self.pair.paper_a,
            self.pair.paper_b,
            views_a,
            views_b,
            self.config.k,
            self.gateway,
            node_id=node.node_id,
        )

    # -- per-node debate work --------------------------------------------

    def _run_debate(
        self,
        node: TopicNode,
        views_a: list[ContributionView],
        views_b: list[ContributionView],
    ) -> list[DebateTurn]:
        a = self.persona[Side.AUTHOR_0]
        b = self.persona[Side.AUTHOR_1]
        paper_a, paper_b = self.pair.paper_a, self.pair.paper_b
        nid = node.node_id
        title, desc = node.title, node.description
        turns: list[DebateTurn] = []
        turns.append(present_argument(a, paper_b, title, desc, views_a, self.gateway, nid))
        turns.append(present_argument(b, paper_a, title, desc, views_b, self.gateway, nid))
        turns.append(respond_to(a, paper_b, title, desc, views_a, turns, self.gateway, nid))
        turns.append(respond_to(b, paper_a, title, desc, views_b, turns, self.gateway, nid))
        turns.append(revise_argument(a, paper_b, title, desc, views_a, turns, self.gateway, nid))
        turns.append(revise_argument(b, paper_a, title, desc, views_b, turns, self.gateway, nid))
        return turns

    def _node_work(
        self,
        node: TopicNode,
        views_a: list[ContributionView],
        views_b: list[ContributionView],
        judge: bool,
        recurse: bool,
    ) -> _NodeOutcome:
        turns = self._run_debate(node, views_a, views_b)
        verdict = None
        expand = False
        deliberation = None
        proposals: list[SubtopicProposal] = []
        if judge:
            verdict = judge_expansion(
                node.title,
                node.description,
                turns,
                format_argument_sets(views_a, views_b),
                format_revised_arguments(turns[4].text, turns[5].text),
                self.gateway,
                node_id=node.node_id,
            )
            expand = should_expand(verdict, node.depth, self.config.max_depth)
        if expand and recurse:
            deliberation = self._deliberate_data(node)
            if deliberation.any_claims:
                scratch = TopicNode(
                    node_id=node.node_id,
                    title=node.title,
                    description=node.description,
                    depth=node.depth,
                    claims_a=deliberation.claims_a,
                    claims_b=deliberation.claims_b,
                    evidence_a=deliberation.evidence_a,
                    evidence_b=deliberation.evidence_b,
                )
                proposals = self._propose_subtopics(scratch)
        return _NodeOutcome(
            node_id=node.node_id,
            turns=turns,
            verdict=verdict,
            expand=expand,
            deliberation=deliberation,
            proposals=proposals,
        )

    def _merge_outcome(
        self, tree: DebateTree, outcome: _NodeOutcome, judge: bool, recurse: bool
    ) -> list[str]:
        """Apply one node's results to the tree; returns new child ids."""
        node = tree.node(outcome.node_id)
        record_turns(tree, node.node_id, outcome.turns)
        if judge:
            record_verdict(tree, node.node_id, outcome.verdict)
        else:
            advance_status(tree, node.node_id, LifecycleEvent.STOP)
            return []
        if not (outcome.expand and recurse):
            advance_status(tree, node.node_id, LifecycleEvent.STOP)
            return []
        self._store_deliberation(tree, node, outcome.deliberation)
        if not outcome.proposals:
            self.gateway.transcript.note("no viable subtopics", node_id=node.node_id)
            return attach_children(tree, node.node_id, [])  # parent becomes a leaf
        return attach_children(tree, node.node_id, outcome.proposals)

    # -- tree construction -------------------------------------------------

    def run_debate_tree(
        self,
        topic_title: str,
        topic_description: str,
        judge: bool = True,
        recurse: bool = True,
        merge_proposals: bool = False,
    ) -> DebateTree:
        tree = create_root(
            topic_title,
            topic_description,
            self.pair.paper_a,
            self.pair.paper_b,
            self.config.snapshot(),
        )
        root = tree.root_node
        delib = self._deliberate_data(root)
        self._store_deliberation(tree, root, delib)
        proposals = self._propose_subtopics(root) if delib.any_claims else []
        if merge_proposals and proposals:
            proposals = [merge_subtopic_proposals(proposals)]
        if not proposals:
            self.gateway.transcript.note("no viable subtopics", node_id=root.node_id)
        frontier = attach_children(tree, tree.root, proposals)
        while frontier:
            work = [
                (tree.node(node_id), *self._debate_views(tree, tree.node(node_id)))
                for node_id in frontier
            ]
            if self.config.concurrency > 1 and len(work) > 1:
                with ThreadPoolExecutor(max_workers=self.config.concurrency) as pool:
                    outcomes = list(
                        pool.map(
                            lambda item: self._node_work(*item, judge, recurse), work
                        )
                    )
            else:
                outcomes = [self._node_work(*item, judge, recurse) for item in work]
            frontier = []
            for outcome in outcomes:
                frontier.extend(self._merge_outcome(tree, outcome, judge, recurse))
        return tree


def merge_subtopic_proposals(proposals: Sequence[SubtopicProposal]) -> SubtopicProposal:
    """Fold all proposals into one combined subtopic with tagged blocks."""
    title = " | ".join(f"(Topic {i}) {p.title}" for i, p in enumerate(proposals, start=1))
    description = "\n".join(
        f"[Topic {i}] {p.title}: {p.description}" for i, p in enumerate(proposals, start=1)
    )
    claims_a = sorted({c for p in proposals for c in p.relevant_claims_a})
    claims_b = sorted({c for p in proposals for c in p.relevant_claims_b})
    return SubtopicProposal(
        title=title,
        description=description,
        relevant_claims_a=claims_a,
        relevant_claims_b=claims_b,
    )


def _build_gateway(
    config: RunConfig,
    chat_provider: ChatProvider,
    transcript: Transcript,
    clock: Callable[[], float] | None,
) -> Gateway:
    return Gateway(
        provider=chat_provider,
        transcript=transcript,
        temperatures=config.temperature_table(),
        nucleus_mass=config.nucleus_mass,
        max_tokens=config.max_tokens,
        retries=config.retries,
        max_in_flight=max(config.concurrency, 1),
        clock=clock if clock is not None else time.perf_counter,
    )


def _tree_variant_artifacts(
    pair: PairSample,
    config: RunConfig,
    gateway: Gateway,
    sources: dict[Side, RetrievalEvidence | FixedContextEvidence],
    pair_id: str | None,
    judge: bool,
    recurse: bool,
    merge_proposals: bool,
) -> RunArtifacts:
    engine = _Engine(pair, config, gateway, sources)
    tree = engine.run_debate_tree(
        topic_title=pair.topic_title,
        topic_description=pair.topic_description or "",
        judge=judge,
        recurse=recurse,
        merge_proposals=merge_proposals,
    )
    result = synthesize(tree, gateway)
    return RunArtifacts(
        pair_id=pair_id or default_pair_id(pair),
        variant=config.variant,
        summary=result.summary,
        transcript=gateway.transcript,
        config_snapshot=config.snapshot(),
        tree=tree,
    )


def _retrieval_sources(
    pair: PairSample,
    config: RunConfig,
    embedding_provider: EmbeddingProvider,
    transcript: Transcript,
) -> dict[Side, RetrievalEvidence]:
    embedder = _TranscriptEmbedder(embedding_provider, transcript)
    cache = EmbeddingCache()
    return {
        Side.AUTHOR_0: RetrievalEvidence(
            pair.paper_a, embedder, cache, config.delta, config.segment_target
        ),
        Side.AUTHOR_1: RetrievalEvidence(
            pair.paper_b, embedder, cache, config.delta, config.segment_target
        ),
    }


def run_tree_of_debate(
    pair: PairSample,
    config: RunConfig,
    chat_provider: ChatProvider,
    embedding_provider: EmbeddingProvider,
    pair_id: str | None = None,
    clock: Callable[[], float] | None = None,
) -> RunArtifacts:
    if config.variant != "tod":
        raise ValueError(f"expected variant 'tod', got {config.variant!r}")
    transcript = Transcript()
    gateway = _build_gateway(config, chat_provider, transcript, clock)
    sources = _retrieval_sources(pair, config, embedding_provider, transcript)
    return _tree_variant_artifacts(
        pair, config, gateway, sources, pair_id, judge=True, recurse=True, merge_proposals=False
    )


def run_no_tree(
    pair: PairSample,
    config: RunConfig,
    chat_provider: ChatProvider,
    embedding_provider: EmbeddingProvider,
    pair_id: str | None = None,
    clock: Callable[[], float] | None = None,
) -> RunArtifacts:
    """Tree ablation: all subtopics merge into one child; no recursion."""
    if config.variant != "tod_no_tree":
        raise ValueError(f"expected variant 'tod_no_tree', got {config.variant!r}")
    transcript = Transcript()
    gateway = _build_gateway(config, chat_provider, transcript, clock)
    sources = _retrieval_sources(pair, config, embedding_provider, transcript)
    return _tree_variant_artifacts(
        pair, config, gateway, sources, pair_id, judge=False, recurse=False, merge_proposals=True
    )


def run_no_sd(
    pair: PairSample,
    config: RunConfig,
    chat_provider: ChatProvider,
    pair_id: str | None = None,
    clock: Callable[[], float] | None = None,
) -> RunArtifacts:
    """Self-deliberation ablation: fixed title/abstract/introduction context
    replaces retrieval; no embedding calls are made."""
    if config.variant != "tod_no_sd":
        raise ValueError(f"expected variant 'tod_no_sd', got {config.variant!r}")
    transcript = Transcript()
    gateway = _build_gateway(config, chat_provider, transcript, clock)
    sources: dict[Side, FixedContextEvidence] = {
        Side.AUTHOR_0: FixedContextEvidence(pair.paper_a),
        Side.AUTHOR_1: FixedContextEvidence(pair.paper_b),
    }
    return _tree_variant_artifacts(
        pair, config, gateway, sources, pair_id, judge=True, recurse=True, merge_proposals=False
    )


def run_single_stage(
    pair: PairSample,
    config: RunConfig,
    chat_provider: ChatProvider,
    pair_id: str | None = None,
    clock: Callable[[], float] | None = None,
) -> RunArtifacts:
    """Baseline: one direct comparative-summary call; no tree."""
    if config.variant != "single_stage":
        raise ValueError(f"expected variant 'single_stage', got {config.variant!r}")
    transcript = Transcript()
    gateway = _build_gateway(config, chat_provider, transcript, clock)
    prompt = SINGLE_STAGE_PROMPT.format(
        title_0=pair.paper_a.title,
        abstract_0=pair.paper_a.abstract,
        introduction_0=pair.paper_a.introduction,
        title_1=pair.paper_b.title,
        abstract_1=pair.paper_b.abstract,
        introduction_1=pair.paper_b.introduction,
    )
    summary = gateway.complete_raw("single_stage", prompt, BASELINE_TEMPERATURE)
    return RunArtifacts(
        pair_id=pair_id or default_pair_id(pair),
        variant=config.variant,
        summary=summary,
        transcript=transcript,
        config_snapshot=config.snapshot(),
        tree=None,
    )


def run_two_stage(
    pair: PairSample,
    config: RunConfig,
    chat_provider: ChatProvider,
    pair_id: str | None = None,
    clock: Callable[[], float] | None = None,
) -> RunArtifacts:
    """Baseline: summarize each paper, then contrast the two summaries."""
    if config.variant != "two_stage":
        raise ValueError(f"expected variant 'two_stage', got {config.variant!r}")
    transcript = Transcript()
    gateway = _build_gateway(config, chat_provider, transcript, clock)
    stage_one = []
    for paper in (pair.paper_a, pair.paper_b):
        prompt = TWO_STAGE_SUMMARY_PROMPT.format(
            title=paper.title, abstract=paper.abstract, introduction=paper.introduction
        )
        stage_one.append(gateway.complete_raw("two_stage_summary", prompt, BASELINE_TEMPERATURE))
    contrast_prompt = TWO_STAGE_CONTRAST_PROMPT.format(
        summary_0=stage_one[0], summary_1=stage_one[1]
    )
    summary = gateway.complete_raw("two_stage_contrast", contrast_prompt, BASELINE_TEMPERATURE)
    return RunArtifacts(
        pair_id=pair_id or default_pair_id(pair),
        variant=config.variant,
        summary=summary,
        transcript=transcript,
        config_snapshot=config.snapshot(),
        tree=None,
    )


def run_variant(
    pair: PairSample,
    config: RunConfig,
    chat_provider: ChatProvider,
    embedding_provider: EmbeddingProvider | None = None,
    pair_id: str | None = None,
    clock: Callable[[], float] | None = None,
) -> RunArtifacts:
    """Dispatch on config.variant."""
    if config.variant in ("tod", "tod_no_tree") and embedding_provider is None:
        raise ValueError(f"variant {config.variant!r} needs an embedding provider")
    if config.variant == "tod":
        return run_tree_of_debate(pair, config, chat_provider, embedding_provider, pair_id, clock)
    if config.variant == "tod_no_tree":
        return run_no_tree(pair, config, chat_provider, embedding_provider, pair_id, clock)
    if config.variant == "tod_no_sd":
        return run_no_sd(pair, config, chat_provider, pair_id, clock)
    if config.variant == "single_stage":
        return run_single_stage(pair, config, chat_provider, pair_id, clock)
    if config.variant == "two_stage":
        return run_two_stage(pair, config, chat_provider, pair_id, clock)
    raise ValueError(f"unknown variant {config.variant!r}")


def write_artifacts(artifacts: RunArtifacts, out_root: str | Path) -> dict[str, Path]:
    """Write summary, transcript, manifest (and the tree, when present)."""
    from .tree import serialize  # local import keeps module load light

    out_dir = Path(out_root) / artifacts.pair_id / artifacts.variant
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    summary_path = out_dir / "summary.txt"
    summary_path.write_text(artifacts.summary + "\n", encoding="utf-8")
    paths["summary"] = summary_path

    transcript_path = out_dir / "transcript.md"
    transcript_path.write_text(
        artifacts.transcript.render_markdown(
            header={"pair": artifacts.pair_id, "variant": artifacts.variant}
        )
        + "\n",
        encoding="utf-8",
    )
    paths["transcript"] = transcript_path

    files = {"summary": "summary.txt", "transcript": "transcript.md"}
    if artifacts.tree is not None:
        tree_path = out_dir / "tree.json"
        tree_path.write_text(serialize(artifacts.tree), encoding="utf-8")
        paths["tree"] = tree_path
        files["tree"] = "tree.json"

    manifest = {
        "format": "treedebate.manifest",
        "version": 1,
        "pair_id": artifacts.pair_id,
        "variant": artifacts.variant,
        "artifacts": files,
        "config": artifacts.config_snapshot,
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(
        json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    paths["manifest"] = manifest_path
    return paths
