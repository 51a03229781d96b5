"""Command-line surface: run pipelines, validate datasets, inspect trees,
render prompts for auditing, and compare all five variants."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import yaml

from . import prompts
from .config import VARIANTS, ConfigError, RunConfig, load_config
from .corpus import (
    DatasetSchemaError,
    DatasetValueError,
    PairSample,
    PaperRecord,
    load_dataset,
    validate_dataset,
)
from .gateway import TransportError
from .pipeline import default_pair_id, run_variant, write_artifacts
from .providers import (
    HashEmbeddingProvider,
    MockScriptError,
    OpenAIChatProvider,
    OpenAIEmbeddingProvider,
    ScriptedChatProvider,
    load_script,
)
from .tree import DebateTree, TopicNode, TreeFormatError, deserialize

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_PROVIDER = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treedebate",
        description="Debate two papers over a topic tree and emit a comparative summary.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one pipeline variant on one paper pair")
    _add_pair_args(run)
    _add_config_args(run)
    run.add_argument("--out", default="out", help="output directory root (default: out)")
    run.set_defaults(func=cmd_run)

    validate = sub.add_parser("validate-dataset", help="check a dataset TSV against the schema")
    validate.add_argument("dataset", help="path to the TSV file")
    validate.set_defaults(func=cmd_validate_dataset)

    inspect = sub.add_parser("inspect-tree", help="render a tree document as indented text")
    inspect.add_argument("tree", help="path to a .tree.json document")
    inspect.add_argument("--node", help="render only this node (path id such as 0.1)")
    inspect.set_defaults(func=cmd_inspect_tree)

    render = sub.add_parser("render-prompts", help="render prompt templates with bindings")
    render.add_argument("--template", help="template id (omit with --all)")
    render.add_argument("--all", action="store_true", help="render all eight templates")
    render.add_argument("--bindings", required=True, help="YAML file: template id -> bindings")
    render.add_argument("--out", help="write one file per template into this directory")
    render.set_defaults(func=cmd_render_prompts)

    compare = sub.add_parser("compare", help="run all five variants and write a manifest")
    _add_pair_args(compare)
    _add_config_args(compare, include_variant=False)
    compare.add_argument("--out", default="out", help="output directory root (default: out)")
    compare.set_defaults(func=cmd_compare)

    return parser


def _add_pair_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset", help="dataset TSV path")
    parser.add_argument("--row", type=int, help="1-based data row in the dataset")
    parser.add_argument("--paper-a", help="JSON file with the first paper's fields")
    parser.add_argument("--paper-b", help="JSON file with the second paper's fields")
    parser.add_argument("--topic", help="root topic title (required with explicit papers)")
    parser.add_argument("--topic-description", help="optional root topic description")
    parser.add_argument("--pair-id", help="override the output pair directory name")


def _add_config_args(parser: argparse.ArgumentParser, include_variant: bool = True) -> None:
    if include_variant:
        parser.add_argument(
            "--variant",
            choices=VARIANTS,
            help="pipeline variant (default: tod)",
        )
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument("--delta", type=int, help="retrieved segments per query (default: 5)")
    parser.add_argument("--k", type=int, help="max claims/subtopics per node (default: 3)")
    parser.add_argument("--max-depth", type=int, help="maximum tree depth (default: 3)")
    parser.add_argument("--concurrency", type=int, help="parallel node debates (default: 1)")
    parser.add_argument("--seed-label", help="free-form label recorded in the run config")
    parser.add_argument(
        "--mock",
        help="mock script: YAML file of scripted replies, or a directory of "
        "<variant>.yaml files (compare)",
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DatasetSchemaError, DatasetValueError, TreeFormatError,
            MockScriptError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TransportError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER


def _load_pair(args: argparse.Namespace) -> PairSample:
    if args.dataset:
        if args.row is None:
            raise ConfigError("--row is required with --dataset")
        samples = load_dataset(args.dataset)
        if not 1 <= args.row <= len(samples):
            raise ConfigError(
                f"--row {args.row} out of range; dataset has {len(samples)} rows"
            )
        return samples[args.row - 1]
    if args.paper_a and args.paper_b:
        if not args.topic:
            raise ConfigError("--topic is required with explicit paper files")
        return PairSample(
            topic_title=args.topic,
            topic_description=args.topic_description,
            paper_a=_load_paper(args.paper_a, "paper_a"),
            paper_b=_load_paper(args.paper_b, "paper_b"),
        )
    raise ConfigError("provide either --dataset with --row, or --paper-a and --paper-b")


def _load_paper(path: str, fallback_id: str) -> PaperRecord:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return PaperRecord(
            paper_id=str(data.get("paper_id", fallback_id)),
            title=data["title"],
            abstract=data["abstract"],
            introduction=data.get("introduction", ""),
            body=data.get("body"),
            source_link=data.get("source_link"),
        )
    except KeyError as exc:
        raise ConfigError(f"{path}: missing paper field {exc}") from exc


def _resolve_config(args: argparse.Namespace, variant: str | None = None) -> RunConfig:
    overrides = {
        "delta": args.delta,
        "k": args.k,
        "max_depth": args.max_depth,
        "concurrency": args.concurrency,
        "seed_label": args.seed_label,
        "variant": variant if variant is not None else getattr(args, "variant", None),
    }
    return load_config(config_path=args.config, overrides=overrides)


def _build_providers(config: RunConfig, mock: str | None, variant: str):
    """Returns (chat, embeddings, clock). Mock runs use a zeroed clock so
    transcripts are byte-stable."""
    if mock:
        mock_path = Path(mock)
        if mock_path.is_dir():
            mock_path = mock_path / f"{variant}.yaml"
        chat = ScriptedChatProvider(load_script(mock_path))
        return chat, HashEmbeddingProvider(), (lambda: 0.0)
    if not config.chat.configured:
        raise ConfigError(
            "chat provider not configured (set chat endpoint/model via --config "
            "or TREEDEBATE_CHAT_* environment variables), or pass --mock"
        )
    chat = OpenAIChatProvider(
        endpoint=config.chat.endpoint,
        model=config.chat.model,
        api_key=config.chat.api_key,
    )
    embeddings = None
    if config.embeddings.configured:
        embeddings = OpenAIEmbeddingProvider(
            endpoint=config.embeddings.endpoint,
            model=config.embeddings.model,
            api_key=config.embeddings.api_key,
        )
    if variant in ("tod", "tod_no_tree") and embeddings is None:
        raise ConfigError(
            f"variant {variant!r} needs an embedding provider (set TREEDEBATE_EMBED_* "
            "or the embeddings section of the config file), or pass --mock"
        )
    return chat, embeddings, None


def cmd_run(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    if config.concurrency > 1 and args.mock:
        # Scripted replies are consumed in sequence; parallel debates would
        # interleave them nondeterministically.
        print("note: --mock forces concurrency 1", file=sys.stderr)
        config = replace(config, concurrency=1)
    pair = _load_pair(args)
    chat, embeddings, clock = _build_providers(config, args.mock, config.variant)
    artifacts = run_variant(
        pair,
        config,
        chat_provider=chat,
        embedding_provider=embeddings,
        pair_id=args.pair_id,
        clock=clock,
    )
    paths = write_artifacts(artifacts, args.out)
    for name in ("summary", "tree", "transcript", "manifest"):
        if name in paths:
            print(f"{name}: {paths[name]}")
    return EXIT_OK


def cmd_validate_dataset(args: argparse.Namespace) -> int:
    report = validate_dataset(args.dataset)
    print(f"rows: {report.rows}")
    print()
    print(f"{'Category':<12}{'Method':>8}{'Task':>8}{'Total':>8}")
    print(
        f"{'Cited':<12}{report.cited_method:>8}{report.cited_task:>8}"
        f"{report.cited_method + report.cited_task:>8}"
    )
    print(
        f"{'Not Cited':<12}{report.not_cited_method:>8}{report.not_cited_task:>8}"
        f"{report.not_cited_method + report.not_cited_task:>8}"
    )
    total_method = report.cited_method + report.not_cited_method
    total_task = report.cited_task + report.not_cited_task
    print(f"{'Total':<12}{total_method:>8}{total_task:>8}{total_method + total_task:>8}")
    if report.errors:
        print()
        for error in report.errors:
            print(f"invalid: {error}")
        return EXIT_FAILURE
    return EXIT_OK


def _render_node(tree: DebateTree, node: TopicNode, lines: list[str], recurse: bool) -> None:
    indent = "  " * node.depth
    if node.depth == 0:
        lines.append(f"{indent}(0) Topic: {node.title}")
    else:
        lines.append(f"{indent}({node.node_id}) Level {node.depth} Topic: {node.title}")
    if node.description:
        lines.append(f"{indent}    Description: {node.description}")
    if node.revised_argument_a is not None:
        lines.append(f"{indent}    Author 0's Argument: {node.revised_argument_a}")
    if node.revised_argument_b is not None:
        lines.append(f"{indent}    Author 1's Argument: {node.revised_argument_b}")
    if node.verdict is not None:
        lines.append(
            f"{indent}    Verdict: progression={node.verdict.progression_of_arguments}, "
            f"questions={node.verdict.meaningful_questions}, "
            f"clear_winner={node.verdict.clear_winner}"
        )
    lines.append(f"{indent}    Status: {node.status.value}")
    if recurse:
        for child_id in node.children:
            _render_node(tree, tree.node(child_id), lines, recurse)


def render_tree(tree: DebateTree, node_id: str | None = None) -> str:
    """Indented text render of the whole tree or a single node."""
    lines: list[str] = []
    if node_id is None:
        _render_node(tree, tree.root_node, lines, recurse=True)
    else:
        if node_id not in tree.nodes:
            parent_id = node_id.rsplit(".", 1)[0] if "." in node_id else tree.root
            valid = (
                tree.nodes[parent_id].children if parent_id in tree.nodes else []
            ) or [tree.root]
            raise TreeFormatError(
                f"no node {node_id!r}; valid ids here: {', '.join(valid)}"
            )
        _render_node(tree, tree.node(node_id), lines, recurse=False)
    return "\n".join(lines)


def cmd_inspect_tree(args: argparse.Namespace) -> int:
    tree = deserialize(Path(args.tree).read_text(encoding="utf-8"))
    print(render_tree(tree, node_id=args.node))
    return EXIT_OK


def cmd_render_prompts(args: argparse.Namespace) -> int:
    if not args.all and not args.template:
        raise ConfigError("pass --template <id> or --all")
    if args.template and args.template not in prompts.TEMPLATE_IDS:
        raise ConfigError(
            f"unknown template {args.template!r}; valid ids: "
            + ", ".join(prompts.TEMPLATE_IDS)
        )
    bindings_doc = yaml.safe_load(Path(args.bindings).read_text(encoding="utf-8")) or {}
    if not isinstance(bindings_doc, dict):
        raise ConfigError(f"{args.bindings}: bindings file must map template ids to bindings")
    targets = list(prompts.TEMPLATE_IDS) if args.all else [args.template]
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    for template_id in targets:
        bindings = {
            str(k): str(v) for k, v in (bindings_doc.get(template_id) or {}).items()
        }
        unused = set(bindings) - prompts.placeholders(template_id)
        if unused:
            print(
                f"warning: {template_id}: unused binding keys {sorted(unused)}",
                file=sys.stderr,
            )
        try:
            rendered = prompts.render_prompt(template_id, bindings)
        except prompts.RenderError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if out_dir:
            path = out_dir / f"{template_id}.txt"
            path.write_text(rendered, encoding="utf-8")
            print(f"{template_id}: {path}")
        else:
            print(f"=== {template_id} ===")
            print(rendered)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    pair = _load_pair(args)
    results: dict[str, dict] = {}
    failed = False
    pair_id = args.pair_id
    for variant in VARIANTS:
        config = _resolve_config(args, variant=variant)
        try:
            chat, embeddings, clock = _build_providers(config, args.mock, variant)
            artifacts = run_variant(
                pair,
                config,
                chat_provider=chat,
                embedding_provider=embeddings,
                pair_id=pair_id,
                clock=clock,
            )
            pair_id = artifacts.pair_id
            paths = write_artifacts(artifacts, args.out)
            results[variant] = {
                "status": "ok",
                "summary": str(paths["summary"].relative_to(Path(args.out) / pair_id)),
            }
        except Exception as exc:  # noqa: BLE001 - isolate per-variant failures
            failed = True
            results[variant] = {"status": "failed", "error": str(exc)}
            if pair_id is None:
                pair_id = default_pair_id(pair)
    manifest = {
        "format": "treedebate.compare",
        "version": 1,
        "pair_id": pair_id,
        "variants": results,
    }
    manifest_path = Path(args.out) / pair_id / "manifest.json"
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    manifest_path.write_text(
        json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    print(f"manifest: {manifest_path}")
    return EXIT_FAILURE if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
