"""Shared fixtures: the sample pair, scripted providers, golden-file helper."""

from __future__ import annotations

import os
from pathlib import Path

import pytest

from treedebate.corpus import load_dataset
from treedebate.providers import HashEmbeddingProvider, ScriptedChatProvider, load_script

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN_RUNS = FIXTURES / "golden_runs"
MOCK_SCRIPTS = FIXTURES / "mock_scripts"


def golden_check(path: Path, actual: str) -> None:
    """Compare against a golden file; UPDATE_GOLDENS=1 rewrites it instead."""
    if os.environ.get("UPDATE_GOLDENS") == "1":
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(actual, encoding="utf-8")
    assert path.exists(), f"golden file missing: {path} (run with UPDATE_GOLDENS=1)"
    expected = path.read_text(encoding="utf-8")
    assert actual == expected, f"output does not match golden file {path}"


@pytest.fixture
def fixture_pair():
    return load_dataset(FIXTURES / "dataset_small.tsv")[0]


@pytest.fixture
def embedder():
    return HashEmbeddingProvider()


def scripted_provider(variant: str) -> ScriptedChatProvider:
    return ScriptedChatProvider(load_script(MOCK_SCRIPTS / f"{variant}.yaml"))
