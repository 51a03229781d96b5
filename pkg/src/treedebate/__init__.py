"""Debate-tree comparative summarization of paper pairs."""

from .config import RunConfig, VARIANTS
from .corpus import PairSample, PaperRecord, Segment, load_dataset, segment_paper
from .pipeline import RunArtifacts, run_variant, write_artifacts
from .tree import DebateTree, deserialize, serialize

__version__ = "0.1.0"

__all__ = [
    "DebateTree",
    "PairSample",
    "PaperRecord",
    "RunArtifacts",
    "RunConfig",
    "Segment",
    "VARIANTS",
    "deserialize",
    "load_dataset",
    "run_variant",
    "segment_paper",
    "serialize",
    "write_artifacts",
    "__version__",
]
