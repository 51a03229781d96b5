"""Paper-pair dataset ingestion and segmentation of paper text into retrieval units."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class DatasetSchemaError(ValueError):
    """The TSV header does not match the expected 11-column schema."""


class DatasetValueError(ValueError):
    """A data row violates the schema (bad flag value, wrong field count)."""


class DiffersBy(str, Enum):
    METHOD = "method"
    TASK = "task"


class CitationLink(str, Enum):
    CITED = "cited"
    NOT_CITED = "not_cited"


@dataclass
class PaperRecord:
    """One paper as extracted text. Title and abstract are mandatory."""

    paper_id: str
    title: str
    abstract: str
    introduction: str
    body: str | None = None
    source_link: str | None = None

    def __post_init__(self) -> None:
        if not self.title.strip():
            raise ValueError(f"paper {self.paper_id!r}: title must be non-empty")
        if not self.abstract.strip():
            raise ValueError(f"paper {self.paper_id!r}: abstract must be non-empty")


@dataclass(frozen=True)
class Segment:
    """A consecutive group of sentences from one paper; the unit of retrieval."""

    segment_id: int
    paper_id: str
    text: str
    sentence_count: int


@dataclass
class PairSample:
    """One dataset row: a topic plus the two papers to be contrasted."""

    topic_title: str
    topic_description: str | None
    paper_a: PaperRecord
    paper_b: PaperRecord
    differs_by: DiffersBy = DiffersBy.METHOD
    citation_link: CitationLink = CitationLink.NOT_CITED
    row_number: int = 0
    raw_fields: tuple[str, ...] = field(default=(), repr=False)


# Canonical column names, in file order. Header cells are normalized
# (lowercased, '#'/'/'/' ' folded to underscores) before comparison, so
# both "Paper #1 Title" and "paper_1_title" headers are accepted.
DATASET_COLUMNS = (
    "topic",
    "paper_1_link",
    "paper_1_title",
    "paper_1_abstract",
    "paper_1_introduction",
    "paper_2_link",
    "paper_2_title",
    "paper_2_abstract",
    "paper_2_introduction",
    "method_task",
    "cite_no",
)


def _normalize_header_cell(cell: str) -> str:
    cell = cell.strip().lower().replace("#", " ")
    cell = re.sub(r"[/\s]+", "_", cell).strip("_")
    # "Paper #1 arXiv Link" and "paper_1_link" name the same column.
    return cell.replace("arxiv_link", "link")


def load_dataset(path: str | Path) -> list[PairSample]:
    """Parse the 11-column TSV into pair samples, one per data row."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.replace("\r\n", "\n").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DatasetSchemaError("dataset file is empty (missing header row)")

    header = [_normalize_header_cell(c) for c in lines[0].split("\t")]
    for expected in DATASET_COLUMNS:
        if expected not in header:
            raise DatasetSchemaError(f"missing column: {expected}")
    if header != list(DATASET_COLUMNS):
        raise DatasetSchemaError(
            f"columns out of order or extra columns present: {header}"
        )

    samples: list[PairSample] = []
    for row_number, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(DATASET_COLUMNS):
            # Cells containing literal tabs are indistinguishable from extra
            # columns in plain TSV; both are rejected.
            raise DatasetValueError(
                f"row {row_number}: expected {len(DATASET_COLUMNS)} fields, got {len(fields)}"
            )
        (topic, link1, title1, abs1, intro1, link2, title2, abs2, intro2,
         method_task, cite_no) = fields
        differs_by = _parse_flag(
            method_task, row_number, "method_task",
            {"0": DiffersBy.METHOD, "1": DiffersBy.TASK},
        )
        citation = _parse_flag(
            cite_no, row_number, "cite_no",
            {"0": CitationLink.NOT_CITED, "1": CitationLink.CITED},
        )
        row_index = row_number - 1  # 1-based over data rows
        samples.append(
            PairSample(
                topic_title=topic,
                topic_description=None,
                paper_a=PaperRecord(
                    paper_id=f"row{row_index}_p1",
                    title=title1,
                    abstract=abs1,
                    introduction=intro1,
                    source_link=link1 or None,
                ),
                paper_b=PaperRecord(
                    paper_id=f"row{row_index}_p2",
                    title=title2,
                    abstract=abs2,
                    introduction=intro2,
                    source_link=link2 or None,
                ),
                differs_by=differs_by,
                citation_link=citation,
                row_number=row_index,
                raw_fields=tuple(fields),
            )
        )
    return samples


def _parse_flag(value: str, row_number: int, column: str, mapping: dict):
    if value.strip() not in mapping:
        raise DatasetValueError(
            f"row {row_number}: column {column} must be 0 or 1, got {value!r}"
        )
    return mapping[value.strip()]


def serialize_dataset(samples: list[PairSample]) -> str:
    """Re-serialize parsed samples back to TSV (round-trips the 11 columns)."""
    lines = ["\t".join(DATASET_COLUMNS)]
    for s in samples:
        lines.append(
            "\t".join(
                (
                    s.topic_title,
                    s.paper_a.source_link or "",
                    s.paper_a.title,
                    s.paper_a.abstract,
                    s.paper_a.introduction,
                    s.paper_b.source_link or "",
                    s.paper_b.title,
                    s.paper_b.abstract,
                    s.paper_b.introduction,
                    "0" if s.differs_by is DiffersBy.METHOD else "1",
                    "1" if s.citation_link is CitationLink.CITED else "0",
                )
            )
        )
    return "\n".join(lines) + "\n"


@dataclass
class DatasetReport:
    """Row counts per category plus any per-row violations."""

    rows: int
    cited_method: int
    cited_task: int
    not_cited_method: int
    not_cited_task: int
    errors: list[str]

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_dataset(path: str | Path) -> DatasetReport:
    """Check every row against the schema, collecting all violations."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.replace("\r\n", "\n").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        return DatasetReport(0, 0, 0, 0, 0, ["dataset file is empty (missing header row)"])

    errors: list[str] = []
    header = [_normalize_header_cell(c) for c in lines[0].split("\t")]
    if header != list(DATASET_COLUMNS):
        missing = [c for c in DATASET_COLUMNS if c not in header]
        if missing:
            errors.append(f"header: missing columns {missing}")
        else:
            errors.append(f"header: columns out of order or extra columns: {header}")
        return DatasetReport(0, 0, 0, 0, 0, errors)

    counts = {("cited", "method"): 0, ("cited", "task"): 0,
              ("not_cited", "method"): 0, ("not_cited", "task"): 0}
    rows = 0
    for row_number, line in enumerate(lines[1:], start=2):
        rows += 1
        fields = line.split("\t")
        if len(fields) != len(DATASET_COLUMNS):
            errors.append(
                f"row {row_number}: expected {len(DATASET_COLUMNS)} fields, got {len(fields)}"
            )
            continue
        method_task, cite_no = fields[9].strip(), fields[10].strip()
        row_ok = True
        if method_task not in ("0", "1"):
            errors.append(f"row {row_number}: method_task must be 0 or 1, got {fields[9]!r}")
            row_ok = False
        if cite_no not in ("0", "1"):
            errors.append(f"row {row_number}: cite_no must be 0 or 1, got {fields[10]!r}")
            row_ok = False
        for idx, name in ((2, "paper_1_title"), (3, "paper_1_abstract"),
                          (6, "paper_2_title"), (7, "paper_2_abstract")):
            if not fields[idx].strip():
                errors.append(f"row {row_number}: {name} must be non-empty")
                row_ok = False
        if row_ok:
            cite = "cited" if cite_no == "1" else "not_cited"
            kind = "task" if method_task == "1" else "method"
            counts[(cite, kind)] += 1
    return DatasetReport(
        rows=rows,
        cited_method=counts[("cited", "method")],
        cited_task=counts[("cited", "task")],
        not_cited_method=counts[("not_cited", "method")],
        not_cited_task=counts[("not_cited", "task")],
        errors=errors,
    )


# --- sentence splitting -----------------------------------------------------

# Tokens after which a terminal period never ends a sentence.
_ABBREVIATIONS = {
    "al.",  # et al.
    "e.g.", "i.e.", "cf.", "vs.", "ca.", "etc.",
    "Fig.", "Figs.", "Eq.", "Eqs.", "Sec.", "Secs.", "Tab.", "Tabs.",
    "No.", "Dr.", "Prof.", "Mr.", "Ms.", "Mrs.", "Jr.", "Sr.", "St.",
    "approx.", "resp.",
}

_BOUNDARY = re.compile(r"(?<=[.!?]) (?=[A-Z0-9])")


def normalize_whitespace(text: str) -> str:
    """Collapse whitespace runs to single spaces; extraction noise is common."""
    return re.sub(r"\s+", " ", text).strip()


def _is_abbreviation(prefix: str) -> bool:
    token_match = re.search(r"(\S+)$", prefix)
    if token_match is None:
        return True  # boundary at text start: not a real sentence end
    token = token_match.group(1)
    if token in _ABBREVIATIONS:
        return True
    # Initials such as "A." in author names.
    if re.fullmatch(r"[A-Z]\.", token):
        return True
    return False


def split_sentences(text: str) -> list[str]:
    """Split normalized text into sentences on terminal punctuation.

    Boundaries are '. ', '! ' or '? ' followed by an uppercase letter or
    digit, except after known abbreviations. Joining the result with single
    spaces reproduces the input exactly.
    """
    normalized = normalize_whitespace(text)
    if not normalized:
        return []
    cuts = [0]
    for match in _BOUNDARY.finditer(normalized):
        if _is_abbreviation(normalized[: match.start()]):
            continue
        cuts.append(match.end())
    sentences = []
    for i, start in enumerate(cuts):
        end = cuts[i + 1] - 1 if i + 1 < len(cuts) else len(normalized)
        sentences.append(normalized[start:end])
    return sentences


def segmentation_source(paper: PaperRecord) -> str:
    """Text a paper is segmented from: abstract, introduction, body. No title."""
    parts = [paper.abstract, paper.introduction]
    if paper.body:
        parts.append(paper.body)
    return " ".join(p for p in parts if p)


def segment_paper(paper: PaperRecord, target: int = 3) -> list[Segment]:
    """Greedily group consecutive sentences into segments of `target` sentences.

    The final segment may be shorter. Returns [] when no sentences are found.
    """
    if target < 1:
        raise ValueError(f"target must be >= 1, got {target}")
    sentences = split_sentences(segmentation_source(paper))
    segments = []
    for i in range(0, len(sentences), target):
        group = sentences[i : i + target]
        segments.append(
            Segment(
                segment_id=i // target,
                paper_id=paper.paper_id,
                text=" ".join(group),
                sentence_count=len(group),
            )
        )
    return segments
