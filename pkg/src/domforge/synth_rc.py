"""Synthetic reading-comprehension examples from sectioned technical documents.

A document whose sections include both a problem description (Question,
Symptom, ...) and a solution (Cause, Resolving the Problem, ...) yields one
example: the problem body is the query, the rest of the document is the
answer-bearing context with the solution body as the gold span, and a
configurable number of other documents are sampled as negatives.
"""

from __future__ import annotations

import json
import random
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path

from .errors import DuplicateIdError, EmptyDocumentError, PoolTooSmallError, ValidationError
from .report import GenerationReport
from .util import ordered_map, sub_rng, write_jsonl

PREAMBLE_HEADING = "PREAMBLE"

_MARKDOWN_HEADING = re.compile(r"^#{1,6}\s+(.+)$")
_TITLE_FUNCTION_WORDS = frozenset(
    "a an and as at by for in of on or the to with".split()
)


@dataclass(frozen=True)
class StructuredDoc:
    doc_id: str
    title: str
    sections: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise ValidationError("doc_id must be non-empty")
        if any(not heading for heading, _ in self.sections):
            raise ValidationError(f"{self.doc_id}: section headings must be non-empty")


def _normalize_heading(heading: str) -> str:
    return " ".join(heading.split()).casefold()


@dataclass(frozen=True)
class SectionRoleConfig:
    problem_headings: frozenset[str]
    solution_headings: frozenset[str]

    def __post_init__(self) -> None:
        problem = {_normalize_heading(h) for h in self.problem_headings}
        solution = {_normalize_heading(h) for h in self.solution_headings}
        overlap = problem & solution
        if overlap:
            raise ValidationError(f"headings cannot be both problem and solution: {sorted(overlap)}")
        object.__setattr__(self, "_problem_normalized", problem)
        object.__setattr__(self, "_solution_normalized", solution)

    @classmethod
    def from_dict(cls, doc: dict) -> "SectionRoleConfig":
        return cls(
            problem_headings=frozenset(doc["problem_headings"]),
            solution_headings=frozenset(doc["solution_headings"]),
        )


DEFAULT_SECTION_CONFIG = SectionRoleConfig(
    problem_headings=frozenset(
        {"Abstract", "Error Description", "Question", "Symptom", "Problem"}
    ),
    solution_headings=frozenset(
        {"Cause", "Resolving the Problem", "Resolution", "Answer", "Fix"}
    ),
)


@dataclass(frozen=True)
class RCExample:
    example_id: str
    query: str
    candidates: tuple[tuple[str, str], ...]  # (doc_id, context)
    answer: tuple[int, int, int] | None  # (doc_index, char_start, char_end)

    def validate(self, expected_answer_text: str | None = None) -> None:
        if self.answer is None:
            return
        doc_index, start, end = self.answer
        if not 0 <= doc_index < len(self.candidates):
            raise ValidationError(f"{self.example_id}: answer doc_index out of range")
        context = self.candidates[doc_index][1]
        if not 0 <= start < end <= len(context):
            raise ValidationError(f"{self.example_id}: answer span out of range")
        if expected_answer_text is not None and context[start:end] != expected_answer_text:
            raise ValidationError(f"{self.example_id}: answer span does not match expected text")

    @property
    def answer_text(self) -> str | None:
        if self.answer is None:
            return None
        doc_index, start, end = self.answer
        return self.candidates[doc_index][1][start:end]

    def to_dict(self) -> dict:
        answer = None
        if self.answer is not None:
            answer = {
                "doc_index": self.answer[0],
                "char_start": self.answer[1],
                "char_end": self.answer[2],
            }
        return {
            "example_id": self.example_id,
            "query": self.query,
            "candidates": [{"doc_id": d, "context": c} for d, c in self.candidates],
            "answer": answer,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RCExample":
        answer = doc.get("answer")
        return cls(
            example_id=doc["example_id"],
            query=doc["query"],
            candidates=tuple((c["doc_id"], c["context"]) for c in doc["candidates"]),
            answer=None
            if answer is None
            else (answer["doc_index"], answer["char_start"], answer["char_end"]),
        )


def _is_title_case_line(line: str) -> bool:
    words = line.split()
    if not 1 <= len(words) <= 10:
        return False
    if line[-1] in ".,;:":
        return False
    if not words[0][0].isupper():
        return False
    for word in words:
        if word.lower() in _TITLE_FUNCTION_WORDS:
            continue
        if not (word[0].isupper() or word[0].isdigit()):
            return False
    return True


def parse_structured_doc(raw: str, doc_id: str, title: str = "") -> StructuredDoc:
    """Split raw text into titled sections.

    A heading is a markdown line (1-6 leading '#') or a title-case line
    followed by a blank line. Text before the first heading becomes a
    PREAMBLE section.
    """
    if not raw.strip():
        raise EmptyDocumentError(f"{doc_id}: document is empty")

    lines = raw.splitlines()
    sections: list[tuple[str, str]] = []
    heading = PREAMBLE_HEADING
    body: list[str] = []

    def flush() -> None:
        text = "\n".join(body).strip()
        if heading != PREAMBLE_HEADING or text:
            sections.append((heading, text))

    i = 0
    while i < len(lines):
        line = lines[i]
        stripped = line.strip()
        md = _MARKDOWN_HEADING.match(line)
        if md:
            flush()
            heading, body = md.group(1).strip(), []
            i += 1
            continue
        if (
            stripped
            and i + 1 < len(lines)
            and not lines[i + 1].strip()
            and _is_title_case_line(stripped)
        ):
            flush()
            heading, body = stripped, []
            i += 2
            continue
        body.append(line)
        i += 1
    flush()
    return StructuredDoc(doc_id=doc_id, title=title, sections=tuple(sections))


def classify_sections(doc: StructuredDoc, cfg: SectionRoleConfig) -> tuple[list[int], list[int]]:
    """Section indices whose headings match the problem/solution sets
    (case-insensitively, whitespace-normalized)."""
    problem: list[int] = []
    solution: list[int] = []
    for i, (heading, _) in enumerate(doc.sections):
        normalized = _normalize_heading(heading)
        if normalized in cfg._problem_normalized:  # type: ignore[attr-defined]
            problem.append(i)
        elif normalized in cfg._solution_normalized:  # type: ignore[attr-defined]
            solution.append(i)
    return problem, solution


def _render(doc: StructuredDoc, exclude: int | None = None) -> tuple[str, dict[int, tuple[int, int]]]:
    """Render a document to text; returns (text, section index -> body span).

    The title (whitespace-normalized to one line) leads, then each section
    as "heading\\nbody", blocks separated by blank lines.
    """
    parts: list[str] = []
    pos = 0

    def push(s: str) -> None:
        nonlocal pos
        parts.append(s)
        pos += len(s)

    title = " ".join(doc.title.split())
    if title:
        push(title)
    body_spans: dict[int, tuple[int, int]] = {}
    for i, (heading, body) in enumerate(doc.sections):
        if i == exclude:
            continue
        if parts:
            push("\n\n")
        push(heading)
        push("\n")
        start = pos
        push(body)
        body_spans[i] = (start, pos)
    return "".join(parts), body_spans


def render_full_text(doc: StructuredDoc) -> str:
    return _render(doc)[0]


def make_rc_example(
    doc: StructuredDoc,
    negatives_pool: Sequence[StructuredDoc],
    cfg: SectionRoleConfig,
    num_negatives: int,
    rng: random.Random,
    example_id: str | None = None,
) -> RCExample | None:
    """Build one example from a document, or None if it is not eligible.

    Eligible means: at least one problem section, and at least one solution
    section with a non-empty body (the answer span may not be empty). The
    first of each is used. Negatives are drawn uniformly without
    replacement and the candidate order is shuffled.
    """
    if num_negatives < 0:
        raise ValidationError("num_negatives must be >= 0")
    problem, solution = classify_sections(doc, cfg)
    if not problem or not solution:
        return None
    solution_idx = solution[0]
    if not doc.sections[solution_idx][1]:
        return None
    if len(negatives_pool) < num_negatives:
        raise PoolTooSmallError(
            f"{doc.doc_id}: pool of {len(negatives_pool)} docs cannot supply {num_negatives} negatives"
        )

    query_idx = problem[0]
    query = doc.sections[query_idx][1]
    if query_idx == solution_idx:  # disjoint configs make this unreachable
        return None
    context, body_spans = _render(doc, exclude=query_idx)
    char_start, char_end = body_spans[solution_idx]

    picked = rng.sample(range(len(negatives_pool)), num_negatives)
    entries = [(doc.doc_id, context)]
    entries.extend(
        (negatives_pool[j].doc_id, render_full_text(negatives_pool[j])) for j in picked
    )
    order = list(range(len(entries)))
    rng.shuffle(order)
    candidates = tuple(entries[j] for j in order)
    doc_index = order.index(0)

    example = RCExample(
        example_id=example_id if example_id is not None else f"rc-{doc.doc_id}",
        query=query,
        candidates=candidates,
        answer=(doc_index, char_start, char_end),
    )
    example.validate(expected_answer_text=doc.sections[solution_idx][1])
    return example


class _PoolView(Sequence):
    """The corpus minus one document, without copying the list."""

    def __init__(self, docs: Sequence[StructuredDoc], skip: int):
        self._docs = docs
        self._skip = skip

    def __len__(self) -> int:
        return len(self._docs) - 1

    def __getitem__(self, j: int) -> StructuredDoc:
        if not 0 <= j < len(self):
            raise IndexError(j)
        return self._docs[j if j < self._skip else j + 1]


def _parse_raw(item: tuple[str, str, str]) -> StructuredDoc:
    doc_id, title, raw = item
    return parse_structured_doc(raw, doc_id, title=title)


def parse_doc_stream(
    raw_docs: Iterable[tuple[str, str, str]], workers: int = 1
) -> list[StructuredDoc]:
    """Parse (doc_id, title, raw) triples, enforcing doc_id uniqueness."""
    docs = ordered_map(_parse_raw, list(raw_docs), workers=workers)
    seen: set[str] = set()
    for doc in docs:
        if doc.doc_id in seen:
            raise DuplicateIdError(f"duplicate doc_id {doc.doc_id!r} in corpus")
        seen.add(doc.doc_id)
    return docs


def generate_rc_corpus(
    docs: Iterable[StructuredDoc],
    cfg: SectionRoleConfig,
    num_negatives: int,
    seed: int,
) -> tuple[list[RCExample], GenerationReport]:
    """One example per eligible document, deterministically under the seed.

    Each example draws its randomness from a sub-seed keyed on (seed,
    example ordinal), so output does not depend on how documents were
    scheduled across workers.
    """
    docs = list(docs)
    report = GenerationReport()
    examples: list[RCExample] = []
    for i, doc in enumerate(docs):
        report.seen += 1
        problem, solution = classify_sections(doc, cfg)
        if not problem:
            report.skip("no_problem_section")
            continue
        if not solution:
            report.skip("no_solution_section")
            continue
        if not doc.sections[solution[0]][1]:
            report.skip("empty_solution_body")
            continue
        rng = sub_rng(seed, "rc", len(examples))
        example = make_rc_example(
            doc,
            _PoolView(docs, i),
            cfg,
            num_negatives,
            rng,
            example_id=f"rc-{doc.doc_id}",
        )
        if example is None:  # unreachable given the gates above
            report.skip("ineligible")
            continue
        examples.append(example)
        report.emitted += 1
    return examples, report


def write_rc_corpus(examples: Iterable[RCExample], path: str | Path) -> int:
    return write_jsonl(path, (ex.to_dict() for ex in examples))


def read_rc_corpus(path: str | Path) -> Iterator[RCExample]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield RCExample.from_dict(json.loads(line))
