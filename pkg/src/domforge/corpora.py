"""Corpus input readers.

Two plain-text corpus shapes are accepted everywhere a document stream is
expected: a directory of UTF-8 .txt files (read in sorted filename order so
iteration is deterministic) or a JSON-lines file with one object per line.
A lone non-JSONL file is treated as a single plain-text document.
"""

from __future__ import annotations

import json
from collections.abc import Iterator
from pathlib import Path

from .errors import IngestionError


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise IngestionError(f"{path}: not valid UTF-8 ({exc})") from None
    except OSError as exc:
        raise IngestionError(f"{path}: {exc}") from None


def _iter_jsonl(path: Path) -> Iterator[tuple[str, dict]]:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"{path}: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            identity = f"{path}:{lineno}"
            try:
                record = json.loads(line)
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                raise IngestionError(f"{identity}: bad JSON ({exc})") from None
            if not isinstance(record, dict):
                raise IngestionError(f"{identity}: expected a JSON object")
            yield identity, record


def _sorted_files(directory: Path) -> list[Path]:
    files = sorted(p for p in directory.iterdir() if p.is_file())
    if not files:
        raise IngestionError(f"{directory}: directory holds no files")
    return files


def iter_documents(path: str | Path) -> Iterator[tuple[str, str]]:
    """Yield (identity, text) for each document in a corpus path."""
    path = Path(path)
    if path.is_dir():
        for file in _sorted_files(path):
            yield str(file), _read_text(file)
    elif path.suffix in (".jsonl", ".json"):
        for identity, record in _iter_jsonl(path):
            text = record.get("text")
            if not isinstance(text, str):
                raise IngestionError(f"{identity}: missing string field 'text'")
            yield identity, text
    elif path.exists():
        yield str(path), _read_text(path)
    else:
        raise IngestionError(f"{path}: no such file or directory")


def iter_raw_docs(path: str | Path) -> Iterator[tuple[str, str, str]]:
    """Yield (doc_id, title, raw_text) triples for structured-document input.

    JSON-lines records carry explicit doc_id/title/text fields; for a
    directory of text files the filename stem is the doc_id and the title
    is empty.
    """
    path = Path(path)
    if path.is_dir():
        for file in _sorted_files(path):
            yield file.stem, "", _read_text(file)
    elif path.suffix in (".jsonl", ".json"):
        for identity, record in _iter_jsonl(path):
            doc_id = record.get("doc_id")
            text = record.get("text")
            if not isinstance(doc_id, str) or not doc_id:
                raise IngestionError(f"{identity}: missing non-empty string field 'doc_id'")
            if not isinstance(text, str):
                raise IngestionError(f"{identity}: missing string field 'text'")
            title = record.get("title", "")
            if not isinstance(title, str):
                raise IngestionError(f"{identity}: field 'title' must be a string")
            yield doc_id, title, text
    else:
        raise IngestionError(f"{path}: no such file or directory")


def iter_identified_texts(path: str | Path) -> Iterator[tuple[str, str]]:
    """Yield (doc_id, text) for ranking corpora; titles are folded into the text."""
    for doc_id, title, text in iter_raw_docs(path):
        if title:
            yield doc_id, title + "\n" + text
        else:
            yield doc_id, text
