"""Streaming corpus statistics and greedy protected-token selection.

Coverage here is always measured over token occurrences, not types: a
corpus is N% covered when N% of its pre-token occurrences encode to a
single vocabulary piece. Selection ranks out-of-vocabulary words by
frequency and takes the shortest prefix that lifts coverage over the
requested threshold.
"""

from __future__ import annotations

import json
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from .errors import CheckpointOutOfRangeError, ValidationError
from .tokenizer import Vocabulary, add_protected, encode_word, pre_tokenize, save_vocabulary
from .util import atomic_write_text, dump_json, ordered_map

DEFAULT_MIN_COUNT = 2


@dataclass(frozen=True)
class FrequencyTable:
    """Word -> occurrence count over a corpus, plus the occurrence total."""

    counts: dict[str, int]
    total: int

    def __post_init__(self) -> None:
        if any(c < 1 for c in self.counts.values()):
            raise ValidationError("frequency counts must be >= 1")
        if self.total != sum(self.counts.values()):
            raise ValidationError("total must equal the sum of counts")

    @classmethod
    def from_counter(cls, counter: Counter[str]) -> "FrequencyTable":
        return cls(counts=dict(counter), total=sum(counter.values()))

    def merged(self, other: "FrequencyTable") -> "FrequencyTable":
        merged = Counter(self.counts)
        merged.update(other.counts)
        return FrequencyTable.from_counter(merged)


@dataclass(frozen=True)
class TokenizationStats:
    word_count: int
    oov_count: int
    piece_count: int
    coverage: float
    oov_rate: float
    bpe_tok_ratio: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "word_count": self.word_count,
            "oov_count": self.oov_count,
            "piece_count": self.piece_count,
            "coverage": self.coverage,
            "oov_rate": self.oov_rate,
            "bpe_tok_ratio": self.bpe_tok_ratio,
            "degenerate": self.degenerate,
        }


class CoverageRow(NamedTuple):
    added_word_count: int
    coverage: float
    bpe_tok_ratio: float


@dataclass(frozen=True)
class CoverageCurve:
    rows: list[CoverageRow]

    def __post_init__(self) -> None:
        for prev, cur in zip(self.rows, self.rows[1:]):
            if cur.added_word_count <= prev.added_word_count:
                raise ValidationError("added_word_count must be strictly increasing")
            if cur.coverage < prev.coverage or cur.bpe_tok_ratio > prev.bpe_tok_ratio:
                raise ValidationError("coverage must be non-decreasing and ratio non-increasing")


@dataclass(frozen=True)
class SelectionResult:
    """Greedy selection outcome; `unreachable` means even adding every
    eligible word left coverage below the threshold."""

    words: list[str]
    coverage: float
    unreachable: bool


@dataclass(frozen=True)
class ExtensionManifest:
    added_words: list[str]
    first_new_id: int
    seed: int
    init_policy: str = "random"

    def __post_init__(self) -> None:
        if len(set(self.added_words)) != len(self.added_words):
            raise ValidationError("added_words must be distinct")

    def to_dict(self) -> dict:
        return {
            "added_words": self.added_words,
            "first_new_id": self.first_new_id,
            "seed": self.seed,
            "init_policy": self.init_policy,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExtensionManifest":
        return cls(
            added_words=list(doc["added_words"]),
            first_new_id=int(doc["first_new_id"]),
            seed=int(doc["seed"]),
            init_policy=str(doc["init_policy"]),
        )


def _count_chunk(texts: list[str]) -> Counter[str]:
    counter: Counter[str] = Counter()
    for text in texts:
        counter.update(pre_tokenize(text))
    return counter


def count_words(corpus: Iterable[str], workers: int = 1) -> FrequencyTable:
    """Count every pre-token occurrence in a stream of document texts.

    Counting is associative, so the result is independent of document order
    and of how the stream is sharded across workers.
    """
    if workers <= 1:
        counter: Counter[str] = Counter()
        for text in corpus:
            counter.update(pre_tokenize(text))
        return FrequencyTable.from_counter(counter)

    chunks: list[list[str]] = []
    chunk: list[str] = []
    for text in corpus:
        chunk.append(text)
        if len(chunk) >= 256:
            chunks.append(chunk)
            chunk = []
    if chunk:
        chunks.append(chunk)
    counter = Counter()
    for part in ordered_map(_count_chunk, chunks, workers=workers, chunksize=1):
        counter.update(part)
    return FrequencyTable.from_counter(counter)


def _encode_profile(vocab: Vocabulary, table: FrequencyTable) -> dict[str, tuple[int, bool]]:
    """Per word type: (piece count, encodes-to-itself-in-one-piece)."""
    profile: dict[str, tuple[int, bool]] = {}
    for word in table.counts:
        enc = encode_word(vocab, word)
        profile[word] = (len(enc), len(enc) == 1 and enc[0] == word)
    return profile


def stats_for_table(vocab: Vocabulary, table: FrequencyTable) -> TokenizationStats:
    if table.total == 0:
        return TokenizationStats(0, 0, 0, coverage=1.0, oov_rate=0.0, bpe_tok_ratio=1.0, degenerate=True)
    profile = _encode_profile(vocab, table)
    oov = 0
    pieces = 0
    for word, count in table.counts.items():
        n_pieces, single = profile[word]
        pieces += count * n_pieces
        if not single:
            oov += count
    total = table.total
    return TokenizationStats(
        word_count=total,
        oov_count=oov,
        piece_count=pieces,
        coverage=(total - oov) / total,
        oov_rate=oov / total,
        bpe_tok_ratio=pieces / total,
    )


def corpus_stats(vocab: Vocabulary, corpus: Iterable[str], workers: int = 1) -> TokenizationStats:
    return stats_for_table(vocab, count_words(corpus, workers=workers))


def _eligible_oov(
    vocab: Vocabulary, table: FrequencyTable, min_count: int
) -> tuple[list[tuple[str, int]], int, int]:
    """Sorted selectable OOV words plus (all-OOV occurrences, total pieces)."""
    profile = _encode_profile(vocab, table)
    oov_occurrences = 0
    total_pieces = 0
    eligible: list[tuple[str, int]] = []
    for word, count in table.counts.items():
        n_pieces, single = profile[word]
        total_pieces += count * n_pieces
        if not single:
            oov_occurrences += count
            if count >= min_count:
                eligible.append((word, count))
    eligible.sort(key=lambda wc: (-wc[1], wc[0]))
    return eligible, oov_occurrences, total_pieces


def select_protected(
    vocab: Vocabulary,
    freq: FrequencyTable,
    threshold: float,
    min_count: int = DEFAULT_MIN_COUNT,
) -> SelectionResult:
    """Pick the shortest frequency-ranked OOV prefix reaching the coverage threshold.

    Ties in frequency break lexicographically. Words rarer than `min_count`
    are never selected (singleton noise would dominate the tail); if the
    threshold cannot be reached the full eligible list comes back flagged
    unreachable.
    """
    if not 0 < threshold <= 1:
        raise ValidationError(f"threshold must be in (0, 1], got {threshold}")
    if freq.total == 0:
        return SelectionResult(words=[], coverage=1.0, unreachable=False)

    eligible, oov_occurrences, _ = _eligible_oov(vocab, freq, min_count)
    covered = freq.total - oov_occurrences
    coverage = covered / freq.total
    if coverage >= threshold:
        return SelectionResult(words=[], coverage=coverage, unreachable=False)

    selected: list[str] = []
    for word, count in eligible:
        selected.append(word)
        covered += count
        coverage = covered / freq.total
        if coverage >= threshold:
            return SelectionResult(words=selected, coverage=coverage, unreachable=False)
    return SelectionResult(words=selected, coverage=coverage, unreachable=True)


def coverage_curve(
    vocab: Vocabulary,
    freq: FrequencyTable,
    checkpoints: Sequence[int],
    min_count: int = DEFAULT_MIN_COUNT,
) -> CoverageCurve:
    """Coverage and BPE/TOK ratio after adding the top-k selectable OOV words.

    Added words count as single pieces, so the ratio can only fall as k
    grows while coverage can only rise.
    """
    prev = -1
    for k in checkpoints:
        if k <= prev:
            raise ValidationError("checkpoints must be strictly increasing")
        if k < 0:
            raise ValidationError("checkpoints must be non-negative")
        prev = k

    if freq.total == 0:
        if any(k > 0 for k in checkpoints):
            raise CheckpointOutOfRangeError("corpus has no selectable OOV words")
        return CoverageCurve(rows=[CoverageRow(k, 1.0, 1.0) for k in checkpoints])

    eligible, oov_occurrences, total_pieces = _eligible_oov(vocab, freq, min_count)
    too_big = [k for k in checkpoints if k > len(eligible)]
    if too_big:
        raise CheckpointOutOfRangeError(
            f"checkpoint {too_big[0]} exceeds the {len(eligible)} selectable OOV word types"
        )

    profile = _encode_profile(vocab, freq)
    covered = freq.total - oov_occurrences
    rows: list[CoverageRow] = []
    cum_count = 0
    cum_piece_savings = 0
    pos = 0
    for k in checkpoints:
        while pos < k:
            word, count = eligible[pos]
            n_pieces, _ = profile[word]
            cum_count += count
            cum_piece_savings += count * (n_pieces - 1)
            pos += 1
        rows.append(
            CoverageRow(
                added_word_count=k,
                coverage=(covered + cum_count) / freq.total,
                bpe_tok_ratio=(total_pieces - cum_piece_savings) / freq.total,
            )
        )
    return CoverageCurve(rows=rows)


def round_up_selection(result: SelectionResult, eligible_words: list[str], granularity: int) -> list[str]:
    """Extend a minimal selection up to a round count (presentation nicety).

    Takes more words from the same ordering until the size is a multiple of
    `granularity`, capped at the eligible list length.
    """
    if granularity <= 1:
        return list(result.words)
    k = len(result.words)
    rounded = ((k + granularity - 1) // granularity) * granularity
    return eligible_words[: min(rounded, len(eligible_words))]


def selectable_words(vocab: Vocabulary, freq: FrequencyTable, min_count: int = DEFAULT_MIN_COUNT) -> list[str]:
    """The full selection ordering (all eligible OOV words, best first)."""
    eligible, _, _ = _eligible_oov(vocab, freq, min_count)
    return [word for word, _ in eligible]


def emit_extension(
    vocab: Vocabulary, words: Sequence[str], seed: int, out_dir: str | Path
) -> ExtensionManifest:
    """Write the extended vocabulary plus a manifest recording what a
    downstream trainer must randomly initialize."""
    words = list(words)
    if len(set(words)) != len(words):
        raise ValidationError("extension words must be distinct")
    extended = add_protected(vocab, words)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_vocabulary(extended, out_dir / "extended_vocab.json")
    manifest = ExtensionManifest(added_words=words, first_new_id=len(vocab), seed=seed)
    dump_json(manifest.to_dict(), out_dir / "extension_manifest.json")
    return manifest


def load_manifest(path: str | Path) -> ExtensionManifest:
    with open(path, encoding="utf-8") as fh:
        return ExtensionManifest.from_dict(json.load(fh))


def save_frequency_table(table: FrequencyTable, path: str | Path) -> None:
    """TSV export: word<TAB>count, most frequent first, ties alphabetical."""
    items = sorted(table.counts.items(), key=lambda wc: (-wc[1], wc[0]))
    atomic_write_text(path, "".join(f"{word}\t{count}\n" for word, count in items))


def load_frequency_table(path: str | Path) -> FrequencyTable:
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            word, _, count = line.rpartition("\t")
            if not word or not count.isdigit():
                raise ValidationError(f"{path}:{lineno}: expected 'word<TAB>count'")
            counts[word] = int(count)
    return FrequencyTable(counts=counts, total=sum(counts.values()))
