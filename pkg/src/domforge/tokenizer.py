"""Subword (BPE) encoder/decoder with a protected-token bypass.

Words placed in the vocabulary's protected set are never segmented: the
lookup happens before any merge is attempted, on the exact (case-sensitive)
pre-token string. Everything else is greedily merged over Unicode
characters, with characters outside the piece alphabet mapped to the
unknown piece.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from .errors import UnknownPieceError, ValidationError


def pre_tokenize(text: str) -> list[str]:
    """Split text into pre-tokens.

    Splits on Unicode whitespace, then splits each fragment at boundaries
    between alphanumeric runs and runs of other characters, so
    "restart WAS8.5" becomes ["restart", "WAS8", ".", "5"].
    """
    words: list[str] = []
    for fragment in text.split():
        if fragment.isalnum():
            # fast path: the overwhelmingly common single-class fragment
            words.append(fragment)
        else:
            for _, run in itertools.groupby(fragment, key=str.isalnum):
                words.append("".join(run))
    return words


@dataclass(frozen=True)
class Vocabulary:
    """Immutable subword inventory: pieces, merge rules and protected words.

    `pieces` maps piece string to a dense id 0..N-1 (insertion order = id
    order). `merges` is ranked by list position; `protected` words bypass
    segmentation entirely. Safe to share across workers: all operations on
    it are pure and it is never mutated after construction.
    """

    pieces: dict[str, int]
    merges: tuple[tuple[str, str], ...] = ()
    protected: frozenset[str] = frozenset()
    unk_piece: str = "<unk>"

    def __post_init__(self) -> None:
        ids = sorted(self.pieces.values())
        if ids != list(range(len(self.pieces))):
            raise ValidationError("piece ids must be dense 0..N-1 and unique")
        for left, right in self.merges:
            for part in (left, right, left + right):
                if part not in self.pieces:
                    raise ValidationError(f"merge rule references unknown piece {part!r}")
        for word in self.protected:
            if word not in self.pieces:
                raise ValidationError(f"protected word {word!r} is not a piece")
        if self.unk_piece not in self.pieces:
            raise ValidationError(f"unk piece {self.unk_piece!r} is not a piece")

    def __len__(self) -> int:
        return len(self.pieces)

    @cached_property
    def merge_ranks(self) -> dict[tuple[str, str], int]:
        # first occurrence wins if a pair is (pathologically) listed twice
        ranks: dict[tuple[str, str], int] = {}
        for rank, pair in enumerate(self.merges):
            ranks.setdefault(pair, rank)
        return ranks

    @cached_property
    def _encode_cache(self) -> dict[str, list[str]]:
        return {}

    def id_of(self, piece: str) -> int:
        try:
            return self.pieces[piece]
        except KeyError:
            raise UnknownPieceError(f"piece {piece!r} not in vocabulary") from None


@dataclass(frozen=True)
class PieceSequence:
    """Encoded text: the flat piece list plus the index of each word's first piece."""

    pieces: list[str]
    word_boundaries: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        prev = -1
        for boundary in self.word_boundaries:
            if boundary <= prev or boundary >= max(len(self.pieces), 1):
                raise ValidationError("word_boundaries must be strictly increasing indices into pieces")
            prev = boundary
        if self.word_boundaries and self.word_boundaries[0] != 0:
            raise ValidationError("first word boundary must be 0")


def encode_word(vocab: Vocabulary, word: str) -> list[str]:
    """Encode one pre-token into pieces.

    Protected words come back whole. Otherwise the word's characters
    (unknown ones replaced by the unk piece) are merged greedily: always
    the lowest-ranked applicable rule, at its leftmost occurrence.
    """
    if word in vocab.protected:
        return [word]
    cached = vocab._encode_cache.get(word)
    if cached is not None:
        return list(cached)

    pieces = [ch if ch in vocab.pieces else vocab.unk_piece for ch in word]
    ranks = vocab.merge_ranks
    while len(pieces) > 1:
        best_rank = None
        best_pos = -1
        for pos in range(len(pieces) - 1):
            rank = ranks.get((pieces[pos], pieces[pos + 1]))
            if rank is not None and (best_rank is None or rank < best_rank):
                best_rank = rank
                best_pos = pos
        if best_rank is None:
            break
        pieces[best_pos : best_pos + 2] = [pieces[best_pos] + pieces[best_pos + 1]]

    vocab._encode_cache[word] = list(pieces)
    return pieces


def encode_text(vocab: Vocabulary, text: str) -> PieceSequence:
    """pre_tokenize then encode_word each word, recording word boundaries."""
    pieces: list[str] = []
    boundaries: list[int] = []
    for word in pre_tokenize(text):
        boundaries.append(len(pieces))
        pieces.extend(encode_word(vocab, word))
    return PieceSequence(pieces, boundaries)


def decode(vocab: Vocabulary, seq: PieceSequence) -> str:
    """Join pieces back into text, one space at each word boundary but the first."""
    for piece in seq.pieces:
        if piece not in vocab.pieces:
            raise UnknownPieceError(f"piece {piece!r} not in vocabulary")
    boundaries = set(seq.word_boundaries)
    out: list[str] = []
    for i, piece in enumerate(seq.pieces):
        if i > 0 and i in boundaries:
            out.append(" ")
        out.append(piece)
    return "".join(out)


def is_single_token(vocab: Vocabulary, word: str) -> bool:
    """True iff the word encodes to exactly one piece equal to itself."""
    encoded = encode_word(vocab, word)
    return len(encoded) == 1 and encoded[0] == word


def add_protected(vocab: Vocabulary, words: list[str]) -> Vocabulary:
    """Return a new vocabulary with `words` as protected single pieces.

    New words get fresh dense ids appended after the existing ones; a word
    that is already a piece keeps its id and only gains the protected flag.
    Existing piece->id assignments never change.
    """
    seen: set[str] = set()
    for word in words:
        if not word or any(ch.isspace() for ch in word):
            raise ValidationError(f"protected word must be a non-empty pre-token, got {word!r}")
        if word in seen:
            raise ValidationError(f"duplicate word in protected extension: {word!r}")
        seen.add(word)

    pieces = dict(vocab.pieces)
    next_id = len(pieces)
    for word in words:
        if word not in pieces:
            pieces[word] = next_id
            next_id += 1
    return Vocabulary(
        pieces=pieces,
        merges=vocab.merges,
        protected=vocab.protected | seen,
        unk_piece=vocab.unk_piece,
    )


def vocabulary_to_json(vocab: Vocabulary) -> str:
    by_id = sorted(vocab.pieces, key=vocab.pieces.__getitem__)
    doc = {
        "pieces": by_id,
        "merges": [list(pair) for pair in vocab.merges],
        "protected": sorted(vocab.protected),
        "unk_piece": vocab.unk_piece,
    }
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def save_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    from .util import atomic_write_text

    atomic_write_text(path, vocabulary_to_json(vocab))


def load_vocabulary(path: str | Path) -> Vocabulary:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        pieces = {piece: i for i, piece in enumerate(doc["pieces"])}
        if len(pieces) != len(doc["pieces"]):
            raise ValidationError(f"duplicate piece in vocabulary file {path}")
        return Vocabulary(
            pieces=pieces,
            merges=tuple((left, right) for left, right in doc["merges"]),
            protected=frozenset(doc["protected"]),
            unk_piece=doc["unk_piece"],
        )
    except KeyError as exc:
        raise ValidationError(f"vocabulary file {path} is missing field {exc}") from None
