"""Bookkeeping for generation runs: what was seen, emitted, skipped and why."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class GenerationReport:
    seen: int = 0
    emitted: int = 0
    skipped: dict[str, int] = field(default_factory=dict)

    def skip(self, reason: str, n: int = 1) -> None:
        self.skipped[reason] = self.skipped.get(reason, 0) + n

    @property
    def skipped_total(self) -> int:
        return sum(self.skipped.values())

    def to_dict(self) -> dict:
        return {
            "seen": self.seen,
            "emitted": self.emitted,
            "skipped_total": self.skipped_total,
            "skipped": dict(sorted(self.skipped.items())),
        }
