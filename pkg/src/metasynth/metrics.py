"""NDCG / MRR / average-rank harness over judge rankings of competing snippet variants.

Each method contributes exactly one judged output per item, so the DCG
position is always 1 and NDCG reduces to the method's normalized gain.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

from .core import ProductPage, Snippet
from .errors import InputError, InvalidArgumentError

EXPONENTIAL = "exponential"
LINEAR = "linear"


@dataclass(frozen=True)
class JudgedItem:
    item_id: str
    ranking: Mapping[str, int]
    variants: tuple[tuple[str, Snippet], ...] = ()

    def __post_init__(self):
        n = len(self.ranking)
        if n < 2:
            raise InvalidArgumentError(f"item {self.item_id}: need at least two ranked methods")
        if sorted(self.ranking.values()) != list(range(1, n + 1)):
            raise InvalidArgumentError(f"item {self.item_id}: ranking is not a permutation of 1..{n}")
        if self.variants and {m for m, _ in self.variants} != set(self.ranking):
            raise InvalidArgumentError(f"item {self.item_id}: variants and ranking name different methods")

    @property
    def n(self) -> int:
        return len(self.ranking)

    @classmethod
    def from_dict(cls, row: Mapping) -> "JudgedItem":
        variants = tuple((v["method"], Snippet(v["title"], v["description"])) for v in row.get("variants", ()))
        return cls(str(row["item_id"]), {str(k): int(v) for k, v in row["ranking"].items()}, variants)

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "ranking": dict(self.ranking),
            "variants": [{"method": m, "title": s.title, "description": s.description} for m, s in self.variants],
        }


@dataclass(frozen=True)
class MethodMetrics:
    ndcg: float
    mrr: float
    avg_rank: float


@dataclass(frozen=True)
class MetricsTable:
    methods: dict[str, MethodMetrics]
    item_count: int
    gain: str = EXPONENTIAL

    def to_dict(self) -> dict:
        return {
            "item_count": self.item_count,
            "gain": self.gain,
            "methods": {m: {"ndcg": v.ndcg, "mrr": v.mrr, "avg_rank": v.avg_rank} for m, v in self.methods.items()},
        }

    def format_table(self) -> str:
        width = max([len("method")] + [len(m) for m in self.methods])
        lines = [f"{'method':<{width}}  {'NDCG':>8}  {'MRR':>8}  {'AvgRank':>8}"]
        for m, v in self.methods.items():
            lines.append(f"{m:<{width}}  {v.ndcg:>8.4f}  {v.mrr:>8.4f}  {v.avg_rank:>8.4f}")
        lines.append(f"({self.item_count} items)")
        return "\n".join(lines)


def ndcg_for_item(rank: int, n: int, gain: str = EXPONENTIAL) -> float:
    """Normalized gain of one output ranked ``rank`` of ``n``; graded relevance is ``n - rank``."""
    if n < 2:
        raise InvalidArgumentError("n must be >= 2")
    if not 1 <= rank <= n:
        raise InvalidArgumentError(f"rank {rank} outside 1..{n}")
    g = n - rank
    if gain == LINEAR:
        return g / (n - 1)
    if gain != EXPONENTIAL:
        raise InvalidArgumentError(f"unknown gain {gain!r}")
    return (2.0 ** g - 1.0) / (2.0 ** (n - 1) - 1.0)


def mrr(ranks: Sequence[int]) -> float:
    if not ranks:
        raise InvalidArgumentError("mrr of an empty rank list")
    if any(r < 1 for r in ranks):
        raise InvalidArgumentError("ranks must be >= 1")
    return math.fsum(1.0 / r for r in ranks) / len(ranks)


def average_rank(ranks: Sequence[int]) -> float:
    if not ranks:
        raise InvalidArgumentError("average rank of an empty rank list")
    return math.fsum(ranks) / len(ranks)


def compare_methods(items: Sequence[JudgedItem], gain: str = EXPONENTIAL) -> MetricsTable:
    if not items:
        raise InvalidArgumentError("no judged items")
    methods = sorted(items[0].ranking)
    for item in items:
        if sorted(item.ranking) != methods:
            raise InvalidArgumentError(f"item {item.item_id} has a different method set")
    table = {}
    for m in methods:
        ranks = [item.ranking[m] for item in items]
        ndcg = math.fsum(ndcg_for_item(item.ranking[m], item.n, gain) for item in items) / len(items)
        table[m] = MethodMetrics(ndcg=ndcg, mrr=mrr(ranks), avg_rank=average_rank(ranks))
    return MetricsTable(table, len(items), gain)


def load_rankings(path: str | Path) -> list[JudgedItem]:
    items = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                items.append(JudgedItem.from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from exc
    return items


def save_rankings(items: Sequence[JudgedItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item.to_dict(), ensure_ascii=False) + "\n")


class Judge(Protocol):
    def rank(self, page: ProductPage, variants: Sequence[tuple[str, Snippet]]) -> dict[str, int]: ...


@dataclass
class MockJudge:
    """Ranks variants by an aggregate evaluator score, best first; ties by method name."""

    score: Callable[[Snippet, ProductPage], float]
    calls: int = field(default=0)

    def rank(self, page: ProductPage, variants: Sequence[tuple[str, Snippet]]) -> dict[str, int]:
        self.calls += 1
        scored = sorted(((-self.score(s, page), m) for m, s in variants))
        return {m: i for i, (_, m) in enumerate(scored, 1)}


def judge_items(judge: Judge, pages: Sequence[ProductPage],
                outputs: Mapping[str, Mapping[str, Snippet]]) -> list[JudgedItem]:
    """Build judged items from ``outputs[method][page_id]`` for every page."""
    items = []
    methods = sorted(outputs)
    for page in pages:
        variants = tuple((m, outputs[m][page.page_id]) for m in methods)
        items.append(JudgedItem(page.page_id, judge.rank(page, variants), variants))
    return items
