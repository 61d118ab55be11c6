"""Resolve the query set for a target page: match the library, or expand and verify."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Sequence
from urllib.parse import urlsplit, urlunsplit

from . import prompts
from .core import ProductPage
from .embedding import embed_page
from .errors import ExpansionEmptyError, InvalidArgumentError, MetaSynthError, NoCoverageError
from .library import ExemplarLibrary

log = logging.getLogger(__name__)

_LIST_MARKER = re.compile(r"^(?:[-*\u2022]|\d+[.)])\s+")

MATCHED = "matched"
EXPANDED = "expanded"


@dataclass
class QueryResolution:
    mode: str
    queries: list[tuple[str, float | None]]
    s_star: float
    expansion_attempted: bool = False
    augmented_count: int = 0
    expansion_trace: dict = field(default_factory=dict)

    @property
    def query_texts(self) -> list[str]:
        return [q for q, _ in self.queries]


def canonical_url(url: str) -> str:
    """Lowercase scheme and host, drop a trailing slash from the path."""
    parts = urlsplit(url.strip())
    path = parts.path.rstrip("/")
    return urlunsplit((parts.scheme.lower(), parts.netloc.lower(), path, parts.query, parts.fragment))


def expand_queries(page: ProductPage, llm, n_expand: int = 5) -> list[str]:
    """Ask the generator for candidate queries; trimmed, lowercased, deduplicated."""
    text = llm.send(prompts.expand_prompt(page, n_expand))
    out: list[str] = []
    for line in text.splitlines():
        q = " ".join(_LIST_MARKER.sub("", line.strip()).lower().split())
        if q and q not in out:
            out.append(q)
    if not out:
        raise ExpansionEmptyError(f"page {page.page_id}: expansion produced no usable query")
    return out[:n_expand]


def relevance_filter(queries: Sequence[str], target_url: str, search, K_hit: int) -> list[str]:
    """Keep the queries whose top ``K_hit`` results include ``target_url``."""
    if K_hit < 1:
        raise InvalidArgumentError("K_hit must be >= 1")
    target = canonical_url(target_url)
    kept = []
    for q in queries:
        try:
            results = search.search(q, K_hit)
        except MetaSynthError as exc:
            log.warning("relevance filter dropped %r: %s", q, exc)
            continue
        if any(canonical_url(r.url) == target for r in results[:K_hit]):
            kept.append(q)
    return kept


def augment_library(lib: ExemplarLibrary, queries: Sequence[str], search, K_aug: int, exclude_url: str) -> int:
    """Add the top ``K_aug`` results of each query (minus the target page); returns how many were stored."""
    excluded = canonical_url(exclude_url)
    added = 0
    for q in queries:
        try:
            results = search.search(q, K_aug)
        except MetaSynthError as exc:
            log.warning("augmentation skipped %r: %s", q, exc)
            continue
        lib.ensure_query(q)
        for r in results:
            if canonical_url(r.url) == excluded:
                continue
            if lib.add_exemplar(lib.make_exemplar(q, r.url, r.title, r.description, r.rank)).added:
                added += 1
    return added


def resolve_queries(page: ProductPage, lib: ExemplarLibrary, search, llm, cfg) -> QueryResolution:
    """Matched mode when some library query is at least ``tau_q`` similar to the page, else expand.

    An empty library counts as ``s_star = -inf``. Raises :class:`NoCoverageError`
    when expansion yields no query that retrieves the page; the caller then
    falls back to zero-shot generation.
    """
    z_x = embed_page(page, lib.embedder)
    s_star = lib.nearest_query(z_x)[1] if lib.queries else float("-inf")
    if s_star >= cfg.tau_q:
        hits = lib.queries_above(z_x, cfg.tau_q)
        return QueryResolution(MATCHED, [(q, s) for q, s in hits], s_star)

    trace: dict = {"s_star": s_star, "expanded": [], "kept": []}
    try:
        expanded = expand_queries(page, llm, cfg.n_expand)
    except ExpansionEmptyError as exc:
        trace["error"] = f"{exc.code}: {exc}"
        raise NoCoverageError(f"page {page.page_id}: expansion failed ({exc})", trace) from exc
    trace["expanded"] = expanded
    kept = relevance_filter(expanded, page.url, search, cfg.K_hit)
    trace["kept"] = kept
    if not kept:
        raise NoCoverageError(f"page {page.page_id}: no expanded query retrieves {page.url}", trace)
    added = augment_library(lib, kept, search, cfg.K_aug, page.url)
    return QueryResolution(EXPANDED, [(q, None) for q in kept], s_star, True, added, trace)
